//! Dataset files, embedding serialization and synthetic graphs.
//!
//! Formats (all UTF-8 text, `#` starts a comment line):
//!
//! * edges: `a b [weight]` per line; a single token declares an isolated node.
//! * features: sparse `node col:val col:val ...`, or dense CSV `node,v1,v2,...`.
//! * labels: `node c1,c2,...`.
//! * embedding: header `#n d`, then `node<TAB>v1<TAB>...<TAB>vd`.
//! * id map: `index<TAB>original_id`.
//!
//! Node ids are remapped to `0..n` in numeric order when every id is an
//! integer and lexicographic order otherwise. Class names are ordered the same way.

mod generate;
mod planetoid;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub use generate::{generate_random_graph, generate_sbm, scalability_split, SCALABILITY_TRAIN_RATE};
pub use planetoid::{convert_planetoid, PlanetoidSummary};

use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::graph::{CsrMatrix, Graph};
use crate::labels::LabelTable;
use nalgebra::DMatrix;

#[derive(Clone, Debug)]
pub struct DatasetBundle {
    pub name: String,
    pub graph: Graph,
    /// `None` means adjacency rows stand in for features.
    pub features: Option<CsrMatrix>,
    pub labels: LabelTable,
    /// Original id of each dense index.
    pub ids: Vec<String>,
}

impl DatasetBundle {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn has_labels(&self) -> bool {
        self.labels.num_classes() > 0
    }
}

/// Numeric order when every token parses as an integer, else lexicographic.
pub fn sort_ids(ids: &mut [String]) {
    let numeric: Option<Vec<i128>> = ids.iter().map(|s| s.parse().ok()).collect();
    if numeric.is_some() {
        ids.sort_by_key(|s| s.parse::<i128>().unwrap());
    } else {
        ids.sort();
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn content_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (idx, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push((idx + 1, trimmed.to_string()));
    }
    Ok(out)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub struct EdgeList {
    pub ids: Vec<String>,
    pub edges: Vec<(usize, usize, f64)>,
}

pub fn read_edges(path: &Path) -> Result<EdgeList> {
    let mut raw: Vec<(String, Option<(String, f64)>)> = Vec::new();
    for (line, text) in content_lines(path)? {
        let toks: Vec<&str> = text.split_whitespace().collect();
        match toks.as_slice() {
            [a] => raw.push((a.to_string(), None)),
            [a, b] => raw.push((a.to_string(), Some((b.to_string(), 1.0)))),
            [a, b, w] => {
                let w: f64 = w
                    .parse()
                    .map_err(|_| Error::parse(path, line, format!("bad weight `{w}`")))?;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::parse(path, line, format!("weight {w} must be positive")));
                }
                raw.push((a.to_string(), Some((b.to_string(), w))));
            }
            _ => return Err(Error::parse(path, line, "expected `a b [weight]`")),
        }
    }
    let mut ids: Vec<String> = raw
        .iter()
        .flat_map(|(a, b)| std::iter::once(a.clone()).chain(b.iter().map(|(b, _)| b.clone())))
        .collect();
    sort_ids(&mut ids);
    ids.dedup();
    if ids.is_empty() {
        return Err(Error::Data(format!("{} declares no nodes", path.display())));
    }
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let edges = raw
        .iter()
        .filter_map(|(a, b)| b.as_ref().map(|(b, w)| (index[a.as_str()], index[b.as_str()], *w)))
        .collect();
    Ok(EdgeList { ids, edges })
}

fn lookup(index: &HashMap<&str, usize>, id: &str, path: &Path, line: usize) -> Result<usize> {
    index
        .get(id)
        .copied()
        .ok_or_else(|| Error::parse(path, line, format!("node `{id}` does not appear in the edge file")))
}

pub fn read_features(path: &Path, ids: &[String]) -> Result<CsrMatrix> {
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let lines = content_lines(path)?;
    let dense = lines.first().is_some_and(|(_, t)| t.contains(','));
    let mut seen = vec![false; ids.len()];
    let mut triplets = Vec::new();
    let mut width: Option<usize> = None;
    let mut max_col = 0usize;
    for (line, text) in &lines {
        let (node, rest): (&str, Vec<&str>) = if dense {
            let mut it = text.split(',').map(str::trim);
            (it.next().unwrap_or(""), it.collect())
        } else {
            let mut it = text.split_whitespace();
            (it.next().unwrap_or(""), it.collect())
        };
        let i = lookup(&index, node, path, *line)?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::parse(path, *line, format!("duplicate feature row for `{node}`")));
        }
        if dense {
            match width {
                None => width = Some(rest.len()),
                Some(w) if w != rest.len() => {
                    return Err(Error::parse(path, *line, format!("expected {w} values, found {}", rest.len())));
                }
                _ => {}
            }
            for (j, tok) in rest.iter().enumerate() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::parse(path, *line, format!("bad value `{tok}`")))?;
                triplets.push((i, j, v));
            }
        } else {
            for tok in rest {
                let (c, v) = tok
                    .split_once(':')
                    .ok_or_else(|| Error::parse(path, *line, format!("expected col:val, found `{tok}`")))?;
                let c: usize = c
                    .parse()
                    .map_err(|_| Error::parse(path, *line, format!("bad column `{c}`")))?;
                let v: f64 = v
                    .parse()
                    .map_err(|_| Error::parse(path, *line, format!("bad value `{v}`")))?;
                if !v.is_finite() {
                    return Err(Error::parse(path, *line, "non-finite feature value"));
                }
                max_col = max_col.max(c + 1);
                triplets.push((i, c, v));
            }
        }
    }
    let m = width.unwrap_or(max_col);
    if m == 0 {
        return Err(Error::Data(format!("{} has no feature columns", path.display())));
    }
    Ok(CsrMatrix::from_triplets(ids.len(), m, triplets))
}

pub fn read_labels(path: &Path, ids: &[String]) -> Result<LabelTable> {
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut rows: Vec<(usize, usize, Vec<String>)> = Vec::new();
    for (line, text) in content_lines(path)? {
        let toks: Vec<&str> = text.split_whitespace().collect();
        let [node, classes] = toks.as_slice() else {
            return Err(Error::parse(path, line, "expected `node c1,c2,...`"));
        };
        let i = lookup(&index, node, path, line)?;
        let names: Vec<String> = classes.split(',').filter(|s| !s.is_empty()).map(String::from).collect();
        if names.is_empty() {
            return Err(Error::parse(path, line, "empty class list"));
        }
        rows.push((line, i, names));
    }
    let mut classes: Vec<String> = rows.iter().flat_map(|(_, _, c)| c.iter().cloned()).collect();
    sort_ids(&mut classes);
    classes.dedup();
    let class_index: HashMap<&str, usize> =
        classes.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut node_labels = vec![Vec::new(); ids.len()];
    for (line, i, names) in &rows {
        if !node_labels[*i].is_empty() {
            return Err(Error::parse(path, *line, format!("duplicate label row for `{}`", ids[*i])));
        }
        node_labels[*i] = names.iter().map(|c| class_index[c.as_str()]).collect();
    }
    LabelTable::new(classes, node_labels)
}

pub fn load_dataset(
    edges: &Path,
    features: Option<&Path>,
    labels: Option<&Path>,
    directed: bool,
) -> Result<DatasetBundle> {
    let list = read_edges(edges)?;
    let n = list.ids.len();
    let graph = if directed {
        Graph::directed(n, &list.edges)?
    } else {
        Graph::undirected(n, &list.edges)?
    };
    let features = features.map(|p| read_features(p, &list.ids)).transpose()?;
    let labels = match labels {
        Some(p) => read_labels(p, &list.ids)?,
        None => LabelTable::new(Vec::new(), vec![Vec::new(); n])?,
    };
    let name = edges
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Ok(DatasetBundle {
        name,
        graph,
        features,
        labels,
        ids: list.ids,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetPaths {
    pub edges: std::path::PathBuf,
    pub features: Option<std::path::PathBuf>,
    pub labels: Option<std::path::PathBuf>,
}

/// Writes `<name>.edges`, `<name>.features` (when present) and `<name>.labels`
/// (when labeled) into `dir`, in the formats [`load_dataset`] reads.
pub fn write_dataset(bundle: &DatasetBundle, dir: &Path, name: &str) -> Result<DatasetPaths> {
    let ids = &bundle.ids;
    let edges = dir.join(format!("{name}.edges"));
    let mut w = create(&edges)?;
    let io = |e| Error::io(&edges, e);
    for (i, id) in ids.iter().enumerate() {
        if bundle.graph.degree(i) == 0 {
            writeln!(w, "{id}").map_err(io)?;
        }
    }
    for (a, b, wt) in bundle.graph.edges() {
        if wt == 1.0 {
            writeln!(w, "{} {}", ids[a], ids[b]).map_err(io)?;
        } else {
            writeln!(w, "{} {} {wt}", ids[a], ids[b]).map_err(io)?;
        }
    }
    w.flush().map_err(io)?;

    let features = match &bundle.features {
        Some(x) => {
            let path = dir.join(format!("{name}.features"));
            let mut w = create(&path)?;
            let io = |e| Error::io(&path, e);
            for (i, id) in ids.iter().enumerate() {
                let (cols, vals) = x.row(i);
                if cols.is_empty() {
                    continue;
                }
                write!(w, "{id}").map_err(io)?;
                for (c, v) in cols.iter().zip(vals) {
                    write!(w, " {c}:{v}").map_err(io)?;
                }
                writeln!(w).map_err(io)?;
            }
            w.flush().map_err(io)?;
            Some(path)
        }
        None => None,
    };

    let labels = if bundle.has_labels() {
        let path = dir.join(format!("{name}.labels"));
        let mut w = create(&path)?;
        let io = |e| Error::io(&path, e);
        let names = bundle.labels.class_names();
        for (i, id) in ids.iter().enumerate() {
            let set = bundle.labels.labels(i);
            if set.is_empty() {
                continue;
            }
            let joined: Vec<&str> = set.iter().map(|&c| names[c].as_str()).collect();
            writeln!(w, "{id} {}", joined.join(",")).map_err(io)?;
        }
        w.flush().map_err(io)?;
        Some(path)
    } else {
        None
    };
    Ok(DatasetPaths {
        edges,
        features,
        labels,
    })
}

pub fn write_idmap(path: &Path, ids: &[String]) -> Result<()> {
    let mut w = create(path)?;
    for (i, id) in ids.iter().enumerate() {
        writeln!(w, "{i}\t{id}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_idmap(path: &Path) -> Result<Vec<String>> {
    let mut ids = Vec::new();
    for (line, text) in content_lines(path)? {
        let (i, id) = text
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, line, "expected `index<TAB>id`"))?;
        if i.parse::<usize>().ok() != Some(ids.len()) {
            return Err(Error::parse(path, line, format!("expected index {}", ids.len())));
        }
        ids.push(id.to_string());
    }
    Ok(ids)
}

/// Writes with shortest round-trip formatting, so reading back is bit-exact.
pub fn write_embedding(path: &Path, embedding: &Embedding, ids: Option<&[String]>) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "#{} {}", embedding.n(), embedding.dim()).map_err(io)?;
    let m = embedding.matrix();
    for i in 0..embedding.n() {
        match ids {
            Some(ids) => write!(w, "{}", ids[i]),
            None => write!(w, "{i}"),
        }
        .map_err(io)?;
        for j in 0..embedding.dim() {
            write!(w, "\t{}", m[(i, j)]).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Returns the embedding and the node id column.
pub fn read_embedding(path: &Path) -> Result<(Embedding, Vec<String>)> {
    let mut lines = open(path)?.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::parse(path, 1, "missing `#n d` header")),
    };
    let dims: Vec<usize> = header
        .strip_prefix('#')
        .map(|h| h.split_whitespace().filter_map(|t| t.parse().ok()).collect())
        .unwrap_or_default();
    let [n, d] = dims.as_slice() else {
        return Err(Error::parse(path, 1, "missing `#n d` header"));
    };
    let (n, d) = (*n, *d);
    let mut values = Vec::with_capacity(n * d);
    let mut ids = Vec::with_capacity(n);
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut toks = line.split('\t');
        ids.push(toks.next().unwrap_or("").to_string());
        let before = values.len();
        for t in toks {
            values.push(t.parse::<f64>().map_err(|_| Error::parse(path, idx + 1, format!("bad value `{t}`")))?);
        }
        if values.len() - before != d {
            return Err(Error::parse(
                path,
                idx + 1,
                format!("expected {d} values, found {}", values.len() - before),
            ));
        }
    }
    if ids.len() != n {
        return Err(Error::Data(format!(
            "{}: header declares {n} rows, found {}",
            path.display(),
            ids.len()
        )));
    }
    Ok((Embedding::new(DMatrix::from_row_slice(n, d, &values)), ids))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn path_graph_from_two_lines() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "g.txt", "0 1\n1 2\n");
        let b = load_dataset(&e, None, None, false).unwrap();
        assert_eq!(b.n(), 3);
        assert_eq!(b.graph.edge_count(), 2);
        assert!(!b.has_labels());
        assert_eq!(b.name, "g");
    }

    #[test]
    fn numeric_ids_sort_numerically() {
        let mut ids: Vec<String> = ["10", "9", "100"].iter().map(|s| s.to_string()).collect();
        sort_ids(&mut ids);
        assert_eq!(ids, ["9", "10", "100"]);
        let mut ids: Vec<String> = ["b", "10", "a"].iter().map(|s| s.to_string()).collect();
        sort_ids(&mut ids);
        assert_eq!(ids, ["10", "a", "b"]);
    }

    #[test]
    fn sparse_and_dense_features() {
        let dir = tempfile::tempdir().unwrap();
        let ids: Vec<String> = (0..2).map(|i| i.to_string()).collect();
        let f = write(dir.path(), "f.txt", "# c\n0 3:1.5 7:2.0\n");
        let x = read_features(&f, &ids).unwrap();
        assert_eq!(x.row_nnz(0), 2);
        assert_eq!(x.ncols(), 8);
        assert_eq!(x.get(0, 7), 2.0);
        let f = write(dir.path(), "f.csv", "0,1,0\n1,0,2.5\n");
        let x = read_features(&f, &ids).unwrap();
        assert_eq!((x.ncols(), x.get(1, 1)), (2, 2.5));
        let f = write(dir.path(), "bad.csv", "0,1,0\n1,0\n");
        assert!(matches!(read_features(&f, &ids), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn multi_label_and_dangling_ids() {
        let dir = tempfile::tempdir().unwrap();
        let ids: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        let l = write(dir.path(), "l.txt", "4 1,3\n0 0\n");
        let t = read_labels(&l, &ids).unwrap();
        assert_eq!(t.class_names(), ["0", "1", "3"]);
        assert_eq!(t.labels(4), &[1, 2]);
        let l = write(dir.path(), "l2.txt", "0 a\n9 b\n");
        let err = read_labels(&l, &ids).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn malformed_edge_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(dir.path(), "g.txt", "0 1\n# x\n1 2 3 4\n");
        assert!(matches!(read_edges(&e), Err(Error::Parse { line: 3, .. })));
        let e = write(dir.path(), "w.txt", "0 1 -1\n");
        assert!(read_edges(&e).is_err());
    }

    #[test]
    fn embedding_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.tsv");
        let m = DMatrix::from_row_slice(2, 3, &[0.1, -1.0 / 3.0, 1e-300, f64::MAX, 2.0, -0.0]);
        let e = Embedding::new(m);
        write_embedding(&p, &e, None).unwrap();
        let (back, ids) = read_embedding(&p).unwrap();
        assert_eq!(ids, ["0", "1"]);
        for (a, b) in e.matrix().iter().zip(back.matrix().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn empty_embedding_and_header_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.tsv");
        write_embedding(&p, &Embedding::new(DMatrix::zeros(0, 4)), None).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "#0 4\n");
        assert_eq!(read_embedding(&p).unwrap().0.n(), 0);
        let p = write(dir.path(), "bad.tsv", "#2 2\n0\t1\t2\n");
        assert!(read_embedding(&p).is_err());
        let p = write(dir.path(), "bad2.tsv", "#1 2\n0\t1\n");
        assert!(read_embedding(&p).is_err());
    }

    #[test]
    fn idmap_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.idmap");
        let ids: Vec<String> = ["x", "y z"].iter().map(|s| s.to_string()).collect();
        write_idmap(&p, &ids).unwrap();
        assert_eq!(read_idmap(&p).unwrap(), ids);
    }
}
