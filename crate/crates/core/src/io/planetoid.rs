//! Conversion of the LINQS `.content` / `.cites` dumps (Citeseer, Cora).
//!
//! `.content` rows are `id f_1 ... f_m class`; `.cites` rows are `cited citing`.
//! Citations naming an id absent from `.content` are dropped, as are self-citations.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{content_lines, create};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PlanetoidSummary {
    pub nodes: usize,
    pub edges: usize,
    pub dropped_edges: usize,
    pub feature_dim: usize,
    pub edges_path: PathBuf,
    pub features_path: PathBuf,
    pub labels_path: PathBuf,
}

pub fn convert_planetoid(content: &Path, cites: &Path, out_dir: &Path, name: &str) -> Result<PlanetoidSummary> {
    let rows = content_lines(content)?;
    let mut ids = Vec::with_capacity(rows.len());
    let mut known = HashSet::new();
    let mut feature_dim = None;
    let edges_path = out_dir.join(format!("{name}.edges"));
    let features_path = out_dir.join(format!("{name}.features"));
    let labels_path = out_dir.join(format!("{name}.labels"));
    let mut fw = create(&features_path)?;
    let mut lw = create(&labels_path)?;
    for (line, text) in &rows {
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() < 2 {
            return Err(Error::parse(content, *line, "expected `id features... class`"));
        }
        let (id, class) = (toks[0], toks[toks.len() - 1]);
        let feats = &toks[1..toks.len() - 1];
        match feature_dim {
            None => feature_dim = Some(feats.len()),
            Some(m) if m != feats.len() => {
                return Err(Error::parse(content, *line, format!("expected {m} features, found {}", feats.len())));
            }
            _ => {}
        }
        if !known.insert(id.to_string()) {
            return Err(Error::parse(content, *line, format!("duplicate id `{id}`")));
        }
        let write_err = |e| Error::io(&features_path, e);
        write!(fw, "{id}").map_err(write_err)?;
        for (j, v) in feats.iter().enumerate() {
            let x: f64 = v.parse().map_err(|_| Error::parse(content, *line, format!("bad feature `{v}`")))?;
            if x != 0.0 {
                write!(fw, " {j}:{x}").map_err(write_err)?;
            }
        }
        writeln!(fw).map_err(write_err)?;
        writeln!(lw, "{id} {class}").map_err(|e| Error::io(&labels_path, e))?;
        ids.push(id.to_string());
    }
    fw.flush().map_err(|e| Error::io(&features_path, e))?;
    lw.flush().map_err(|e| Error::io(&labels_path, e))?;

    let mut ew = create(&edges_path)?;
    let eio = |e| Error::io(&edges_path, e);
    // Every node is declared so isolated documents survive the round trip.
    for id in &ids {
        writeln!(ew, "{id}").map_err(eio)?;
    }
    let (mut edges, mut dropped) = (0, 0);
    for (line, text) in content_lines(cites)? {
        let toks: Vec<&str> = text.split_whitespace().collect();
        let [a, b] = toks.as_slice() else {
            return Err(Error::parse(cites, line, "expected `cited citing`"));
        };
        if a == b || !known.contains(*a) || !known.contains(*b) {
            dropped += 1;
            continue;
        }
        writeln!(ew, "{a} {b}").map_err(eio)?;
        edges += 1;
    }
    ew.flush().map_err(eio)?;
    if dropped > 0 {
        log::warn!("dropped {dropped} citations with unknown endpoints or self-loops");
    }
    Ok(PlanetoidSummary {
        nodes: ids.len(),
        edges,
        dropped_edges: dropped,
        feature_dim: feature_dim.unwrap_or(0),
        edges_path,
        features_path,
        labels_path,
    })
}
