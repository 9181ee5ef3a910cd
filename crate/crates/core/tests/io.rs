use std::fs;

use cine_core::io::{
    convert_planetoid, generate_random_graph, generate_sbm, load_dataset, read_embedding, read_idmap,
    scalability_split, write_dataset, write_embedding, write_idmap, SCALABILITY_TRAIN_RATE,
};
use cine_core::labels::SplitPlan;
use cine_core::Embedding;

#[test]
fn generated_dataset_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let b = generate_sbm(3, 10, 0.3, 0.02, 4).unwrap();
    let paths = write_dataset(&b, dir.path(), "sbm").unwrap();
    let back = load_dataset(&paths.edges, paths.features.as_deref(), paths.labels.as_deref(), false).unwrap();
    assert_eq!(back.ids, b.ids);
    assert_eq!(back.graph.adjacency().to_dense(), b.graph.adjacency().to_dense());
    assert_eq!(back.labels, b.labels);
}

#[test]
fn random_graph_with_features_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let b = generate_random_graph(50, 1).unwrap();
    assert_eq!(b.graph.edge_count(), 100);
    let paths = write_dataset(&b, dir.path(), "rnd").unwrap();
    let back = load_dataset(&paths.edges, paths.features.as_deref(), paths.labels.as_deref(), false).unwrap();
    assert_eq!(back.features.unwrap().to_dense(), b.features.unwrap().to_dense());
    let plan = scalability_split(&back.labels, 3).unwrap();
    assert_eq!(plan.train().len(), (SCALABILITY_TRAIN_RATE * 50.0) as usize);
}

#[test]
fn planetoid_dump_converts_and_drops_dangling_citations() {
    let dir = tempfile::tempdir().unwrap();
    let content = dir.path().join("toy.content");
    let cites = dir.path().join("toy.cites");
    fs::write(&content, "p1 1 0 1 A\np2 0 0 0 B\np3 0 1 0 A\n").unwrap();
    fs::write(&cites, "p1 p3\np3 p1\nghost p2\np2 p1\n").unwrap();
    let out = dir.path().join("out");
    fs::create_dir(&out).unwrap();
    let s = convert_planetoid(&content, &cites, &out, "toy").unwrap();
    assert_eq!((s.nodes, s.feature_dim, s.dropped_edges), (3, 3, 1));
    let b = load_dataset(&s.edges_path, Some(&s.features_path), Some(&s.labels_path), false).unwrap();
    assert_eq!(b.n(), 3);
    assert_eq!(b.labels.num_classes(), 2);
    assert_eq!(b.graph.edge_count(), 2);
    let x = b.features.unwrap().to_dense();
    let p2 = b.ids.iter().position(|id| id == "p2").unwrap();
    assert_eq!(x.row(p2).sum(), 0.0);
}

#[test]
fn embedding_and_idmap_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let e = Embedding::new(nalgebra::DMatrix::from_fn(4, 3, |i, j| (i as f64 + 0.1) / (j as f64 + 3.0)));
    let ids: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    let path = dir.path().join("e.tsv");
    write_embedding(&path, &e, Some(&ids)).unwrap();
    let (back, back_ids) = read_embedding(&path).unwrap();
    assert_eq!(back, e);
    assert_eq!(back_ids, ids);
    let map = dir.path().join("x.idmap");
    write_idmap(&map, &ids).unwrap();
    assert_eq!(read_idmap(&map).unwrap(), ids);
}

#[test]
fn split_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let b = generate_sbm(4, 8, 0.5, 0.1, 2).unwrap();
    let plan = SplitPlan::sample(&b.labels, 0.5, 2, 8).unwrap();
    let path = dir.path().join("split.txt");
    plan.write(&b.labels, &path).unwrap();
    assert_eq!(SplitPlan::read(&b.labels, &path).unwrap(), plan);
}

#[test]
fn malformed_edge_line_reports_its_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.edges");
    fs::write(&p, "1 2\n2 3 notanumber\n").unwrap();
    let err = load_dataset(&p, None, None, false).unwrap_err().to_string();
    assert!(err.contains(":2:"), "{err}");
}
