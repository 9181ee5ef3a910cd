mod oracles;

use std::sync::Mutex;

use cine_core::eval::{
    derive_seed, f1, plan_for, run_experiment, Builtin, EmbedContext, Embedder, ExperimentConfig, Method,
    MethodSettings,
};
use cine_core::graph::ProximityMatrix;
use cine_core::io::generate_sbm;
use cine_core::labels::{LabeledView, Role};
use cine_core::rsdne::RsdneConfig;
use cine_core::{Embedding, Result};

#[test]
fn f1_agrees_with_confusion_matrix_oracle() {
    assert_eq!(oracles::f1_mismatches(1000), 0);
}

#[test]
fn hand_example_reproduces() {
    let (micro, macro_) = oracles::f1_hand_example();
    assert_eq!(micro, 0.75);
    assert_eq!(macro_, (4.0 / 5.0 + 2.0 / 3.0) / 2.0);
    assert!((macro_ - 0.733_333_333_333_333_3).abs() < 1e-15);
}

#[test]
fn single_label_micro_f1_is_accuracy() {
    for seed in (0..200).step_by(2) {
        let (pred, truth, classes, single) = oracles::random_f1_case(seed);
        assert!(single);
        let correct = pred.iter().zip(&truth).filter(|(p, t)| p == t).count();
        let r = f1(&pred, &truth, classes).unwrap();
        let acc = correct as f64 / truth.len() as f64;
        assert!((r.micro_f1 - acc).abs() < 1e-15, "seed {seed}");
    }
}

/// Records every view it is handed and returns a fixed embedding.
struct Spy {
    seen: Mutex<Vec<(u64, LabeledView)>>,
}

impl Embedder for Spy {
    fn name(&self) -> String {
        "spy".into()
    }

    fn embed(&self, ctx: &EmbedContext<'_>, view: &LabeledView, seed: u64) -> Result<Embedding> {
        self.seen.lock().unwrap().push((seed, view.clone()));
        let n = ctx.graph.n();
        Ok(Embedding::new(nalgebra::DMatrix::from_fn(n, 2, |i, j| ((i * 7 + j * 3) % 5) as f64)))
    }
}

#[test]
fn embedders_only_see_seen_class_training_labels() {
    let b = generate_sbm(4, 12, 0.5, 0.05, 7).unwrap();
    let m = ProximityMatrix::of_graph(&b.graph);
    let ctx = EmbedContext { graph: &b.graph, features: None, proximity: &m };
    let cfg = ExperimentConfig { rates: vec![0.3, 0.6], repeats: 3, seed: 9, ..ExperimentConfig::default() };
    let spy = Spy { seen: Mutex::new(Vec::new()) };
    let table = run_experiment(&ctx, &b.labels, &[&spy], &cfg).unwrap();
    assert_eq!(table.rows.len(), 6);
    let seen = spy.seen.into_inner().unwrap();
    assert_eq!(seen.len(), 6);
    for (ri, &rate) in cfg.rates.iter().enumerate() {
        for repeat in 0..cfg.repeats {
            let seed = derive_seed(cfg.seed, ri as u64, repeat as u64);
            let plan = plan_for(&b.labels, &cfg, rate, seed, repeat).unwrap();
            let (_, view) = seen.iter().find(|(s, _)| *s == seed).expect("cell was run");
            for i in 0..b.n() {
                let expected: &[usize] = if plan.role(i) == Role::Train { b.labels.labels(i) } else { &[] };
                assert_eq!(view.labels(i), expected, "node {i} role {:?}", plan.role(i));
                assert!(view.labels(i).iter().all(|&c| plan.is_seen(c)));
            }
        }
    }
}

#[test]
fn experiments_are_reproducible() {
    let b = generate_sbm(3, 20, 0.4, 0.05, 1).unwrap();
    let m = ProximityMatrix::of_graph(&b.graph);
    let ctx = EmbedContext { graph: &b.graph, features: None, proximity: &m };
    let settings = MethodSettings {
        rsdne: RsdneConfig { dim: 8, ..RsdneConfig::default() },
        ..MethodSettings::default()
    };
    let builtins: Vec<Builtin> = [Method::Mfdw, Method::Rsdne]
        .into_iter()
        .map(|method| Builtin { method, settings: settings.clone() })
        .collect();
    let embedders: Vec<&dyn Embedder> = builtins.iter().map(|b| b as &dyn Embedder).collect();
    let cfg = ExperimentConfig { rates: vec![0.5], unseen_count: 1, repeats: 2, ..ExperimentConfig::default() };
    let a = run_experiment(&ctx, &b.labels, &embedders, &cfg).unwrap();
    let c = run_experiment(&ctx, &b.labels, &embedders, &cfg).unwrap();
    assert_eq!(a.to_tsv(), c.to_tsv());
    assert_eq!(a.summary().len(), 2);
}
