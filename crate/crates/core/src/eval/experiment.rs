//! Split, embed, classify and score, repeated over rates and seeds.

use rayon::prelude::*;

use super::f1::{f1, F1Report};
use super::methods::{embed_method, EmbedContext, Method, MethodSettings};
use super::svm::{predict, train_classifier, SvmConfig};
use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::labels::{LabelTable, LabeledView, SplitPlan, UnseenSchedule};

/// An embedding method as seen by the harness: it gets `L'` and nothing else.
pub trait Embedder: Sync {
    fn name(&self) -> String;
    fn embed(&self, ctx: &EmbedContext<'_>, view: &LabeledView, seed: u64) -> Result<Embedding>;
}

/// A built-in method with fixed hyperparameters; the per-run seed overrides theirs.
pub struct Builtin {
    pub method: Method,
    pub settings: MethodSettings,
}

impl Embedder for Builtin {
    fn name(&self) -> String {
        self.method.name().to_string()
    }

    fn embed(&self, ctx: &EmbedContext<'_>, view: &LabeledView, seed: u64) -> Result<Embedding> {
        let settings = self.settings.with_seed(seed);
        Ok(embed_method(self.method, ctx, view, &settings, None)?.embedding)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub rates: Vec<f64>,
    pub unseen_count: usize,
    pub schedule: UnseenSchedule,
    pub repeats: usize,
    pub seed: u64,
    pub svm: SvmConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            rates: vec![0.1, 0.3, 0.5],
            unseen_count: 2,
            schedule: UnseenSchedule::Random,
            repeats: 10,
            seed: 0,
            svm: SvmConfig::default(),
        }
    }
}

/// SplitMix64 finalizer over a seed and two indices.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Builds the split for one `(rate, repeat)` cell.
pub fn plan_for(labels: &LabelTable, config: &ExperimentConfig, rate: f64, seed: u64, repeat: usize) -> Result<SplitPlan> {
    match config
        .schedule
        .unseen_for(labels.num_classes(), config.unseen_count, repeat)
    {
        Some(unseen) => SplitPlan::with_unseen(labels, rate, &unseen, seed),
        None => SplitPlan::sample(labels, rate, config.unseen_count, seed),
    }
}

/// Trains the classifier on `L` (all sampled training labels, unseen classes
/// included) and scores predictions on the test nodes.
pub fn evaluate_embedding(
    embedding: &Embedding,
    plan: &SplitPlan,
    labels: &LabelTable,
    svm: &SvmConfig,
) -> Result<F1Report> {
    if embedding.n() != labels.n() {
        return Err(Error::Data(format!(
            "embedding has {} rows for {} nodes",
            embedding.n(),
            labels.n()
        )));
    }
    let train = plan.train();
    let test = plan.test();
    let clf = train_classifier(
        embedding,
        &train,
        &|i| labels.labels(i).to_vec(),
        labels.num_classes(),
        svm,
    )?;
    let counts: Vec<usize> = test.iter().map(|&i| labels.labels(i).len()).collect();
    let pred = predict(&clf.scores(embedding, &test), &counts);
    let truth: Vec<Vec<usize>> = test.iter().map(|&i| labels.labels(i).to_vec()).collect();
    f1(&pred, &truth, labels.num_classes())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub method: String,
    pub rate: f64,
    pub repeat: usize,
    pub unseen: Vec<usize>,
    pub micro_f1: f64,
    pub macro_f1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub method: String,
    pub rate: f64,
    pub repeats: usize,
    pub micro_mean: f64,
    pub micro_std: f64,
    pub macro_mean: f64,
    pub macro_std: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("method\trate\trepeat\tmicro_f1\tmacro_f1\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                r.method, r.rate, r.repeat, r.micro_f1, r.macro_f1
            ));
        }
        out
    }

    /// Mean and sample standard deviation per `(method, rate)`, in first-seen order.
    pub fn summary(&self) -> Vec<Summary> {
        let mut keys: Vec<(String, f64)> = Vec::new();
        for r in &self.rows {
            if !keys.iter().any(|(m, x)| *m == r.method && *x == r.rate) {
                keys.push((r.method.clone(), r.rate));
            }
        }
        keys.into_iter()
            .map(|(method, rate)| {
                let cell: Vec<&MetricsRow> = self
                    .rows
                    .iter()
                    .filter(|r| r.method == method && r.rate == rate)
                    .collect();
                let micro: Vec<f64> = cell.iter().map(|r| r.micro_f1).collect();
                let macro_: Vec<f64> = cell.iter().map(|r| r.macro_f1).collect();
                let (micro_mean, micro_std) = mean_std(&micro);
                let (macro_mean, macro_std) = mean_std(&macro_);
                Summary {
                    method,
                    rate,
                    repeats: cell.len(),
                    micro_mean,
                    micro_std,
                    macro_mean,
                    macro_std,
                }
            })
            .collect()
    }

    pub fn mean_micro(&self, method: &str, rate: f64) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|s| s.method == method && s.rate == rate)
            .map(|s| s.micro_mean)
    }

    pub fn report(&self) -> String {
        let mut out = String::from("method      rate   repeats  micro-F1         macro-F1\n");
        for s in self.summary() {
            out.push_str(&format!(
                "{:<11} {:<6} {:<8} {:.4} ± {:.4}  {:.4} ± {:.4}\n",
                s.method, s.rate, s.repeats, s.micro_mean, s.micro_std, s.macro_mean, s.macro_std
            ));
        }
        out
    }
}

/// Runs every embedder on identical splits for every `(rate, repeat)` cell.
pub fn run_experiment(
    ctx: &EmbedContext<'_>,
    labels: &LabelTable,
    embedders: &[&dyn Embedder],
    config: &ExperimentConfig,
) -> Result<MetricsTable> {
    if labels.n() != ctx.graph.n() {
        return Err(Error::Data(format!(
            "label table covers {} nodes, graph has {}",
            labels.n(),
            ctx.graph.n()
        )));
    }
    if config.repeats == 0 || config.rates.is_empty() || embedders.is_empty() {
        return Err(Error::Config("experiment needs rates, repeats and methods".into()));
    }
    let cells: Vec<(usize, usize)> = (0..config.rates.len())
        .flat_map(|ri| (0..config.repeats).map(move |r| (ri, r)))
        .collect();
    let results: Vec<Result<Vec<MetricsRow>>> = cells
        .par_iter()
        .map(|&(ri, repeat)| {
            let rate = config.rates[ri];
            let seed = derive_seed(config.seed, ri as u64, repeat as u64);
            let plan = plan_for(labels, config, rate, seed, repeat)?;
            let view = LabeledView::new(&plan, labels);
            let svm = SvmConfig { seed, ..config.svm };
            let mut rows = Vec::with_capacity(embedders.len());
            for e in embedders {
                let embedding = e.embed(ctx, &view, seed)?;
                let report = evaluate_embedding(&embedding, &plan, labels, &svm)?;
                log::debug!("{} rate={rate} repeat={repeat}: {:.4}", e.name(), report.micro_f1);
                rows.push(MetricsRow {
                    method: e.name(),
                    rate,
                    repeat,
                    unseen: plan.unseen().to_vec(),
                    micro_f1: report.micro_f1,
                    macro_f1: report.macro_f1,
                });
            }
            Ok(rows)
        })
        .collect();
    let mut table = MetricsTable::default();
    for r in results {
        table.rows.extend(r?);
    }
    Ok(table)
}
