//! One-vs-rest linear SVM trained by stochastic subgradient descent on the
//! primal hinge objective `lambda/2 ||w||^2 + mean_i max(0, 1 - y_i w.x_i)`.
//!
//! A constant feature is appended so the bias is learned (and regularized)
//! along with the weights. The returned weights are the average of the
//! iterates over the second half of training.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::embedding::Embedding;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvmConfig {
    /// Inverse regularization; `lambda = 1 / (c * n_train)`.
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            epochs: 50,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearClassifier {
    /// `classes x (d + 1)`; the last column is the bias.
    pub weights: DMatrix<f64>,
    /// Classes without positive training examples; they always score `-inf`.
    pub empty_classes: Vec<usize>,
    pub config: SvmConfig,
}

impl LinearClassifier {
    pub fn num_classes(&self) -> usize {
        self.weights.nrows()
    }

    /// `nodes x classes` decision values.
    pub fn scores(&self, embedding: &Embedding, nodes: &[usize]) -> DMatrix<f64> {
        let d = embedding.dim();
        let x = embedding.matrix();
        DMatrix::from_fn(nodes.len(), self.num_classes(), |r, c| {
            if self.empty_classes.binary_search(&c).is_ok() {
                return f64::NEG_INFINITY;
            }
            let i = nodes[r];
            let mut s = self.weights[(c, d)];
            for j in 0..d {
                s += self.weights[(c, j)] * x[(i, j)];
            }
            s
        })
    }
}

fn pegasos(xs: &[Vec<f64>], ys: &[f64], lambda: f64, epochs: usize, seed: u64) -> Vec<f64> {
    let dim = xs[0].len();
    let mut w = vec![0.0; dim];
    let mut avg = vec![0.0; dim];
    let mut averaged = 0usize;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0usize;
    let burn_in = epochs / 2;
    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let margin = ys[i] * xs[i].iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            let shrink = 1.0 - eta * lambda;
            for v in w.iter_mut() {
                *v *= shrink;
            }
            if margin < 1.0 {
                for (v, a) in w.iter_mut().zip(&xs[i]) {
                    *v += eta * ys[i] * a;
                }
            }
            if epoch >= burn_in {
                averaged += 1;
                let f = 1.0 / averaged as f64;
                for (a, v) in avg.iter_mut().zip(&w) {
                    *a += (v - *a) * f;
                }
            }
        }
    }
    avg
}

/// Fits one binary scorer per class on `train` with label sets `labels[i]`.
pub fn train_classifier(
    embedding: &Embedding,
    train: &[usize],
    labels: &dyn Fn(usize) -> Vec<usize>,
    num_classes: usize,
    config: &SvmConfig,
) -> Result<LinearClassifier> {
    if train.is_empty() {
        return Err(Error::Data("classifier training set is empty".into()));
    }
    if !embedding.is_finite() {
        return Err(Error::Data("embedding contains non-finite values".into()));
    }
    if config.epochs == 0 || !(config.c > 0.0) {
        return Err(Error::Config("svm needs epochs >= 1 and c > 0".into()));
    }
    let d = embedding.dim();
    let xs: Vec<Vec<f64>> = train
        .iter()
        .map(|&i| {
            let mut row = embedding.row(i);
            row.push(1.0);
            row
        })
        .collect();
    let label_sets: Vec<Vec<usize>> = train.iter().map(|&i| labels(i)).collect();
    let lambda = 1.0 / (config.c * train.len() as f64);

    let mut empty_classes = Vec::new();
    for c in 0..num_classes {
        if !label_sets.iter().any(|s| s.contains(&c)) {
            empty_classes.push(c);
        }
    }
    if !empty_classes.is_empty() {
        log::info!("classes without positive training examples: {empty_classes:?}");
    }

    let rows: Vec<Vec<f64>> = (0..num_classes)
        .into_par_iter()
        .map(|c| {
            if empty_classes.binary_search(&c).is_ok() {
                return vec![0.0; d + 1];
            }
            let ys: Vec<f64> = label_sets
                .iter()
                .map(|s| if s.contains(&c) { 1.0 } else { -1.0 })
                .collect();
            pegasos(&xs, &ys, lambda, config.epochs, config.seed.wrapping_add(c as u64))
        })
        .collect();
    let weights = DMatrix::from_fn(num_classes, d + 1, |c, j| rows[c][j]);
    Ok(LinearClassifier {
        weights,
        empty_classes,
        config: *config,
    })
}

/// Top-`counts[r]` classes per row, by descending score then ascending class id.
pub fn predict(scores: &DMatrix<f64>, counts: &[usize]) -> Vec<Vec<usize>> {
    assert_eq!(scores.nrows(), counts.len());
    (0..scores.nrows())
        .map(|r| {
            let mut classes: Vec<usize> = (0..scores.ncols()).collect();
            classes.sort_by(|&a, &b| scores[(r, b)].total_cmp(&scores[(r, a)]).then(a.cmp(&b)));
            classes.truncate(counts[r]);
            classes.sort_unstable();
            classes
        })
        .collect()
}
