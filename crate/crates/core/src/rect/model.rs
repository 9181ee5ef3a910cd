//! One-layer GCN encoder, the two heads and their losses with manual gradients.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{CsrMatrix, Graph};
use crate::labels::LabeledView;

/// `D^{-1/2} (A + I) D^{-1/2}` with `D` the row sums of `A + I`.
pub fn normalize_adjacency(graph: &Graph) -> CsrMatrix {
    let n = graph.n();
    let with_loops = graph
        .adjacency()
        .linear_combination(1.0, &CsrMatrix::identity(n), 1.0);
    let inv_sqrt: Vec<f64> = with_loops.row_sums().iter().map(|d| 1.0 / d.sqrt()).collect();
    with_loops.map_entries(|i, j, v| v * inv_sqrt[i] * inv_sqrt[j])
}

/// `A_hat X`, the only sparse product the encoder needs; computed once per fit.
pub fn propagate(normalized: &CsrMatrix, features: &CsrMatrix) -> CsrMatrix {
    normalized.matmul(features)
}

pub fn xavier_uniform<R: Rng>(rng: &mut R, fan_in: usize, fan_out: usize) -> DMatrix<f64> {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    DMatrix::from_fn(fan_in, fan_out, |_, _| rng.random_range(-a..=a))
}

/// GCN weight `m x h` and per-channel PReLU slope `1 x h`.
#[derive(Clone, Debug, PartialEq)]
pub struct GcnParams {
    pub weight: DMatrix<f64>,
    pub slope: DMatrix<f64>,
}

impl GcnParams {
    pub fn init<R: Rng>(rng: &mut R, input: usize, hidden: usize, slope: f64) -> Self {
        GcnParams {
            weight: xavier_uniform(rng, input, hidden),
            slope: DMatrix::from_element(1, hidden, slope),
        }
    }
}

/// Linear head `h x s` plus bias `1 x s`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeadParams {
    pub weight: DMatrix<f64>,
    pub bias: DMatrix<f64>,
}

impl HeadParams {
    pub fn init<R: Rng>(rng: &mut R, hidden: usize, out: usize) -> Self {
        HeadParams {
            weight: xavier_uniform(rng, hidden, out),
            bias: DMatrix::zeros(1, out),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Activations {
    pub pre: DMatrix<f64>,
    pub hidden: DMatrix<f64>,
}

pub fn gcn_forward(propagated: &CsrMatrix, params: &GcnParams) -> Activations {
    let pre = propagated.mul_dense(&params.weight);
    let hidden = DMatrix::from_fn(pre.nrows(), pre.ncols(), |i, j| {
        let x = pre[(i, j)];
        if x > 0.0 {
            x
        } else {
            params.slope[(0, j)] * x
        }
    });
    Activations { pre, hidden }
}

/// Back-propagates `d loss / d hidden` through PReLU and the propagated input.
fn gcn_backward(
    propagated: &CsrMatrix,
    params: &GcnParams,
    act: &Activations,
    d_hidden: &DMatrix<f64>,
) -> GcnParams {
    let h = act.pre.ncols();
    let mut d_slope = DMatrix::zeros(1, h);
    let d_pre = DMatrix::from_fn(act.pre.nrows(), h, |i, j| {
        let x = act.pre[(i, j)];
        if x > 0.0 {
            d_hidden[(i, j)]
        } else {
            d_slope[(0, j)] += d_hidden[(i, j)] * x;
            d_hidden[(i, j)] * params.slope[(0, j)]
        }
    });
    GcnParams {
        weight: propagated.tr_mul_dense(&d_pre),
        slope: d_slope,
    }
}

pub fn head_forward(hidden: &DMatrix<f64>, head: &HeadParams) -> DMatrix<f64> {
    let mut out = hidden * &head.weight;
    for mut row in out.row_iter_mut() {
        row += &head.bias;
    }
    out
}

/// Per-class semantic targets: the mean reduced feature of the class's labeled members.
#[derive(Clone, Debug)]
pub struct SemanticTargets {
    /// `row_of[c]` indexes `vectors` for every class with a target.
    row_of: Vec<Option<usize>>,
    pub vectors: DMatrix<f64>,
}

impl SemanticTargets {
    pub fn readout(reduced: &DMatrix<f64>, view: &LabeledView) -> Result<Self> {
        let mut row_of = vec![None; view.num_classes()];
        let mut rows = Vec::new();
        for c in 0..view.num_classes() {
            if !view.is_seen(c) {
                continue;
            }
            let members = view.members(c);
            if members.is_empty() {
                log::warn!("seen class {c} has no labeled members; no semantic target");
                continue;
            }
            let mut mean = DMatrix::zeros(1, reduced.ncols());
            for &i in members {
                mean += reduced.row(i);
            }
            mean /= members.len() as f64;
            row_of[c] = Some(rows.len());
            rows.push(mean);
        }
        if rows.is_empty() {
            return Err(Error::Data("no labeled nodes to build semantic targets from".into()));
        }
        let vectors = DMatrix::from_fn(rows.len(), reduced.ncols(), |i, j| rows[i][(0, j)]);
        Ok(SemanticTargets { row_of, vectors })
    }

    pub fn target(&self, class: usize) -> Option<usize> {
        self.row_of.get(class).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.nrows() == 0
    }

    /// Every `(node, target row)` pair contributing to the semantic loss.
    pub fn pairs(&self, view: &LabeledView) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in view.labeled_nodes() {
            for &c in view.labels(i) {
                if let Some(r) = self.target(c) {
                    out.push((i, r));
                }
            }
        }
        out
    }
}

/// Mean over pairs of the coordinate-mean squared error, and its gradient in `pred`.
pub fn semantic_loss(
    predicted: &DMatrix<f64>,
    targets: &SemanticTargets,
    pairs: &[(usize, usize)],
) -> (f64, DMatrix<f64>) {
    let s = predicted.ncols();
    let scale = 1.0 / (pairs.len() * s) as f64;
    let mut loss = 0.0;
    let mut grad = DMatrix::zeros(predicted.nrows(), s);
    for &(i, r) in pairs {
        for j in 0..s {
            let diff = predicted[(i, j)] - targets.vectors[(r, j)];
            loss += diff * diff;
            grad[(i, j)] += 2.0 * scale * diff;
        }
    }
    (loss * scale, grad)
}

/// `(1/n^2) ||M - UU'||^2_F`, evaluated in factorized form, and its gradient in `U`.
pub fn structure_loss(hidden: &DMatrix<f64>, proximity: &CsrMatrix) -> (f64, DMatrix<f64>) {
    let n = hidden.nrows() as f64;
    let scale = 1.0 / (n * n);
    let gram = hidden.transpose() * hidden;
    let mu = proximity.mul_dense(hidden);
    let loss = proximity.frobenius_sq() - 2.0 * mu.dot(hidden) + gram.norm_squared();
    let sym = mu + proximity.tr_mul_dense(hidden);
    let grad = (hidden * &gram * 4.0 - sym * 2.0) * scale;
    (loss * scale, grad)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RectLParams {
    pub gcn: GcnParams,
    pub head: HeadParams,
}

pub fn rect_l_loss_grad(
    propagated: &CsrMatrix,
    params: &RectLParams,
    targets: &SemanticTargets,
    pairs: &[(usize, usize)],
) -> (f64, RectLParams) {
    let act = gcn_forward(propagated, &params.gcn);
    let pred = head_forward(&act.hidden, &params.head);
    let (loss, d_pred) = semantic_loss(&pred, targets, pairs);
    let d_hidden = &d_pred * params.head.weight.transpose();
    let head = HeadParams {
        weight: act.hidden.transpose() * &d_pred,
        bias: DMatrix::from_fn(1, d_pred.ncols(), |_, j| d_pred.column(j).sum()),
    };
    let gcn = gcn_backward(propagated, &params.gcn, &act, &d_hidden);
    (loss, RectLParams { gcn, head })
}

pub fn rect_n_loss_grad(
    propagated: &CsrMatrix,
    params: &GcnParams,
    proximity: &CsrMatrix,
) -> (f64, GcnParams) {
    let act = gcn_forward(propagated, params);
    let (loss, d_hidden) = structure_loss(&act.hidden, proximity);
    (loss, gcn_backward(propagated, params, &act, &d_hidden))
}
