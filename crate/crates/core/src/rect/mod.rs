//! Semantic-plus-structure GCN embedding.
//!
//! Two independently trained one-layer encoders share the propagated input
//! `A_hat X`. The semantic one regresses class prototypes built from
//! SVD-reduced features; the structural one reconstructs the proximity
//! matrix. The final embedding is the concatenation of both row-normalized outputs.

mod adam;
mod model;
mod svd;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use adam::{adam_update, Adam, AdamConfig};
pub use model::{
    gcn_forward, head_forward, normalize_adjacency, propagate, rect_l_loss_grad, rect_n_loss_grad,
    semantic_loss, structure_loss, xavier_uniform, Activations, GcnParams, HeadParams,
    RectLParams, SemanticTargets,
};
pub use svd::{svd_reduce, truncated_svd, TruncatedSvd};

use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::graph::{CsrMatrix, Graph, ProximityMatrix};
use crate::labels::LabeledView;

#[derive(Clone, Debug, PartialEq)]
pub struct RectConfig {
    pub hidden_dim: usize,
    pub semantic_dim: usize,
    pub epochs: usize,
    pub adam: AdamConfig,
    pub prelu_slope: f64,
    pub seed: u64,
}

impl Default for RectConfig {
    fn default() -> Self {
        RectConfig {
            hidden_dim: 200,
            semantic_dim: 200,
            epochs: 100,
            adam: AdamConfig::default(),
            prelu_slope: 0.25,
            seed: 0,
        }
    }
}

impl RectConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 || self.semantic_dim == 0 {
            return Err(Error::Config("rect dimensions must be positive".into()));
        }
        if !(self.adam.lr > 0.0 && self.adam.lr.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Which encoders to fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RectVariant {
    Full,
    SemanticOnly,
    StructureOnly,
}

/// Loss recorded before every update, plus one after the last.
pub type LossTrace = Vec<f64>;

pub fn format_loss_trace(trace: &[f64]) -> String {
    let mut out = String::from("epoch\tloss\n");
    for (e, l) in trace.iter().enumerate() {
        out.push_str(&format!("{e}\t{l}\n"));
    }
    out
}

#[derive(Clone, Debug)]
pub struct RectOutput {
    /// The embedding for the requested variant, rows L2-normalized per part.
    pub embedding: Embedding,
    /// Raw semantic encoder output.
    pub semantic: Option<Embedding>,
    /// Raw structural encoder output.
    pub structural: Option<Embedding>,
    pub semantic_trace: LossTrace,
    pub structural_trace: LossTrace,
}

/// Inputs shared by both encoders.
pub struct RectInputs<'a> {
    pub graph: &'a Graph,
    /// Node features; `None` falls back to adjacency rows.
    pub features: Option<&'a CsrMatrix>,
    pub proximity: &'a ProximityMatrix,
}

fn check_deadline(deadline: Option<Instant>) -> Result<()> {
    match deadline {
        Some(d) if Instant::now() >= d => Err(Error::Timeout(0.0)),
        _ => Ok(()),
    }
}

fn check_loss(loss: f64, epoch: usize) -> Result<()> {
    if loss.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence {
            stage: "epoch",
            step: epoch,
            value: loss,
        })
    }
}

pub fn train_semantic(
    propagated: &CsrMatrix,
    features: &CsrMatrix,
    view: &LabeledView,
    config: &RectConfig,
    deadline: Option<Instant>,
) -> Result<(RectLParams, LossTrace)> {
    let limit = features.nrows().min(features.ncols());
    let s = if config.semantic_dim > limit {
        log::warn!("semantic dimension {} clamped to {limit}", config.semantic_dim);
        limit
    } else {
        config.semantic_dim
    };
    let reduced = svd_reduce(features, s, config.seed)?;
    let targets = SemanticTargets::readout(&reduced, view)?;
    let pairs = targets.pairs(view);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = RectLParams {
        gcn: GcnParams::init(&mut rng, propagated.ncols(), config.hidden_dim, config.prelu_slope),
        head: HeadParams::init(&mut rng, config.hidden_dim, s),
    };
    let mut adam = Adam::new(
        config.adam,
        &[
            params.gcn.weight.shape(),
            params.gcn.slope.shape(),
            params.head.weight.shape(),
            params.head.bias.shape(),
        ],
    );
    let mut trace = Vec::with_capacity(config.epochs + 1);
    for epoch in 0..config.epochs {
        check_deadline(deadline)?;
        let (loss, g) = rect_l_loss_grad(propagated, &params, &targets, &pairs);
        check_loss(loss, epoch)?;
        trace.push(loss);
        adam.step(
            &mut [
                &mut params.gcn.weight,
                &mut params.gcn.slope,
                &mut params.head.weight,
                &mut params.head.bias,
            ],
            &[&g.gcn.weight, &g.gcn.slope, &g.head.weight, &g.head.bias],
        );
    }
    let (loss, _) = rect_l_loss_grad(propagated, &params, &targets, &pairs);
    check_loss(loss, config.epochs)?;
    trace.push(loss);
    Ok((params, trace))
}

pub fn train_structural(
    propagated: &CsrMatrix,
    proximity: &CsrMatrix,
    config: &RectConfig,
    deadline: Option<Instant>,
) -> Result<(GcnParams, LossTrace)> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut params =
        GcnParams::init(&mut rng, propagated.ncols(), config.hidden_dim, config.prelu_slope);
    let mut adam = Adam::new(config.adam, &[params.weight.shape(), params.slope.shape()]);
    let mut trace = Vec::with_capacity(config.epochs + 1);
    for epoch in 0..config.epochs {
        check_deadline(deadline)?;
        let (loss, g) = rect_n_loss_grad(propagated, &params, proximity);
        check_loss(loss, epoch)?;
        trace.push(loss);
        adam.step(&mut [&mut params.weight, &mut params.slope], &[&g.weight, &g.slope]);
    }
    let (loss, _) = rect_n_loss_grad(propagated, &params, proximity);
    check_loss(loss, config.epochs)?;
    trace.push(loss);
    Ok((params, trace))
}

pub fn train(
    inputs: &RectInputs<'_>,
    view: &LabeledView,
    config: &RectConfig,
    variant: RectVariant,
) -> Result<RectOutput> {
    train_until(inputs, view, config, variant, None)
}

pub fn train_until(
    inputs: &RectInputs<'_>,
    view: &LabeledView,
    config: &RectConfig,
    variant: RectVariant,
    deadline: Option<Instant>,
) -> Result<RectOutput> {
    config.validate()?;
    let n = inputs.graph.n();
    if inputs.proximity.n() != n || view.n() != n {
        return Err(Error::Data("graph, proximity and labels disagree on node count".into()));
    }
    let features = inputs.features.unwrap_or_else(|| inputs.graph.adjacency());
    if features.nrows() != n {
        return Err(Error::Data(format!(
            "feature matrix has {} rows for {n} nodes",
            features.nrows()
        )));
    }
    let propagated = propagate(&normalize_adjacency(inputs.graph), features);

    let mut semantic = None;
    let mut semantic_trace = Vec::new();
    if variant != RectVariant::StructureOnly {
        let (params, trace) = train_semantic(&propagated, features, view, config, deadline)?;
        semantic = Some(Embedding::new(gcn_forward(&propagated, &params.gcn).hidden));
        semantic_trace = trace;
    }
    let mut structural = None;
    let mut structural_trace = Vec::new();
    if variant != RectVariant::SemanticOnly {
        let (params, trace) =
            train_structural(&propagated, inputs.proximity.sparse(), config, deadline)?;
        structural = Some(Embedding::new(gcn_forward(&propagated, &params).hidden));
        structural_trace = trace;
    }
    let embedding = match (&semantic, &structural) {
        (Some(a), Some(b)) => a.l2_normalized().concat(&b.l2_normalized()),
        (Some(a), None) => a.l2_normalized(),
        (None, Some(b)) => b.l2_normalized(),
        (None, None) => unreachable!(),
    };
    Ok(RectOutput {
        embedding,
        semantic,
        structural,
        semantic_trace,
        structural_trace,
    })
}
