//! RSDNE: DeepWalk matrix factorization with relaxed label constraints.
//!
//! The solver alternates a gradient step on `U`, a gradient step on `H`
//! (both with Armijo backtracking) and an exact update of the neighbor
//! selection `S`. RSDNE* restricts the selection to fixed random candidate
//! pools; MFDW drops the label terms entirely.

mod objective;
mod selection;
mod state;

use std::fmt::Write as _;
use std::time::Instant;

pub use objective::{grad_h, grad_u, objective};
pub use selection::{audit_selection, select_neighbors, update_selection};
pub use state::{build_weights, init_state, RsdneState};

use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::graph::ProximityMatrix;
use crate::labels::LabeledView;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmijoConfig {
    /// Step shrink factor per backtrack.
    pub shrink: f64,
    /// Sufficient-decrease constant.
    pub sufficient_decrease: f64,
    pub max_backtracks: usize,
}

impl Default for ArmijoConfig {
    fn default() -> Self {
        ArmijoConfig {
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            max_backtracks: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RsdneConfig {
    pub dim: usize,
    pub alpha: f64,
    pub lambda: f64,
    /// Intra-class neighbors per labeled node.
    pub k: usize,
    /// Candidate pool size of the light variant.
    pub kbar: usize,
    /// Initial step size, restored at the start of every outer iteration.
    pub eta0: f64,
    pub armijo: ArmijoConfig,
    pub max_iter: usize,
    /// Stop once the relative objective decrease of an iteration falls below this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for RsdneConfig {
    fn default() -> Self {
        RsdneConfig {
            dim: 200,
            alpha: 1.0,
            lambda: 0.1,
            k: 5,
            kbar: 100,
            eta0: 1.0,
            armijo: ArmijoConfig::default(),
            max_iter: 15,
            tol: 1e-4,
            seed: 0,
        }
    }
}

impl RsdneConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.dim == 0 {
            return fail("dim must be at least 1");
        }
        if self.k == 0 {
            return fail("k must be at least 1");
        }
        if self.kbar <= self.k {
            return fail("kbar must exceed k");
        }
        if !(self.alpha >= 0.0 && self.lambda >= 0.0) {
            return fail("alpha and lambda must be nonnegative");
        }
        if !(self.eta0 > 0.0) {
            return fail("eta0 must be positive");
        }
        let a = &self.armijo;
        if !(a.shrink > 0.0 && a.shrink < 1.0 && a.sufficient_decrease > 0.0 && a.sufficient_decrease < 1.0) {
            return fail("armijo shrink and sufficient-decrease constants must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionMode {
    /// Consider every same-class labeled peer.
    Full,
    /// Consider only the fixed candidate pool `O_i`.
    Light,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Rsdne,
    RsdneStar,
    /// Plain factorization: labels ignored, `alpha = 0`.
    MfdwBaseline,
}

impl Variant {
    pub fn selection_mode(self) -> SelectionMode {
        match self {
            Variant::RsdneStar => SelectionMode::Light,
            _ => SelectionMode::Full,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEntry {
    pub iter: usize,
    pub objective: f64,
    /// Step size accepted in the iteration (0 when both steps were rejected).
    pub eta: f64,
}

#[derive(Clone, Debug)]
pub struct RsdneOutput {
    pub embedding: Embedding,
    pub trace: Vec<TraceEntry>,
    pub state: RsdneState,
}

/// Renders a trace as `iter<TAB>J<TAB>eta` lines.
pub fn format_trace(trace: &[TraceEntry]) -> String {
    let mut out = String::new();
    for t in trace {
        writeln!(out, "{}\t{}\t{}", t.iter, t.objective, t.eta).unwrap();
    }
    out
}

/// Backtracks from `eta` along `-grad` on a quadratic with known curvature.
/// Returns the accepted step, or `None` if no trial passed.
fn armijo_step(armijo: &ArmijoConfig, eta0: f64, grad_sq: f64, curvature: f64) -> Option<f64> {
    let mut eta = eta0;
    for _ in 0..=armijo.max_backtracks {
        // J(X - eta G) - J(X) = -eta |G|^2 + eta^2 q(G)
        let change = -eta * grad_sq + eta * eta * curvature;
        if change <= -armijo.sufficient_decrease * eta * grad_sq {
            return Some(eta);
        }
        eta *= armijo.shrink;
    }
    None
}

pub fn solve(
    proximity: &ProximityMatrix,
    view: &LabeledView,
    config: &RsdneConfig,
    variant: Variant,
) -> Result<RsdneOutput> {
    solve_until(proximity, view, config, variant, None)
}

/// [`solve`] with an optional wall-clock deadline checked between iterations.
pub fn solve_until(
    proximity: &ProximityMatrix,
    view: &LabeledView,
    config: &RsdneConfig,
    variant: Variant,
    deadline: Option<Instant>,
) -> Result<RsdneOutput> {
    config.validate()?;
    if view.n() != proximity.n() {
        return Err(Error::Data(format!(
            "label view covers {} nodes, proximity matrix {}",
            view.n(),
            proximity.n()
        )));
    }
    let started = Instant::now();
    let mode = variant.selection_mode();
    let unlabeled;
    let (view, config) = if variant == Variant::MfdwBaseline {
        unlabeled = LabeledView::unlabeled(view.n(), view.num_classes());
        (
            &unlabeled,
            RsdneConfig {
                alpha: 0.0,
                ..config.clone()
            },
        )
    } else {
        (view, config.clone())
    };

    let mut state = init_state(&config, view, proximity, mode);
    let mut current = objective(&state, proximity, &config);
    if !current.is_finite() {
        return Err(Error::Divergence {
            stage: "iteration",
            step: 0,
            value: current,
        });
    }
    let mut trace = vec![TraceEntry {
        iter: 0,
        objective: current,
        eta: 0.0,
    }];

    for iter in 1..=config.max_iter {
        if let Some(limit) = deadline {
            if Instant::now() > limit {
                return Err(Error::Timeout(started.elapsed().as_secs_f64()));
            }
        }
        let mut eta = config.eta0;
        let mut accepted = 0.0;

        let g = grad_u(&state, proximity, &config);
        let g_sq = g.norm_squared();
        if g_sq > 0.0 {
            let q = objective::curvature_u(&state, &config, &g);
            if let Some(step) = armijo_step(&config.armijo, eta, g_sq, q) {
                state.u -= &g * step;
                eta = step;
                accepted = step;
            }
        }

        let g = grad_h(&state, proximity, &config);
        let g_sq = g.norm_squared();
        if g_sq > 0.0 {
            let q = objective::curvature_h(&state, &config, &g);
            if let Some(step) = armijo_step(&config.armijo, eta, g_sq, q) {
                state.h -= &g * step;
                accepted = step;
            }
        }

        if config.alpha != 0.0 && view.has_labels() {
            update_selection(&mut state, view, &config, mode);
        }

        let next = objective(&state, proximity, &config);
        if !next.is_finite() {
            return Err(Error::Divergence {
                stage: "iteration",
                step: iter,
                value: next,
            });
        }
        trace.push(TraceEntry {
            iter,
            objective: next,
            eta: accepted,
        });
        let decrease = (current - next) / current.abs().max(f64::MIN_POSITIVE);
        current = next;
        if decrease < config.tol {
            break;
        }
    }

    Ok(RsdneOutput {
        embedding: Embedding::new(state.u.clone()),
        trace,
        state,
    })
}
