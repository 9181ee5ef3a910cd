//! Closed-form update of the intra-class neighbor selection `S`.
//!
//! With `U` fixed the problem separates per labeled node, and the optimum is
//! the `k` nearest same-class peers in the current embedding.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{RsdneConfig, RsdneState, SelectionMode};
use crate::labels::LabeledView;

fn squared_distance(ut: &DMatrix<f64>, a: usize, b: usize) -> f64 {
    let (x, y) = (ut.column(a), ut.column(b));
    x.iter().zip(y.iter()).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Picks the `k` entries of `pool` closest to `node`; ties go to the lower index.
fn nearest(ut: &DMatrix<f64>, node: usize, pool: &[usize], k: usize) -> Vec<usize> {
    if pool.len() <= k {
        return pool.to_vec();
    }
    let mut scored: Vec<(f64, usize)> = pool
        .iter()
        .map(|&j| (squared_distance(ut, node, j), j))
        .collect();
    scored.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut picked: Vec<usize> = scored[..k].iter().map(|&(_, j)| j).collect();
    picked.sort_unstable();
    picked
}

/// Computes the optimal selection for the current `U` without modifying the state.
pub fn select_neighbors(
    state: &RsdneState,
    view: &LabeledView,
    config: &RsdneConfig,
    mode: SelectionMode,
) -> Vec<Vec<usize>> {
    let ut = state.u.transpose();
    (0..state.n())
        .into_par_iter()
        .map(|i| {
            if !view.is_labeled(i) {
                return Vec::new();
            }
            match (mode, &state.candidates) {
                (SelectionMode::Light, Some(pools)) => nearest(&ut, i, &pools[i], config.k),
                _ => nearest(&ut, i, &view.peers(i), config.k),
            }
        })
        .collect()
}

/// The `S` step: replaces the selection with its optimum and refreshes `L_s`.
pub fn update_selection(
    state: &mut RsdneState,
    view: &LabeledView,
    config: &RsdneConfig,
    mode: SelectionMode,
) {
    let neighbors = select_neighbors(state, view, config, mode);
    state.set_neighbors(neighbors);
}

/// Checks the structural constraints on `S`: row sizes, no self-selection,
/// same-class labeled peers only, candidate-pool membership in light mode.
pub fn audit_selection(state: &RsdneState, view: &LabeledView, k: usize) -> Result<(), String> {
    for (i, row) in state.neighbors.iter().enumerate() {
        if !view.is_labeled(i) {
            if !row.is_empty() {
                return Err(format!("unlabeled node {i} has a non-empty selection"));
            }
            continue;
        }
        let available = match &state.candidates {
            Some(pools) => pools[i].len(),
            None => view.peers(i).len(),
        };
        if row.len() != k.min(available) {
            return Err(format!(
                "node {i} selects {} peers, expected {}",
                row.len(),
                k.min(available)
            ));
        }
        if row.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("node {i} selection is not strictly ascending"));
        }
        for &j in row {
            if j == i {
                return Err(format!("node {i} selects itself"));
            }
            if !view.is_labeled(j) || view.different_classes(i, j) {
                return Err(format!("node {i} selects {j} which shares no class"));
            }
            if let Some(pools) = &state.candidates {
                if pools[i].binary_search(&j).is_err() {
                    return Err(format!("node {i} selects {j} outside its candidate pool"));
                }
            }
        }
    }
    Ok(())
}
