use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{RsdneConfig, SelectionMode};
use crate::graph::{laplacian, CsrMatrix, ProximityMatrix, WeightLaplacian};
use crate::labels::LabeledView;

/// Factor matrices plus the intra-class neighbor selection of one run.
#[derive(Clone, Debug)]
pub struct RsdneState {
    /// Node embeddings, `n x d`.
    pub u: DMatrix<f64>,
    /// Context embeddings, `d x n`.
    pub h: DMatrix<f64>,
    /// Row `i` of the binary selection matrix `S`: the chosen intra-class
    /// neighbors of node `i`, ascending. Empty for unlabeled nodes.
    pub neighbors: Vec<Vec<usize>>,
    /// Candidate pools `O_i` of the light variant, ascending.
    pub candidates: Option<Vec<Vec<usize>>>,
    /// Label-cut proximity weights `W`.
    pub weights: CsrMatrix,
    pub(crate) intra: WeightLaplacian,
    pub(crate) inter: WeightLaplacian,
}

impl RsdneState {
    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn dim(&self) -> usize {
        self.u.ncols()
    }

    /// `S` as a sparse 0/1 matrix.
    pub fn selection_matrix(&self) -> CsrMatrix {
        selection_matrix(&self.neighbors)
    }

    /// Laplacian of the current selection, `L_s`.
    pub fn intra_laplacian(&self) -> &WeightLaplacian {
        &self.intra
    }

    /// Laplacian of the label-cut weights, `L_w`.
    pub fn inter_laplacian(&self) -> &WeightLaplacian {
        &self.inter
    }

    /// Replaces `S` and refreshes `L_s`.
    pub fn set_neighbors(&mut self, neighbors: Vec<Vec<usize>>) {
        self.intra = laplacian(&selection_matrix(&neighbors));
        self.neighbors = neighbors;
    }

    /// Builds a state from explicit parts; mostly useful for tests and oracles.
    pub fn from_parts(
        u: DMatrix<f64>,
        h: DMatrix<f64>,
        neighbors: Vec<Vec<usize>>,
        weights: CsrMatrix,
    ) -> Self {
        let intra = laplacian(&selection_matrix(&neighbors));
        let inter = laplacian(&weights);
        RsdneState {
            u,
            h,
            neighbors,
            candidates: None,
            weights,
            intra,
            inter,
        }
    }
}

pub(crate) fn selection_matrix(neighbors: &[Vec<usize>]) -> CsrMatrix {
    let n = neighbors.len();
    let entries = neighbors
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().map(move |&j| (i, j, 1.0)));
    CsrMatrix::from_triplets(n, n, entries)
}

/// `W_ij = 0` for labeled pairs with disjoint label sets, `M_ij` otherwise.
pub fn build_weights(proximity: &ProximityMatrix, view: &LabeledView) -> CsrMatrix {
    proximity
        .sparse()
        .map_entries(|i, j, v| if view.different_classes(i, j) { 0.0 } else { v })
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| rng.random_range(-scale..=scale))
        .collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

fn sample_sorted(rng: &mut ChaCha8Rng, pool: &[usize], amount: usize) -> Vec<usize> {
    if pool.len() <= amount {
        return pool.to_vec();
    }
    let mut picked: Vec<usize> = index::sample(rng, pool.len(), amount)
        .into_iter()
        .map(|p| pool[p])
        .collect();
    picked.sort_unstable();
    picked
}

/// Random initialization: `U`, `H` uniform on `[-1/sqrt(d), 1/sqrt(d)]`, then
/// `k` random same-class peers per labeled node (drawn from the candidate
/// pool in light mode).
///
/// `U` and `H` are drawn before any selection randomness, so runs that differ
/// only in their label terms share the same starting factors.
pub fn init_state(
    config: &RsdneConfig,
    view: &LabeledView,
    proximity: &ProximityMatrix,
    mode: SelectionMode,
) -> RsdneState {
    let n = proximity.n();
    let d = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale = 1.0 / (d as f64).sqrt();
    let u = uniform_matrix(&mut rng, n, d, scale);
    let h = uniform_matrix(&mut rng, d, n, scale);

    let mut candidates: Option<Vec<Vec<usize>>> = None;
    if mode == SelectionMode::Light {
        let pools = (0..n)
            .map(|i| {
                if view.is_labeled(i) {
                    sample_sorted(&mut rng, &view.peers(i), config.kbar)
                } else {
                    Vec::new()
                }
            })
            .collect();
        candidates = Some(pools);
    }
    let neighbors = (0..n)
        .map(|i| {
            if !view.is_labeled(i) {
                return Vec::new();
            }
            match &candidates {
                Some(pools) => sample_sorted(&mut rng, &pools[i], config.k),
                None => sample_sorted(&mut rng, &view.peers(i), config.k),
            }
        })
        .collect();

    let weights = build_weights(proximity, view);
    let mut state = RsdneState::from_parts(u, h, neighbors, weights);
    state.candidates = candidates;
    state
}
