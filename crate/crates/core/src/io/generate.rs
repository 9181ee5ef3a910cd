use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DatasetBundle;
use crate::error::{Error, Result};
use crate::graph::{CsrMatrix, Graph};
use crate::labels::{LabelTable, SplitPlan};

/// Training rate of the scalability setup.
pub const SCALABILITY_TRAIN_RATE: f64 = 0.1;

fn numbered_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Planted partition: blocks of `per_block` nodes, edge probability `p_in`
/// inside a block and `p_out` across. Labels are block ids; no explicit features.
pub fn generate_sbm(blocks: usize, per_block: usize, p_in: f64, p_out: f64, seed: u64) -> Result<DatasetBundle> {
    if blocks == 0 || per_block == 0 {
        return Err(Error::Config("sbm needs at least one block of one node".into()));
    }
    if !(0.0 <= p_out && p_out < p_in && p_in <= 1.0) {
        return Err(Error::Config(format!("sbm needs 0 <= p_out < p_in <= 1, got {p_out}, {p_in}")));
    }
    let n = blocks * per_block;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if i / per_block == j / per_block { p_in } else { p_out };
            if rng.random_bool(p) {
                pairs.push((i, j));
            }
        }
    }
    let assignment: Vec<usize> = (0..n).map(|i| i / per_block).collect();
    Ok(DatasetBundle {
        name: format!("sbm-{blocks}x{per_block}"),
        graph: Graph::from_pairs(n, &pairs)?,
        features: None,
        labels: LabelTable::single(blocks, &assignment)?,
        ids: numbered_ids(n),
    })
}

/// `2n` distinct undirected edges drawn uniformly, identity features and one shared class.
pub fn generate_random_graph(n: usize, seed: u64) -> Result<DatasetBundle> {
    if n < 2 {
        return Err(Error::Config("random graph needs n >= 2".into()));
    }
    let target = 2 * n;
    if target > n * (n - 1) / 2 {
        return Err(Error::Config(format!("{target} edges exceed the {} possible pairs", n * (n - 1) / 2)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(target);
    let mut pairs = Vec::with_capacity(target);
    while pairs.len() < target {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        let e = (a.min(b), a.max(b));
        if seen.insert(e) {
            pairs.push(e);
        }
    }
    Ok(DatasetBundle {
        name: format!("random-{n}"),
        graph: Graph::from_pairs(n, &pairs)?,
        features: Some(CsrMatrix::identity(n)),
        labels: LabelTable::new(vec!["0".into()], vec![vec![0]; n])?,
        ids: numbered_ids(n),
    })
}

/// The 10% training split used with [`generate_random_graph`].
pub fn scalability_split(labels: &LabelTable, seed: u64) -> Result<SplitPlan> {
    SplitPlan::sample(labels, SCALABILITY_TRAIN_RATE, 0, seed)
}
