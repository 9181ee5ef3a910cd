//! Randomized truncated SVD of a sparse feature matrix.
//!
//! Range finder with Gaussian sketching, a fixed oversampling of 10 columns
//! and 4 orthonormalized power iterations, followed by an exact SVD of the
//! small projected matrix.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::CsrMatrix;

const OVERSAMPLING: usize = 10;
const POWER_ITERATIONS: usize = 4;

/// Rank-`k` factors `U diag(sigma) Vt`, singular values descending.
#[derive(Clone, Debug)]
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub vt: DMatrix<f64>,
}

impl TruncatedSvd {
    /// `U diag(sigma)`: the rows of the input projected onto the top singular directions.
    pub fn projection(&self) -> DMatrix<f64> {
        let mut p = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            p.column_mut(j).scale_mut(*s);
        }
        p
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.projection() * &self.vt
    }
}

fn orthonormal_basis(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

pub fn truncated_svd(features: &CsrMatrix, dim: usize, seed: u64) -> Result<TruncatedSvd> {
    let (n, m) = (features.nrows(), features.ncols());
    if dim == 0 || dim > n.min(m) {
        return Err(Error::Config(format!(
            "svd dimension {dim} must be in 1..={}",
            n.min(m)
        )));
    }
    if features.values().iter().all(|&v| v == 0.0) {
        return Err(Error::Data("feature matrix is all zeros".into()));
    }
    let width = (dim + OVERSAMPLING).min(n.min(m));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sketch: Vec<f64> = (0..m * width).map(|_| StandardNormal.sample(&mut rng)).collect();
    let omega = DMatrix::from_row_slice(m, width, &sketch);

    let mut q = orthonormal_basis(features.mul_dense(&omega));
    for _ in 0..POWER_ITERATIONS {
        let z = orthonormal_basis(features.tr_mul_dense(&q));
        q = orthonormal_basis(features.mul_dense(&z));
    }
    // B = Q' X, formed as (X' Q)'.
    let b = features.tr_mul_dense(&q).transpose();
    let svd = b.svd(true, true);
    let (ub, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &c| svd.singular_values[c].total_cmp(&svd.singular_values[a]));
    order.truncate(dim);

    let ub_k = DMatrix::from_fn(ub.nrows(), dim, |i, j| ub[(i, order[j])]);
    let vt_k = DMatrix::from_fn(dim, vt.ncols(), |i, j| vt[(order[i], j)]);
    Ok(TruncatedSvd {
        u: q * ub_k,
        sigma: order.iter().map(|&i| svd.singular_values[i]).collect(),
        vt: vt_k,
    })
}

/// Reduces each feature row to `dim` components, `U_d Sigma_d`.
pub fn svd_reduce(features: &CsrMatrix, dim: usize, seed: u64) -> Result<DMatrix<f64>> {
    Ok(truncated_svd(features, dim, seed)?.projection())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_reconstructed_exactly() {
        let x = CsrMatrix::identity(6);
        let svd = truncated_svd(&x, 6, 1).unwrap();
        let err = (svd.reconstruct() - x.to_dense()).norm();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn rank_one_is_exact() {
        let a = DMatrix::from_fn(8, 5, |i, j| (i as f64 + 1.0) * (j as f64 - 2.0));
        let x = CsrMatrix::from_dense(&a);
        let svd = truncated_svd(&x, 1, 4).unwrap();
        assert!((svd.reconstruct() - a).norm() < 1e-8);
    }

    #[test]
    fn rejects_zero_and_oversized() {
        assert!(matches!(truncated_svd(&CsrMatrix::zeros(3, 3), 1, 0), Err(Error::Data(_))));
        assert!(truncated_svd(&CsrMatrix::identity(3), 4, 0).is_err());
        assert!(svd_reduce(&CsrMatrix::identity(3), 0, 0).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let a = DMatrix::from_fn(10, 7, |i, j| ((i * 7 + j) % 5) as f64);
        let x = CsrMatrix::from_dense(&a);
        assert_eq!(svd_reduce(&x, 3, 9).unwrap(), svd_reduce(&x, 3, 9).unwrap());
    }
}
