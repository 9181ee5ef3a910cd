use nalgebra::DMatrix;

/// An `n x d` matrix of node representations, one row per node.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding(pub DMatrix<f64>);

impl Embedding {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Embedding(matrix)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.0.row(i).iter().copied().collect()
    }

    /// Scales every row to unit L2 norm; all-zero rows stay zero.
    pub fn l2_normalized(&self) -> Embedding {
        let mut m = self.0.clone();
        for mut row in m.row_iter_mut() {
            let norm = row.norm();
            if norm > 0.0 {
                row /= norm;
            }
        }
        Embedding(m)
    }

    /// Column-wise concatenation `[self | other]`.
    pub fn concat(&self, other: &Embedding) -> Embedding {
        assert_eq!(self.n(), other.n(), "row counts differ");
        let (n, a, b) = (self.n(), self.dim(), other.dim());
        Embedding(DMatrix::from_fn(n, a + b, |i, j| {
            if j < a {
                self.0[(i, j)]
            } else {
                other.0[(i, j - a)]
            }
        }))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_and_concat() {
        let e = Embedding::new(DMatrix::from_row_slice(2, 2, &[3.0, 4.0, 0.0, 0.0]));
        let n = e.l2_normalized();
        assert_eq!(n.row(0), vec![0.6, 0.8]);
        assert_eq!(n.row(1), vec![0.0, 0.0]);
        let c = n.concat(&e);
        assert_eq!(c.dim(), 4);
        assert_eq!(c.row(0), vec![0.6, 0.8, 3.0, 4.0]);
    }
}
