//! Graphs, random-walk transition matrices, the DeepWalk proximity target and
//! weight Laplacians.

mod sparse;

pub use sparse::CsrMatrix;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest node count for which [`ProximityMatrix::to_dense`] will allocate.
pub const DEFAULT_DENSE_LIMIT: usize = 20_000;

/// A weighted graph over nodes `0..n`.
///
/// Undirected graphs store every input edge in both directions. Self-loops are
/// dropped at construction; repeated edges keep the largest weight.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    directed: bool,
    adjacency: CsrMatrix,
}

impl Graph {
    pub fn undirected(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::build(n, edges, false)
    }

    pub fn directed(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        Self::build(n, edges, true)
    }

    /// Unit-weight undirected graph.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let edges: Vec<_> = pairs.iter().map(|&(a, b)| (a, b, 1.0)).collect();
        Self::undirected(n, &edges)
    }

    fn build(n: usize, edges: &[(usize, usize, f64)], directed: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::Data("graph must have at least one node".into()));
        }
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(edges.len() * 2);
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::Data(format!("edge ({a}, {b}) out of range for n = {n}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Data(format!("edge ({a}, {b}) has non-positive weight {w}")));
            }
            if a == b {
                continue;
            }
            entries.push((a, b, w));
            if !directed {
                entries.push((b, a, w));
            }
        }
        entries.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)).then(y.2.total_cmp(&x.2)));
        entries.dedup_by(|later, first| later.0 == first.0 && later.1 == first.1);
        Ok(Graph {
            n,
            directed,
            adjacency: CsrMatrix::from_triplets(n, n, entries),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    /// Number of stored edges; undirected edges count once.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.adjacency.nnz()
        } else {
            self.adjacency.nnz() / 2
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency.row_nnz(i)
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        self.adjacency.row(i).0
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let directed = self.directed;
        self.adjacency
            .iter()
            .filter(move |&(i, j, _)| directed || i < j)
    }
}

/// Row-normalized adjacency together with the number of rows left empty.
#[derive(Clone, Debug)]
pub struct Transition {
    pub matrix: CsrMatrix,
    /// Nodes without out-edges; their rows are all zero.
    pub isolated: usize,
}

pub fn build_transition(graph: &Graph) -> Transition {
    let adj = graph.adjacency();
    let sums = adj.row_sums();
    let isolated = sums.iter().filter(|&&s| s == 0.0).count();
    let matrix = adj.map_entries(|i, _, v| v / sums[i]);
    Transition { matrix, isolated }
}

/// The matrix `M = (P + P²) / 2` factorized by every structure loss, where `P`
/// is the random-walk transition matrix.
#[derive(Clone, Debug)]
pub struct ProximityMatrix {
    matrix: CsrMatrix,
    symmetric: bool,
}

pub fn build_proximity(transition: &CsrMatrix) -> ProximityMatrix {
    let squared = transition.matmul(transition);
    let matrix = transition.linear_combination(0.5, &squared, 0.5);
    let symmetric = matrix.is_symmetric(1e-12);
    ProximityMatrix { matrix, symmetric }
}

impl ProximityMatrix {
    /// Proximity of a graph in one step.
    pub fn of_graph(graph: &Graph) -> Self {
        build_proximity(&build_transition(graph).matrix)
    }

    pub fn from_sparse(matrix: CsrMatrix) -> Self {
        let symmetric = matrix.is_symmetric(1e-12);
        ProximityMatrix { matrix, symmetric }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn sparse(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn to_dense(&self, limit: usize) -> Result<DMatrix<f64>> {
        if self.n() > limit {
            return Err(Error::Config(format!(
                "refusing to densify a {n}x{n} proximity matrix (limit {limit})",
                n = self.n()
            )));
        }
        Ok(self.matrix.to_dense())
    }
}

/// `L = D - (W + W')/2` with `D_ii = sum_j (W_ij + W_ji)/2`.
#[derive(Clone, Debug)]
pub struct WeightLaplacian {
    matrix: CsrMatrix,
}

pub fn laplacian(weights: &CsrMatrix) -> WeightLaplacian {
    assert_eq!(weights.nrows(), weights.ncols(), "weights must be square");
    let n = weights.nrows();
    let sym = weights.linear_combination(0.5, &weights.transpose(), 0.5);
    let degree = sym.row_sums();
    let entries = sym
        .iter()
        .map(|(i, j, v)| (i, j, -v))
        .chain(degree.iter().enumerate().map(|(i, &d)| (i, i, d)));
    WeightLaplacian {
        matrix: CsrMatrix::from_triplets(n, n, entries),
    }
}

impl WeightLaplacian {
    pub fn sparse(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// `L * u`.
    pub fn apply(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        self.matrix.mul_dense(u)
    }

    /// `Tr(U' L U)`.
    pub fn quadratic_trace(&self, u: &DMatrix<f64>) -> f64 {
        self.apply(u).dot(u)
    }
}
