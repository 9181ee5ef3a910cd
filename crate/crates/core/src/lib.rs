//! Network embedding under completely-imbalanced supervision.
//!
//! Two embedding families are provided:
//!
//! * [`rsdne`]: a shallow matrix-factorization solver with relaxed
//!   intra-class similarity and inter-class dissimilarity terms (RSDNE, and
//!   the candidate-pool variant RSDNE*). With the label terms disabled it is
//!   the plain DeepWalk factorization (MFDW).
//! * [`rect`]: a one-layer GCN trained against class-semantic targets
//!   (RECT-L) and against the proximity matrix (RECT-N), concatenated (RECT).
//!
//! [`eval`] implements the downstream node-classification protocol.

pub mod embedding;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod labels;
pub mod rect;
pub mod rsdne;

pub use embedding::Embedding;
pub use error::{Error, Result};
