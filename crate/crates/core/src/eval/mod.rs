//! Downstream node classification: one-vs-rest linear SVM on the embedding,
//! trained with the full training labels and scored by micro/macro F1.

mod experiment;
mod f1;
mod methods;
mod svm;

pub use experiment::{
    derive_seed, evaluate_embedding, plan_for, run_experiment, Builtin, Embedder,
    ExperimentConfig, MetricsRow, MetricsTable, Summary,
};
pub use f1::{f1, ClassCounts, F1Report};
pub use methods::{embed_method, EmbedContext, Method, MethodOutput, MethodSettings};
pub use svm::{predict, train_classifier, LinearClassifier, SvmConfig};
