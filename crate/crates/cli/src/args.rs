use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cine_core::eval::{Method, MethodSettings, SvmConfig};
use cine_core::labels::UnseenSchedule;
use cine_core::rect::{AdamConfig, RectConfig};
use cine_core::rsdne::{ArmijoConfig, RsdneConfig};

#[derive(Parser, Debug)]
#[command(name = "cine", version, about = "Network embedding with completely-imbalanced labels")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Accepted for compatibility; every reduction already runs in a fixed order.
    #[arg(long, global = true)]
    pub deterministic: bool,

    /// `key=value` file of flags for the subcommand; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write dataset files from a LINQS dump or a synthetic generator.
    Convert(ConvertArgs),
    /// Sample a completely-imbalanced train/test split.
    Split(SplitArgs),
    /// Learn an embedding and write it with its trace and run manifest.
    Embed(EmbedArgs),
    /// Node-classification evaluation of methods or of a stored embedding.
    Eval(EvalArgs),
    /// Time methods on random graphs with n nodes and 2n edges.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DatasetArgs {
    /// Edge list: `a b [weight]` per line.
    #[arg(long)]
    pub edges: PathBuf,
    /// Node features, sparse `node col:val ...` or CSV; default: adjacency rows.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Node labels, `node c1,c2,...`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Treat edges as directed.
    #[arg(long)]
    pub directed: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Embedding dimension of the factorization methods.
    #[arg(long, default_value_t = 200)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    /// Intra-class neighbors per labeled node.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Candidate pool size of rsdne-star.
    #[arg(long, default_value_t = 100)]
    pub kbar: usize,
    #[arg(long, default_value_t = 15)]
    pub max_iter: usize,
    /// Relative-decrease stopping threshold (embed/eval default 1e-4, bench default 0).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub eta0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub armijo_shrink: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub armijo_c: f64,
    #[arg(long, default_value_t = 20)]
    pub armijo_backtracks: usize,
    /// Hidden units of each GCN encoder.
    #[arg(long, default_value_t = 200)]
    pub hidden_dim: usize,
    /// SVD dimension of the semantic targets.
    #[arg(long, default_value_t = 200)]
    pub semantic_dim: usize,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.25)]
    pub prelu_slope: f64,
    /// Use `dim / 2` hidden units so the concatenated rect embedding has width `dim`.
    #[arg(long)]
    pub strict_width: bool,
}

impl ModelArgs {
    pub fn settings(&self, default_tol: f64, seed: u64) -> MethodSettings {
        let hidden_dim = if self.strict_width {
            (self.dim / 2).max(1)
        } else {
            self.hidden_dim
        };
        MethodSettings {
            rsdne: RsdneConfig {
                dim: self.dim,
                alpha: self.alpha,
                lambda: self.lambda,
                k: self.k,
                kbar: self.kbar,
                eta0: self.eta0,
                armijo: ArmijoConfig {
                    shrink: self.armijo_shrink,
                    sufficient_decrease: self.armijo_c,
                    max_backtracks: self.armijo_backtracks,
                },
                max_iter: self.max_iter,
                tol: self.tol.unwrap_or(default_tol),
                seed,
            },
            rect: RectConfig {
                hidden_dim,
                semantic_dim: self.semantic_dim,
                epochs: self.epochs,
                adam: AdamConfig {
                    lr: self.lr,
                    ..AdamConfig::default()
                },
                prelu_slope: self.prelu_slope,
                seed,
            },
        }
    }

    /// Resolved values as manifest pairs; keys are flag names.
    pub fn manifest(&self, default_tol: f64) -> Vec<(&'static str, String)> {
        vec![
            ("dim", self.dim.to_string()),
            ("alpha", self.alpha.to_string()),
            ("lambda", self.lambda.to_string()),
            ("k", self.k.to_string()),
            ("kbar", self.kbar.to_string()),
            ("max-iter", self.max_iter.to_string()),
            ("tol", self.tol.unwrap_or(default_tol).to_string()),
            ("eta0", self.eta0.to_string()),
            ("armijo-shrink", self.armijo_shrink.to_string()),
            ("armijo-c", self.armijo_c.to_string()),
            ("armijo-backtracks", self.armijo_backtracks.to_string()),
            ("hidden-dim", self.hidden_dim.to_string()),
            ("semantic-dim", self.semantic_dim.to_string()),
            ("epochs", self.epochs.to_string()),
            ("lr", self.lr.to_string()),
            ("prelu-slope", self.prelu_slope.to_string()),
            ("strict-width", self.strict_width.to_string()),
        ]
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    /// `--content` and `--cites` files.
    Planetoid,
    /// Planted-partition graph.
    Sbm,
    /// Random graph with n nodes and 2n edges, identity features, one class.
    Random,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct ConvertArgs {
    #[arg(long, value_enum)]
    pub from: Source,
    #[arg(long)]
    pub content: Option<PathBuf>,
    #[arg(long)]
    pub cites: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub blocks: usize,
    #[arg(long, default_value_t = 100)]
    pub per_block: usize,
    #[arg(long, default_value_t = 0.1)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.005)]
    pub p_out: f64,
    /// Node count of the random graph.
    #[arg(long, default_value_t = 1000)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// File stem of the written files.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct SplitArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long, default_value_t = 0.5)]
    pub rate: f64,
    /// Number of unseen classes drawn at random.
    #[arg(long, default_value_t = 2)]
    pub unseen: usize,
    /// Explicit comma-separated unseen class names (overrides --unseen).
    #[arg(long)]
    pub unseen_classes: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Split file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// Use a stored split instead of sampling one.
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub rate: f64,
    #[arg(long, default_value_t = 2)]
    pub unseen: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    Random,
    Exhaustive,
}

impl From<Schedule> for UnseenSchedule {
    fn from(s: Schedule) -> Self {
        match s {
            Schedule::Random => UnseenSchedule::Random,
            Schedule::Exhaustive => UnseenSchedule::Exhaustive,
        }
    }
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Evaluate this stored embedding on `--split` instead of running methods.
    #[arg(long, requires = "split")]
    pub embedding: Option<PathBuf>,
    #[arg(long)]
    pub split: Option<PathBuf>,
    /// Comma-separated methods.
    #[arg(long, default_value = "mfdw,rsdne")]
    pub method: String,
    /// Comma-separated training rates.
    #[arg(long, default_value = "0.1,0.3,0.5")]
    pub rates: String,
    #[arg(long, default_value_t = 2)]
    pub unseen: usize,
    #[arg(long, value_enum, default_value_t = Schedule::Random)]
    pub schedule: Schedule,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub svm_c: f64,
    #[arg(long, default_value_t = 50)]
    pub svm_epochs: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Directory for metrics.tsv, report.txt and manifest.txt.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl EvalArgs {
    pub fn svm(&self, seed: u64) -> SvmConfig {
        SvmConfig {
            c: self.svm_c,
            epochs: self.svm_epochs,
            seed,
        }
    }
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct BenchArgs {
    /// Comma-separated node counts.
    #[arg(long, default_value = "1000,5000,10000")]
    pub sizes: String,
    /// Comma-separated methods.
    #[arg(long, default_value = "rsdne,rsdne-star")]
    pub method: String,
    /// Per-run limit in seconds.
    #[arg(long, default_value_t = 600.0)]
    pub timeout: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Also write the table to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, cine_core::Error> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| cine_core::Error::Config(format!("bad {what} `{t}`")))
        })
        .collect()
}
