use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphvec::eval::SplitSpec;
use graphvec::{DatasetFormat, TrainConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "graphvec", version, about = "Whole-graph embeddings from WL rooted subgraphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the rooted-subgraph vocabulary of a dataset as TSV.
    Vocab(VocabArgs),
    /// Train graph vectors and write embeddings, model and run manifest.
    Train(TrainArgs),
    /// Repeated stratified hold-out classification of graph vectors.
    Classify(ClassifyArgs),
    /// k-means over graph vectors, scored by ARI against class labels.
    Cluster(ClusterArgs),
    /// Nearest graphs to a query graph by cosine similarity.
    Similar(SimilarArgs),
    /// Vectors for unseen graphs against a trained model's frozen tokens.
    Infer(InferArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Tu,
    Jsonl,
}

impl From<FormatArg> for DatasetFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Tu => DatasetFormat::Tu,
            FormatArg::Jsonl => DatasetFormat::Jsonl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// TU dataset directory or JSON-lines file.
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to `tu` for directories and `jsonl` otherwise.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

impl DataArgs {
    pub fn resolved_format(&self) -> FormatArg {
        self.format
            .unwrap_or(if self.input.is_dir() { FormatArg::Tu } else { FormatArg::Jsonl })
    }
}

#[derive(Debug, Clone, Args)]
pub struct TokenArgs {
    /// Largest rooted-subgraph degree D.
    #[arg(long, default_value_t = 3)]
    pub wl_degree: usize,
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    /// Fold edge labels into rooted-subgraph tokens.
    #[arg(long)]
    pub edge_labels: bool,
}

#[derive(Debug, Args)]
pub struct VocabArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub tokens: TokenArgs,
    /// TSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// TU dataset directory or JSON-lines file.
    #[arg(long, required_unless_present = "from_manifest")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, default_value_t = 3)]
    pub wl_degree: usize,
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    #[arg(long)]
    pub edge_labels: bool,
    #[arg(long, default_value_t = 128)]
    pub dimensions: usize,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    /// Negative samples per target token.
    #[arg(long, default_value_t = 10)]
    pub negative: usize,
    /// Exponent on token frequency for negative sampling; 0 is uniform.
    #[arg(long, default_value_t = 0.75)]
    pub ns_exponent: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Reject negatives that occur anywhere in the current graph.
    #[arg(long)]
    pub exclude_document: bool,
    /// Visit each graph's tokens in a fresh random order every epoch.
    #[arg(long)]
    pub shuffle_tokens: bool,
    #[arg(long, value_enum, default_value_t = Precision::F32)]
    pub precision: Precision,
    /// Output directory; required unless taken from a manifest.
    #[arg(long, required_unless_present = "from_manifest")]
    pub output: Option<PathBuf>,
    /// Repeat the run recorded in a manifest; every other option except
    /// `--output` is ignored.
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
}

impl TrainArgs {
    pub fn config(&self) -> TrainConfig {
        TrainConfig {
            max_degree: self.wl_degree,
            dimensions: self.dimensions,
            epochs: self.epochs,
            learning_rate: self.lr,
            negative_samples: self.negative,
            ns_exponent: self.ns_exponent,
            seed: self.seed,
            workers: self.workers,
            min_count: self.min_count,
            edge_labels: self.edge_labels,
            exclude_document: self.exclude_document,
            shuffle_tokens: self.shuffle_tokens,
        }
    }
}

/// Where graph vectors and their class labels come from.
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Binary model file written by `train`.
    #[arg(long, conflicts_with_all = ["embeddings", "wl_features"])]
    pub model: Option<PathBuf>,
    /// Text embeddings; class labels then come from `--input`.
    #[arg(long, requires = "input")]
    pub embeddings: Option<PathBuf>,
    /// Use explicit WL subgraph counts of `--input` instead of learned vectors.
    #[arg(long, requires = "input")]
    pub wl_features: bool,
    /// Dataset supplying labels (and tokens for `--wl-features`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Degree D for `--wl-features`.
    #[arg(long, default_value_t = 3)]
    pub wl_degree: usize,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = 0.9)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl ClassifyArgs {
    pub fn split(&self) -> SplitSpec {
        SplitSpec {
            train_fraction: self.train_fraction,
            repeats: self.repeats,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Number of clusters; defaults to the number of classes.
    #[arg(long)]
    pub k: Option<usize>,
    /// Independent k-means restarts, each scored separately.
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimilarArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Graph id of the query.
    #[arg(long)]
    pub query: usize,
    #[arg(long, default_value_t = 10)]
    pub top_n: usize,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Binary model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Inference epochs; defaults to the training value.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Initial learning rate; defaults to the training value.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Seed for fresh graph vectors; defaults to the training seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the inferred vectors as text embeddings.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
