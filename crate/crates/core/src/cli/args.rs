use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "treegp", version, about = "Gaussian process regression over constituency trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the Gram matrix (and optionally its gradients) of a tree file.
    Kernel(KernelCmd),
    /// Select hyperparameters and save a self-contained model.
    Train(TrainCmd),
    /// Predict with a saved model.
    Predict(PredictCmd),
    /// K-fold cross-validation with per-fold model selection.
    Crossval(CrossvalCmd),
    /// Generate a tree pool and sample targets from a GP prior over it.
    Synth(SynthCmd),
    /// Hyperparameter recovery learning curves.
    Recover(ExperimentCmd),
    /// SASSTK versus SSTK learning curves.
    Compare(ExperimentCmd),
    /// Gradient versus grid-search wall-clock benchmark.
    Benchmark(BenchmarkCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Sstk,
    SasstkFull,
    SasstkSubset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaFlag {
    Free,
    Fixed1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combine {
    Sum,
    Product,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelFlags {
    #[arg(long, value_enum, default_value_t = KernelKind::Sstk)]
    pub kernel: KernelKind,
    /// Groups for sasstk-subset: symbols joined by ',' and groups by ';',
    /// e.g. "S;NP,VP".
    #[arg(long)]
    pub subset_symbols: Option<String>,
    #[arg(long, value_enum, default_value_t = AlphaFlag::Free)]
    pub alpha: AlphaFlag,
    /// How tree and feature kernels are combined when there are several.
    #[arg(long, value_enum, default_value_t = Combine::Sum)]
    pub combine: Combine,
    #[arg(long, overrides_with = "no_normalize")]
    pub normalize: bool,
    #[arg(long, overrides_with = "normalize")]
    pub no_normalize: bool,
}

impl KernelFlags {
    /// Normalization choice, falling back to the command's default.
    pub fn normalized(&self, default: bool) -> bool {
        if self.normalize {
            true
        } else if self.no_normalize {
            false
        } else {
            default
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataFlags {
    /// Tree file for one input slot; repeat for several slots.
    #[arg(long)]
    pub trees: Vec<PathBuf>,
    /// CSV of dense features with a header row.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Target file: one row per line, comma-separated columns, optional header.
    #[arg(long)]
    pub targets: Option<PathBuf>,
    /// Divide targets by the token count of this tree slot.
    #[arg(long)]
    pub per_word: Option<usize>,
    /// Mean-center targets before fitting (the default).
    #[arg(long, overrides_with = "no_center")]
    pub center: bool,
    /// Fit on raw targets instead of mean-centered ones.
    #[arg(long, overrides_with = "center")]
    pub no_center: bool,
}

impl DataFlags {
    pub fn centered(&self) -> bool {
        self.center || !self.no_center
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SelectFlags {
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    /// Grid search instead of gradient ascent: a JSON file mapping
    /// hyperparameter names and "noise" to value lists, "performance:<size>"
    /// or "nlp".
    #[arg(long)]
    pub grid: Option<String>,
    /// Folds used inside grid search.
    #[arg(long, default_value_t = 3)]
    pub grid_folds: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunFlags {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HyperFlags {
    /// λ for every group.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// α for every group.
    #[arg(long = "alpha-value")]
    pub alpha_value: Option<f64>,
    /// Individual hyperparameter as name=value; overrides --lambda/--alpha-value.
    #[arg(long = "hyper")]
    pub hypers: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelCmd {
    #[command(flatten)]
    pub data: DataFlags,
    #[command(flatten)]
    pub kernel: KernelFlags,
    #[command(flatten)]
    pub hyper: HyperFlags,
    /// Also write one gradient matrix per hyperparameter.
    #[arg(long)]
    pub grads: bool,
    #[command(flatten)]
    pub run: RunFlags,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainCmd {
    #[command(flatten)]
    pub data: DataFlags,
    /// Target column (index or header name).
    #[arg(long, default_value = "0")]
    pub target_column: String,
    #[command(flatten)]
    pub kernel: KernelFlags,
    #[command(flatten)]
    pub select: SelectFlags,
    #[command(flatten)]
    pub run: RunFlags,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictCmd {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataFlags,
    #[command(flatten)]
    pub run: RunFlags,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CrossvalCmd {
    #[command(flatten)]
    pub data: DataFlags,
    #[command(flatten)]
    pub kernel: KernelFlags,
    #[command(flatten)]
    pub select: SelectFlags,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[command(flatten)]
    pub run: RunFlags,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PoolFlags {
    /// Tree pool file; a pool is generated when omitted.
    #[arg(long)]
    pub trees: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub pool_size: usize,
    /// Seed of the generated pool (default: --seed).
    #[arg(long)]
    pub pool_seed: Option<u64>,
    #[arg(long, default_value_t = 4)]
    pub max_depth: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthCmd {
    #[command(flatten)]
    pub pool: PoolFlags,
    #[command(flatten)]
    pub kernel: KernelFlags,
    #[command(flatten)]
    pub hyper: HyperFlags,
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    #[command(flatten)]
    pub run: RunFlags,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExperimentCmd {
    #[command(flatten)]
    pub pool: PoolFlags,
    /// Comma-separated training sizes.
    #[arg(long)]
    pub sizes: Option<String>,
    #[arg(long, default_value_t = 200)]
    pub test_size: usize,
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[command(flatten)]
    pub run: RunFlags,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchmarkCmd {
    #[command(flatten)]
    pub pool: PoolFlags,
    #[arg(long, default_value_t = 200)]
    pub train_size: usize,
    #[arg(long, default_value_t = 200)]
    pub test_size: usize,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    /// Comma-separated iteration budgets.
    #[arg(long, default_value = "0,1,2,3,5,10,20,50")]
    pub budgets: String,
    /// Comma-separated grid granularities.
    #[arg(long, default_value = "2,3,4,5,6,8")]
    pub granularities: String,
    #[arg(long, default_value_t = 2)]
    pub restarts: usize,
    #[command(flatten)]
    pub run: RunFlags,
}
