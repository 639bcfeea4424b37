use std::path::PathBuf;

use attrdiff::baselines::DEFAULT_LOF_NEIGHBORS;
use attrdiff::diff::{DEFAULT_BINS, DEFAULT_TOP_K};
use attrdiff::eval::benchmark::DEFAULT_SELECTION_SIZE;
use attrdiff::eval::split::DEFAULT_N_PER_DATASET;
use attrdiff::spectral::DEFAULT_PCA_THRESHOLD;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Attribute-wise comparison of two datasets of embedding vectors.
///
/// Matrices are read as ADIF binaries, or as CSV when the file name ends in
/// `.csv`.
#[derive(Debug, Parser)]
#[command(name = "attrdiff", version, propagate_version = true)]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores). Outputs do
    /// not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for every randomized step.
    #[arg(long, global = true, env = "ATTRDIFF_SEED", default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank dimensions by distribution distance and write the report,
    /// histogram plots and direction vectors.
    Diff(DiffArgs),
    /// Select samples from one dataset along a dimension.
    Select(SelectArgs),
    /// Shared-edge histogram of one dimension, with optional threshold counts.
    Hist(HistArgs),
    /// Run a covering baseline selection.
    Baseline(BaselineArgs),
    /// Biased-split benchmark of selection methods against known labels.
    Eval(EvalArgs),
    /// Fit PCA on the pooled datasets and save the model.
    Pca(PcaArgs),
    /// Convert a matrix between CSV and ADIF.
    Convert(ConvertArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    #[value(name = "1")]
    W1,
    #[value(name = "2")]
    W2,
}

#[derive(Debug, Clone, Args)]
pub struct PcaFlags {
    /// Compare in the PCA basis of the pooled data (threshold 0.99999).
    #[arg(long)]
    pub pca: bool,

    /// Compare in the PCA basis with this cumulative variance threshold.
    #[arg(long, value_name = "T", conflicts_with = "pca")]
    pub pca_threshold: Option<f64>,
}

impl PcaFlags {
    pub fn threshold(&self) -> Option<f64> {
        self.pca_threshold
            .or(self.pca.then_some(DEFAULT_PCA_THRESHOLD))
    }
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    /// Real (deployment) dataset.
    pub real: PathBuf,
    /// Development dataset.
    pub dev: PathBuf,

    /// Number of dimensions to select.
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    pub k: usize,

    /// Rank by the raw distance instead of the normalized one.
    #[arg(long)]
    pub no_normalize: bool,

    #[command(flatten)]
    pub pca: PcaFlags,

    /// Wasserstein order.
    #[arg(long, value_enum, default_value = "2")]
    pub order: OrderArg,

    /// Histogram bins.
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,

    /// Samples selected at the endpoint of each selected dimension.
    #[arg(long, default_value_t = DEFAULT_SELECTION_SIZE)]
    pub select_k: usize,

    /// Output directory.
    #[arg(long, short, default_value = "attrdiff-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EndpointArg {
    /// Side of the real mean relative to the development mean (needs --dev).
    Auto,
    Min,
    Max,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Dataset to select from (treated as the real dataset).
    pub input: PathBuf,

    /// Development dataset, required by `--endpoint auto`.
    #[arg(long)]
    pub dev: Option<PathBuf>,

    /// Dimension to select along.
    #[arg(long)]
    pub dim: usize,

    /// Which extreme to take. Ignored with --center.
    #[arg(long, value_enum, default_value = "auto")]
    pub endpoint: EndpointArg,

    /// Number of samples.
    #[arg(long, default_value_t = DEFAULT_SELECTION_SIZE)]
    pub k: usize,

    /// Select at random within `center ± half-width` instead of an endpoint.
    #[arg(long, requires = "half_width")]
    pub center: Option<f64>,

    /// Half width of the `--center` window.
    #[arg(long, requires = "center")]
    pub half_width: Option<f64>,

    /// Saved PCA model; the dimension then refers to its components.
    #[arg(long)]
    pub pca_model: Option<PathBuf>,

    /// Output JSON file (default: stdout).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("count").multiple(false))]
pub struct HistArgs {
    /// Real (deployment) dataset.
    pub real: PathBuf,
    /// Development dataset.
    pub dev: PathBuf,

    /// Dimension to bin.
    #[arg(long)]
    pub dim: usize,

    /// Number of equal-width bins over the pooled range.
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,

    /// Count samples strictly above this value in both datasets.
    #[arg(long, group = "count", allow_hyphen_values = true)]
    pub count_above: Option<f64>,

    /// Count samples strictly below this value in both datasets.
    #[arg(long, group = "count", allow_hyphen_values = true)]
    pub count_below: Option<f64>,

    /// Output JSON file (default: stdout).
    #[arg(long, short)]
    pub out: Option<PathBuf>,

    /// Also write the histogram plot here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineMethod {
    /// Highest local outlier factor relative to the development set.
    Lof,
    /// Greedy farthest point from the development set and earlier picks.
    Kcenter,
    /// Greedy additions that most reduce the Fréchet distance to the real set.
    Fid,
    /// Uniform sample of the real set.
    Random,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Real (deployment) dataset; selections are drawn from it.
    pub real: PathBuf,
    /// Development dataset.
    pub dev: PathBuf,

    /// Selection method.
    #[arg(long, value_enum)]
    pub method: BaselineMethod,

    /// Number of real samples to select.
    #[arg(long, default_value_t = DEFAULT_SELECTION_SIZE)]
    pub k: usize,

    /// LOF neighbourhood size.
    #[arg(long, default_value_t = DEFAULT_LOF_NEIGHBORS)]
    pub neighbors: usize,

    /// Seeded subsample of each dataset to at most this many rows first.
    /// Reported indices refer to the full input.
    #[arg(long)]
    pub sample: Option<usize>,

    /// Output JSON file (default: stdout).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Comma-separated method ids: stylediff, stylediff_no_norm, lof,
    /// kcenter, fid_greedy, random.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "stylediff,stylediff_no_norm,lof,kcenter,fid_greedy,random"
    )]
    pub methods: Vec<String>,

    /// Independent trials; each draws fresh splits (and a fresh synthetic pool).
    #[arg(long, default_value_t = 10)]
    pub trials: usize,

    /// Samples per development and real dataset.
    #[arg(long, default_value_t = DEFAULT_N_PER_DATASET)]
    pub n_per_dataset: usize,

    /// Real samples selected per split.
    #[arg(long, default_value_t = DEFAULT_SELECTION_SIZE)]
    pub selection_size: usize,

    /// LOF neighbourhood size.
    #[arg(long, default_value_t = DEFAULT_LOF_NEIGHBORS)]
    pub neighbors: usize,

    #[command(flatten)]
    pub pca: PcaFlags,

    /// Attribute matrix of an external labelled pool.
    #[arg(long, requires = "labels")]
    pub attrs: Option<PathBuf>,

    /// Labels of the external pool: one 0/1 per line, or `id,label` lines.
    #[arg(long, requires = "attrs")]
    pub labels: Option<PathBuf>,

    /// Second embedding of the external pool used by the covering baselines.
    #[arg(long, requires = "attrs")]
    pub baseline_attrs: Option<PathBuf>,

    #[command(flatten)]
    pub synth: SynthArgs,

    /// Output directory for the report and the CSV table.
    #[arg(long, short, default_value = "attrdiff-eval")]
    pub out: PathBuf,
}

/// Synthetic pool used when no external pool is given. Defaults are the
/// standard benchmark; run it with `--seed 1729`.
#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Dimensions of the synthetic pool.
    #[arg(long, default_value_t = 16)]
    pub synth_d: usize,

    /// Pool size per trial.
    #[arg(long, default_value_t = 1500)]
    pub synth_pool: usize,

    /// Comma-separated planted dimensions.
    #[arg(long, value_delimiter = ',', default_value = "5")]
    pub synth_planted: Vec<usize>,

    /// Mean separation between the labels along planted dimensions.
    #[arg(long, default_value_t = 2.0)]
    pub synth_delta: f64,

    /// Scale law of the other dimensions: `uniform:S` or `loguniform:LO:HI`.
    #[arg(long, default_value = "loguniform:1:100")]
    pub synth_scale: String,

    /// Mix the first planted dimension with m−1 others by a random rotation.
    #[arg(long, value_name = "M")]
    pub synth_rotation: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    /// Real (deployment) dataset.
    pub real: PathBuf,
    /// Development dataset.
    pub dev: PathBuf,

    /// Keep the fewest components whose cumulative variance ratio reaches this.
    #[arg(long, default_value_t = DEFAULT_PCA_THRESHOLD)]
    pub threshold: f64,

    /// Output directory: model.adpc, report.json, and with --transform the
    /// projected matrices.
    #[arg(long, short, default_value = "attrdiff-pca")]
    pub out: PathBuf,

    /// Also write both datasets in the PCA basis.
    #[arg(long)]
    pub transform: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    F32,
    F64,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Source matrix (`.csv` or ADIF).
    pub input: PathBuf,
    /// Destination; the format follows the extension.
    pub output: PathBuf,

    /// Stored precision of the output.
    #[arg(long, value_enum, default_value = "f64")]
    pub precision: PrecisionArg,
}
