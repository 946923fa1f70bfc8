use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bippr", version, about = "Personalized PageRank estimation and personalized search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate π_s(t) for one source and target.
    Estimate(EstimateArgs),
    /// Build grouped or sampling indices for keyword target sets.
    Precompute(PrecomputeArgs),
    /// Rank a target set for one source.
    Search(SearchArgs),
    /// Time the search methods over a sweep of target-set sizes.
    Bench(BenchArgs),
    /// Exact PPR by power iteration.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Edge list, one `from to [weight]` per line.
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    pub graph: Option<PathBuf>,
    /// Read a third column of positive edge weights.
    #[arg(long)]
    pub weighted: bool,
    /// Generate a graph instead: `cycle:N`, `er:N:P` or `powerlaw:N:EXPONENT`.
    #[arg(long)]
    pub synthetic: Option<String>,
    /// Seed for `--synthetic`.
    #[arg(long, default_value_t = 0)]
    pub graph_seed: u64,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Teleport probability.
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Smallest PPR value of interest. Defaults to 4/n.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Random seed. Required when BIPPR_TEST_MODE=1.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct TargetArgs {
    /// Use the targets of this keyword.
    #[arg(long)]
    pub keyword: Option<String>,
    /// Comma-separated target node ids.
    #[arg(long, value_delimiter = ',')]
    pub targets: Option<Vec<u32>>,
}

#[derive(Debug, Args)]
pub struct RmaxArgs {
    /// Fixed residual threshold.
    #[arg(long, conflicts_with = "adaptive_rmax")]
    pub rmax: Option<f64>,
    /// Choose r_max per target set from a walk budget: `BETA,K,C`.
    #[arg(long, value_name = "BETA,K,C")]
    pub adaptive_rmax: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IndexMethod {
    Grouped,
    Sampling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SearchMethod {
    Mc,
    PerTarget,
    Grouped,
    Sampling,
    Oracle,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Maximum pushes per target.
    #[arg(long, default_value_t = bippr::reverse_push::DEFAULT_PUSH_BUDGET)]
    pub push_budget: u64,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Source node, or a distribution `v:p,v:p,...`.
    #[arg(long)]
    pub source: String,
    /// Target node.
    #[arg(long)]
    pub target: u32,
    /// Target relative error.
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// Target failure probability.
    #[arg(long, default_value_t = 0.01)]
    pub pfail: f64,
    /// Walk-count constant; derived from epsilon and pfail when omitted.
    #[arg(long)]
    pub c: Option<f64>,
    /// Residual threshold; derived from the graph when omitted.
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Balance push and walk time instead of using a fixed r_max.
    #[arg(long, conflicts_with = "rmax")]
    pub balanced: bool,
}

#[derive(Debug, Args)]
pub struct PrecomputeArgs {
    /// Maximum pushes per target.
    #[arg(long, default_value_t = bippr::reverse_push::DEFAULT_PUSH_BUDGET)]
    pub push_budget: u64,
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Keyword file, one `node keyword` pair per line.
    #[arg(long)]
    pub keywords: PathBuf,
    /// Only index this keyword.
    #[arg(long)]
    pub keyword: Option<String>,
    /// Index layout to build.
    #[arg(long, value_enum)]
    pub method: IndexMethod,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    #[command(flatten)]
    pub rmax: RmaxArgs,
    /// Query-time walk budget used by --adaptive-rmax.
    #[arg(long, default_value_t = 10_000)]
    pub walks: u64,
    /// Run the reverse pushes on all cores. Output is unchanged.
    #[arg(long)]
    pub parallel: bool,
    /// Output index file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Maximum pushes per target.
    #[arg(long, default_value_t = bippr::reverse_push::DEFAULT_PUSH_BUDGET)]
    pub push_budget: u64,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Search method.
    #[arg(long, value_enum)]
    pub method: SearchMethod,
    /// Source node, or a distribution `v:p,v:p,...`.
    #[arg(long)]
    pub source: String,
    #[command(flatten)]
    pub target: TargetArgs,
    /// Keyword file for --keyword when no index is given.
    #[arg(long)]
    pub keywords: Option<PathBuf>,
    /// Index written by `precompute`.
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[command(flatten)]
    pub rmax: RmaxArgs,
    /// Walk-count constant used when the walk count is derived from r_max.
    #[arg(long)]
    pub c: Option<f64>,
    /// Forward walks. For mc, the number of walks taken.
    #[arg(long)]
    pub walks: Option<u64>,
    /// Samples to draw (sampling) or hits to collect (mc).
    #[arg(long)]
    pub samples: Option<u64>,
    /// Re-score the sampled top-k exactly.
    #[arg(long)]
    pub rescore: bool,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Target-set sizes to sweep.
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
    pub sizes: Vec<usize>,
    /// Methods to time.
    #[arg(long, value_delimiter = ',', default_value = "mc,per-target,grouped,sampling")]
    pub methods: Vec<String>,
    /// Forward walks per query for the bidirectional methods.
    #[arg(long, default_value_t = 10_000)]
    pub walks: u64,
    /// Random target sets per size.
    #[arg(long, default_value_t = 10)]
    pub target_sets: usize,
    /// Random sources per target set.
    #[arg(long, default_value_t = 10)]
    pub sources: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0.77)]
    pub beta: f64,
    #[arg(long, default_value_t = 20.0)]
    pub c: f64,
    /// Monte Carlo takes MC_C/δ walks.
    #[arg(long, default_value_t = 40.0)]
    pub mc_c: f64,
    /// Skip the exact rankings.
    #[arg(long)]
    pub no_precision: bool,
    /// Random seed for target sets, sources and walks.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for report.txt, runtime.dat and precision.dat.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Source node, or a distribution `v:p,v:p,...`.
    #[arg(long)]
    pub source: String,
    #[command(flatten)]
    pub target: TargetArgs,
    /// Keyword file for --keyword.
    #[arg(long)]
    pub keywords: Option<PathBuf>,
    /// Print the top k; all nonzero entries when omitted.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}
