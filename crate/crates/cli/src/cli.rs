use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Process mining and local causal discovery under latent confounders.
///
/// Every subcommand writes its outputs into `--out` together with a
/// `<subcommand>.manifest.json` describing the run.
#[derive(Debug, Parser)]
#[command(name = "aclp", version, args_override_self = true, arg_required_else_help = true)]
pub struct Cli {
    /// Key-value file (`key = value` per line, `#` comments) whose entries
    /// act as defaults for the flags of the same name. Flags given on the
    /// command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Forward-sample a Bayesian network, or generate a synthetic flight log.
    Sample(SampleArgs),
    /// Mine a process model from an event log.
    Mine(MineArgs),
    /// Compute link-duration indicators from a log and a mined model.
    Indicators(IndicatorArgs),
    /// Learn the Markov blanket of a target from a discrete data set.
    Discover(DiscoverArgs),
    /// Run the blanket-recovery experiment on a network.
    Eval(EvalArgs),
    /// Project a network onto its observed variables as a MAG.
    Project(ProjectArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct OutArgs {
    /// Output directory; created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    /// BIF network file, or `alarm` for the bundled ALARM network.
    #[arg(long, default_value = "alarm", conflicts_with = "flight")]
    pub net: String,
    /// Generate a synthetic flight log (flights.csv) instead of sampling a network.
    #[arg(long)]
    pub flight: bool,
    /// Rows to sample, or cases to generate with --flight.
    #[arg(long, default_value_t = 2500)]
    pub n: usize,
    /// Comma-separated variables to drop from the sample, or `none`.
    #[arg(long, default_value = "none")]
    pub latents: String,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct LogArgs {
    /// Event log CSV.
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long, default_value = "Case")]
    pub case_col: String,
    #[arg(long, default_value = "Activity")]
    pub activity_col: String,
    #[arg(long, default_value = "Timestamp")]
    pub timestamp_col: String,
    #[arg(long, default_value = "Resource")]
    pub resource_col: String,
    #[arg(long, default_value = "lifecycle:transition")]
    pub lifecycle_col: String,
    /// Single-byte field delimiter.
    #[arg(long, default_value = ",")]
    pub delimiter: char,
}

#[derive(Debug, Args, Serialize)]
pub struct MineArgs {
    #[command(flatten)]
    pub log: LogArgs,
    /// Relative importance at or above which both directions of a binary
    /// conflict are kept as a loop.
    #[arg(long, default_value_t = 0.27)]
    pub preserve: f64,
    /// Relative-importance offset above which the weaker direction of a
    /// binary conflict is dropped as an exception.
    #[arg(long, default_value_t = 0.35)]
    pub ratio: f64,
    /// Edge filter cutoff on normalised significance.
    #[arg(long, default_value_t = 0.2)]
    pub cutoff: f64,
    /// Chain offsets within this tolerance count as concurrency.
    #[arg(long, default_value_t = 0.05)]
    pub nary_eps: f64,
    /// Longest cycle enumerated for N-ary resolution.
    #[arg(long, default_value_t = 8)]
    pub max_cycle_len: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct IndicatorArgs {
    #[command(flatten)]
    pub log: LogArgs,
    /// Process model JSON written by `mine`.
    #[arg(long)]
    pub model: PathBuf,
    /// Mining report JSON written by `mine`; enables parallel-block detection.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Name of the target column.
    #[arg(long, default_value = "FLIGHTDELAY")]
    pub target: String,
    /// Activity whose start defines the target.
    #[arg(long, default_value = "TAKEOFF")]
    pub target_activity: String,
    /// Event attribute holding the scheduled time of the target activity.
    #[arg(long, default_value = "SCHEDULED", conflicts_with = "reference_activity")]
    pub scheduled_attr: String,
    /// Measure the target from the start of this activity instead of a
    /// scheduled attribute.
    #[arg(long)]
    pub reference_activity: Option<String>,
    /// Equal-frequency bins per variable.
    #[arg(long, default_value_t = 3)]
    pub bins: usize,
    /// Keep the individual edges of parallel blocks.
    #[arg(long)]
    pub no_parallel_blocks: bool,
    /// Keep edges that touch the target's defining activities.
    #[arg(long)]
    pub keep_target_edges: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct DiscoverArgs {
    /// Integer-coded CSV data set.
    #[arg(long)]
    pub data: PathBuf,
    /// Bin sidecar JSON written by `indicators`; fixes cardinalities.
    #[arg(long)]
    pub bins: Option<PathBuf>,
    #[arg(long, default_value = "FLIGHTDELAY")]
    pub target: String,
    /// Process model JSON; orients blanket edges along the process order.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Activity the target is attached to when orienting.
    #[arg(long, default_value = "TAKEOFF")]
    pub target_activity: String,
    /// Largest variable set handed to the local structure search.
    #[arg(long, default_value_t = 12)]
    pub cap: usize,
    /// Also place the spouses of each child in the blanket.
    #[arg(long)]
    pub child_spouses: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// BIF network file, or `alarm` for the bundled ALARM network.
    #[arg(long, default_value = "alarm")]
    pub net: String,
    /// Comma-separated latent variables (aliases allowed), or `none`.
    #[arg(long, default_value = "none")]
    pub latents: String,
    /// Rows per sampled data set.
    #[arg(long, default_value_t = 2500)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value = "VTUB")]
    pub target: String,
    /// Repeat i uses seed + i.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Worker threads for repeats; 1 runs sequentially, 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, default_value_t = 12)]
    pub cap: usize,
    #[arg(long)]
    pub child_spouses: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    InducingPath,
    Exhaustive,
}

#[derive(Debug, Args, Serialize)]
pub struct ProjectArgs {
    /// BIF network file, or `alarm` for the bundled ALARM network.
    #[arg(long, default_value = "alarm")]
    pub net: String,
    /// Comma-separated latent variables (aliases allowed), or `none`.
    #[arg(long, default_value = "none")]
    pub latents: String,
    #[arg(long, value_enum, default_value = "inducing-path")]
    pub method: Method,
    #[command(flatten)]
    pub out: OutArgs,
}
