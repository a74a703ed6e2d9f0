use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qmean", version, about = "Exact simulation of phase-kick quantum mean estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Serial phase-kick estimate of the mean.
    EstimateSerial(SerialArgs),
    /// One-shot cat-state protocol with one rotation per datum.
    EstimateEpr(EprArgs),
    /// η processors running the kick pipeline on a shared cat state.
    EstimateDistributed(DistributedArgs),
    /// θ or η sweep with log-log fits.
    Sweep(SweepArgs),
    /// Compare traced amplitudes with the closed form and dense with branch-pair runs.
    OracleCheck(OracleArgs),
    /// Classical sampling estimate.
    Baseline(BaselineArgs),
    /// CNOT phase-doubling ladder.
    Ladder(LadderArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset file: one real per line, or a JSON array.
    #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
    pub data: Option<PathBuf>,
    /// Generator: uniform:mu=..,n=.. | skew:mu=..,n=.. | const:c=..,n=.. | list:v1,v2,..
    #[arg(long)]
    pub gen: Option<String>,
    /// Drop trailing values down to a power-of-two length.
    #[arg(long)]
    pub truncate: bool,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Args)]
pub struct KickArgs {
    /// Iterations per pipeline; derived from θ when omitted.
    #[arg(long)]
    pub r: Option<u64>,
    /// Readout samples.
    #[arg(long, default_value_t = 400)]
    pub alpha: u64,
    /// Restarts tolerated per prepared system.
    #[arg(long, default_value_t = 10_000)]
    pub max_restarts: u64,
    /// Use γ = x instead of arcsin(x).
    #[arg(long)]
    pub linear_gamma: bool,
}

#[derive(Debug, Args)]
pub struct SerialArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, required_unless_present = "schedule")]
    pub theta: Option<f64>,
    #[command(flatten)]
    pub kick: KickArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Read the prepared phase exactly instead of sampling.
    #[arg(long)]
    pub ideal: bool,
    /// Run the θ-reduction schedule.
    #[arg(long)]
    pub schedule: bool,
    #[arg(long, default_value_t = 0.5)]
    pub theta0: f64,
    #[arg(long, default_value_t = 1.5)]
    pub factor: f64,
    /// Stop once |μ_e| exceeds this multiple of θ².
    #[arg(long, default_value_t = 0.1)]
    pub threshold: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub theta_floor: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EprArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub theta: f64,
    #[arg(long, default_value_t = 400)]
    pub alpha: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub ideal: bool,
    /// Network trace path (JSON lines).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DistributedArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, required_unless_present = "config")]
    pub theta: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub eta: usize,
    #[command(flatten)]
    pub kick: KickArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub ideal: bool,
    /// Allow η above the processor bound.
    #[arg(long)]
    pub force: bool,
    /// Give each processor its own shard of the data.
    #[arg(long)]
    pub shard: bool,
    /// Protocol configuration (JSON); replaces θ, η, r, α, seed, force and shard.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// θ values of a θ sweep.
    #[arg(long, value_delimiter = ',', conflicts_with = "etas", required_unless_present = "etas")]
    pub thetas: Vec<f64>,
    /// η values of an η sweep.
    #[arg(long, value_delimiter = ',')]
    pub etas: Vec<usize>,
    /// θ of an η sweep.
    #[arg(long, default_value_t = 0.1)]
    pub theta: f64,
    /// Keep the dataset mean instead of setting μ = θ² per point.
    #[arg(long)]
    pub fixed_mean: bool,
    #[command(flatten)]
    pub kick: KickArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub theta: f64,
    /// Iterations of the dense against branch-pair pipeline comparison.
    #[arg(long, default_value_t = 3)]
    pub r: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub linear_gamma: bool,
    /// Negative control: flips the sign of the second rotation.
    #[arg(long, hide = true)]
    pub corrupt_gamma_sign: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub samples: u64,
    #[arg(long, default_value_t = 1)]
    pub repeats: u64,
    /// Visit every value in order instead of drawing with replacement.
    #[arg(long, conflicts_with = "repeats")]
    pub exhaustive: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LadderArgs {
    /// Input phases.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required_unless_present = "copies")]
    pub phases: Vec<f64>,
    /// Number of identical inputs, as an alternative to --phases.
    #[arg(long, conflicts_with = "phases", requires = "phase")]
    pub copies: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub phase: Option<f64>,
    /// Levels to run; as many as possible when omitted.
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}
