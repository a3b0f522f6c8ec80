use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "tinytasks",
    version,
    about = "Simulate and bound parallel systems with tiny tasks"
)]
pub struct Cli {
    /// Output directory for data files and manifests.
    #[arg(
        long,
        global = true,
        env = "TINYTASKS_OUT",
        default_value = "tinytasks-out"
    )]
    pub out: PathBuf,

    /// Worker threads for sweeps and stability searches (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// More log output; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a system and write job/task tables and a summary.
    Simulate(SimulateArgs),
    /// Evaluate an analytical quantile bound.
    Bound(BoundArgs),
    /// Simulated and analytical maximum stable utilization per k.
    Stability(StabilityArgs),
    /// Simulate a one-parameter sweep, optionally next to the bounds.
    Sweep(SweepArgs),
    /// Compare the sojourn times of two traces.
    Compare(CompareArgs),
    /// Fit the overhead model to measured task and job tables.
    FitOverhead(FitArgs),
}

/// System parameters shared by the simulation commands. Every field can also
/// come from the `--config` TOML file; flags win.
#[derive(Debug, Args, Clone, Default)]
pub struct SystemArgs {
    /// TOML file with system parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// sm, sqfj or cfj.
    #[arg(long)]
    pub model: Option<String>,
    /// Number of workers.
    #[arg(long)]
    pub l: Option<usize>,
    /// Tasks per job.
    #[arg(long)]
    pub k: Option<usize>,
    /// Inter-arrival law: exp:<rate/s>, erlang:<shape>:<rate/s>, det:<ms>, sexp:<ms>:<rate/s>.
    #[arg(long)]
    pub arrival: Option<String>,
    /// Task execution law, same grammar as --arrival.
    #[arg(long)]
    pub exec: Option<String>,
    /// none, paper, or custom:<c_ts ms>:<mu_ts /s>:<c_pd_job ms>:<c_pd_task ms>.
    #[arg(long)]
    pub overhead: Option<String>,
    /// Number of jobs to simulate.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fork-join jobs depart in arrival order.
    #[arg(long)]
    pub in_sequence: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Also write the per-task table.
    #[arg(long)]
    pub record_tasks: bool,
    /// Jobs excluded from the summary statistics.
    #[arg(long, default_value_t = tinytasks::simulator::DEFAULT_WARMUP_JOBS)]
    pub warmup: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundModel {
    /// Single exponential server.
    Mm1,
    /// Split-merge with k >= l exponential tasks.
    SmTiny,
    /// Split-merge with l Erlang(k/l) tasks.
    SmBig,
    /// Single-queue fork-join with k >= l exponential tasks.
    FjTiny,
    /// Conventional fork-join, k = l.
    FjConv,
    /// Ideal partition into l equal tasks.
    Ideal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Waiting,
    Sojourn,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    pub model: BoundModel,
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Arrival rate in 1/s.
    #[arg(long)]
    pub lambda: f64,
    /// Task service rate in 1/s.
    #[arg(long)]
    pub mu: f64,
    /// Violation probability.
    #[arg(long, alias = "epsilon")]
    pub eps: f64,
    #[arg(long, value_enum, default_value = "sojourn")]
    pub metric: MetricArg,
    /// Task whose waiting time is bounded (fj-tiny).
    #[arg(long)]
    pub task_index: Option<usize>,
    /// none or paper (sm-tiny and fj-tiny only).
    #[arg(long, default_value = "none")]
    pub overhead: String,
    /// Evaluate for each k of the list and write a CSV; mu scales with k
    /// (constant job workload) unless --pin-mu.
    #[arg(long, value_delimiter = ',')]
    pub k_list: Option<Vec<usize>>,
    #[arg(long)]
    pub pin_mu: bool,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Tasks per job to evaluate; the job workload of --k/--exec is kept.
    #[arg(long, value_delimiter = ',', required = true)]
    pub k_list: Vec<usize>,
    /// Jobs per stability probe.
    #[arg(long, default_value_t = 50_000)]
    pub probe_jobs: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// k, lambda or l.
    #[arg(long)]
    pub vary: String,
    /// Values of the swept parameter (lambda in 1/s).
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    /// Violation probabilities for the analytical columns.
    #[arg(long, value_delimiter = ',', default_value = "0.01")]
    pub eps: Vec<f64>,
    /// Skip the analytical columns.
    #[arg(long)]
    pub no_analytical: bool,
    /// Keep the task rate fixed when sweeping k.
    #[arg(long)]
    pub pin_mu: bool,
    #[arg(long, default_value_t = tinytasks::simulator::DEFAULT_WARMUP_JOBS)]
    pub warmup: usize,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// First trace: directory or jobs CSV.
    #[arg(long)]
    pub a: PathBuf,
    /// Second trace.
    #[arg(long)]
    pub b: PathBuf,
    /// Points of the PP plot.
    #[arg(long, default_value_t = tinytasks::stochastic::DEFAULT_PP_GRID)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Tasks CSV; repeat for several runs, paired with --jobs in order.
    #[arg(long, required = true)]
    pub tasks: Vec<PathBuf>,
    /// Jobs CSV, one per --tasks.
    #[arg(long, required = true)]
    pub jobs: Vec<PathBuf>,
}
