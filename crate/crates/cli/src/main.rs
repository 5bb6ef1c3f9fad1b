mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use walkmeet::Model;

#[derive(Debug, Parser)]
#[command(name = "walkmeet", version, about = "First meeting times of two random walkers")]
pub struct Cli {
    /// Master seed for graph generation and simulation.
    #[arg(long, global = true, env = "WALKMEET_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Read and print node ids starting from 0 instead of 1.
    #[arg(long, global = true)]
    pub zero_based: bool,

    /// Repeat for more log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a BA or ER graph and write it as an edge list.
    Generate(GenerateArgs),
    /// Spectral meeting times, principal component and error bound.
    Analyze(AnalyzeArgs),
    /// Monte Carlo first meeting times.
    Simulate(SimulateArgs),
    /// Spectral analysis against simulation over a grid of graphs.
    Sweep(SweepArgs),
    /// Exact absorbing-chain solve on a small graph.
    Oracle(OracleArgs),
}

/// Where the graph comes from: an edge-list file or a generator.
#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Edge-list file (`i j [w]` per line, 0-based ids); overrides the generator flags.
    #[arg(long)]
    pub graph: Option<PathBuf>,

    #[arg(long, default_value = "ba")]
    pub model: Model,

    #[arg(long, default_value_t = 1000)]
    pub n: usize,

    /// Target average degree.
    #[arg(long, default_value_t = 6.0)]
    pub davg: f64,

    /// Connectivity retries for ER graphs.
    #[arg(long, default_value_t = walkmeet::generators::DEFAULT_MAX_RETRIES)]
    pub max_retries: usize,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,

    /// Edge-list destination; stdout when omitted (the stats row then goes to stderr).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub graph: GraphArgs,

    #[arg(long, default_value_t = 1)]
    pub a: usize,

    /// Partner nodes, comma separated. Without it, `--sweep-b` nodes are drawn at random.
    #[arg(long, value_delimiter = ',')]
    pub b: Vec<usize>,

    /// Number of random partner nodes when `--b` is absent.
    #[arg(long, default_value_t = 10)]
    pub sweep_b: usize,

    /// Largest graph handed to the eigensolver.
    #[arg(long, default_value_t = 5000)]
    pub max_nodes: usize,

    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,

    #[arg(long, default_value_t = 1)]
    pub a: usize,

    #[arg(long, default_value_t = 2)]
    pub b: usize,

    #[arg(long, default_value_t = 10_000)]
    pub runs: u64,

    /// Steps after which a run counts as truncated.
    #[arg(long, default_value_t = walkmeet::walk_sim::DEFAULT_T_MAX)]
    pub t_max: u64,

    #[arg(short, long)]
    pub output: Option<PathBuf>,

    /// Also write the per-node meeting frequencies here.
    #[arg(long)]
    pub freq_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "ba,er")]
    pub models: Vec<Model>,

    #[arg(long, value_delimiter = ',', default_value = "1000")]
    pub ns: Vec<usize>,

    #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,10")]
    pub davgs: Vec<f64>,

    /// Simulation runs per start pair (or in total with `--random-pairs`).
    #[arg(long, default_value_t = 10_000)]
    pub runs: u64,

    /// Partner nodes `b` drawn per cell.
    #[arg(long, default_value_t = 10)]
    pub pairs: usize,

    #[arg(long, default_value_t = 1)]
    pub a: usize,

    /// Draw a fresh start pair for every run instead of fixing `a` and sampling `b`.
    #[arg(long)]
    pub random_pairs: bool,

    #[arg(long, default_value_t = walkmeet::walk_sim::DEFAULT_T_MAX)]
    pub t_max: u64,

    #[arg(long, default_value_t = walkmeet::generators::DEFAULT_MAX_RETRIES)]
    pub max_retries: usize,

    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub graph: GraphArgs,

    #[arg(long, default_value_t = 1)]
    pub a: usize,

    #[arg(long, default_value_t = 2)]
    pub b: usize,

    /// Solve for the hitting time from `a` to this node instead of the meeting time.
    #[arg(long)]
    pub target: Option<usize>,

    #[arg(short, long)]
    pub output: Option<PathBuf>,

    /// Also write the exact meeting-node distribution here.
    #[arg(long)]
    pub distribution: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
