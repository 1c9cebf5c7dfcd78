//! `bayesrank`: fit lineup models, derive calibrated ordering statements and
//! run simulation studies.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Error caused by the invocation rather than the data; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "bayesrank", version, about, long_about = None)]
struct Cli {
    /// Worker threads for parallel sections [default: available parallelism]
    #[arg(long, global = true, env = "BAYESRANK_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the point-difference model and write posterior draws
    Sample(SampleArgs),
    /// Evaluate the global statement of a fixed action
    Statements(StatementsArgs),
    /// Search for the action with the largest reward
    Optimize(OptimizeArgs),
    /// Run a simulation study and write one metrics row per cell
    Simulate(SimulateArgs),
    /// Generate a synthetic league encounter file
    Generate(GenerateArgs),
    /// Derived exports: caterpillar table, lineup draws, ranking graph
    #[command(subcommand)]
    Export(ExportCommand),
}

fn fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not in [0, 1]"))
    }
}

fn open_fraction(s: &str) -> Result<f64, String> {
    let v = fraction(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum CostArg {
    Identity,
    Log1p,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum LevelArg {
    Players,
    Lineups,
}

#[derive(Args)]
pub struct EntityFilter {
    /// Keep only these entity ids (comma separated)
    #[arg(long, value_delimiter = ',')]
    pub entities: Vec<String>,
    /// Keep only entities of this team: players keyed TEAM_name and lineups
    /// whose five players all carry that prefix
    #[arg(long)]
    pub team: Option<String>,
}

#[derive(Args)]
pub struct SampleArgs {
    /// Encounter CSV
    #[arg(long)]
    pub encounters: PathBuf,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Prior on the abilities: 1 fixed-scale Laplace, 2 gamma-mixed Laplace,
    /// 3 half-Cauchy normal
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub prior: u8,
    /// TOML sampler settings; the flags below override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Independent chains [default: 13]
    #[arg(long)]
    pub chains: Option<usize>,
    /// Scans discarded at the start of every chain [default: 2000]
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Keep every n-th scan after burn-in [default: 20]
    #[arg(long)]
    pub thin: Option<usize>,
    /// Kept draws over all chains [default: 10000]
    #[arg(long)]
    pub draws: Option<usize>,
    /// Random seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Refuse to run if a chain would need more scans than this
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Keep only encounters among these teams (comma separated)
    #[arg(long, value_delimiter = ',')]
    pub teams: Vec<String>,
    /// Also write draws of every observed lineup
    #[arg(long)]
    pub lineups: bool,
}

#[derive(Args)]
pub struct StatementsArgs {
    /// Draws CSV (one column per entity, one row per draw)
    #[arg(long)]
    pub draws: PathBuf,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Elementary threshold
    #[arg(long, default_value_t = 0.025, value_parser = fraction)]
    pub alpha: f64,
    /// Local error
    #[arg(long, default_value_t = 0.1, value_parser = fraction)]
    pub t: f64,
    /// Local credibility threshold
    #[arg(long, default_value_t = 0.05, value_parser = fraction)]
    pub gamma: f64,
    /// Global error
    #[arg(long, default_value_t = 0.1, value_parser = fraction)]
    pub q: f64,
    /// Zero the reward of statements with probability below 1 - epsilon
    #[arg(long, value_parser = open_fraction)]
    pub epsilon: Option<f64>,
    /// Transform applied to statement sizes in the cost
    #[arg(long, value_enum, default_value = "identity")]
    pub h: CostArg,
    #[command(flatten)]
    pub filter: EntityFilter,
}

#[derive(Args)]
pub struct OptimizeArgs {
    /// Draws CSV
    #[arg(long)]
    pub draws: PathBuf,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// TOML reward and search settings; the flags below override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Zero the reward of statements with probability below 1 - epsilon
    #[arg(long, value_parser = open_fraction)]
    pub epsilon: Option<f64>,
    /// Transform applied to statement sizes in the cost
    #[arg(long, value_enum)]
    pub h: Option<CostArg>,
    #[command(flatten)]
    pub filter: EntityFilter,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Encounter CSV whose lineups are reused for every simulated dataset
    #[arg(long)]
    pub encounters: PathBuf,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// TOML study settings; the flags below override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Truth-generating priors (comma separated) [default: 1,2,3]
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=3))]
    pub ks: Vec<u8>,
    /// Fitting priors [default: 1,2,3]
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=3))]
    pub ms: Vec<u8>,
    /// Replication factors [default: 1,2]
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..=2))]
    pub ss: Vec<u64>,
    /// Truths per generating prior [default: 5]
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Full grid with 50 replicates
    #[arg(long)]
    pub paper_scale: bool,
    /// Statement entities
    #[arg(long, value_enum)]
    pub level: Option<LevelArg>,
    /// Random seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Chains per fit [default: 4]
    #[arg(long)]
    pub chains: Option<usize>,
    /// Burn-in scans per fit [default: 500]
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Thinning of each fit [default: 2]
    #[arg(long)]
    pub thin: Option<usize>,
    /// Draws per fit [default: 2000]
    #[arg(long)]
    pub draws: Option<usize>,
    /// Keep only encounters among these teams; also sets the league label
    #[arg(long, value_delimiter = ',')]
    pub teams: Vec<String>,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// TOML league settings; the flags below override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Teams [default: 5]
    #[arg(long)]
    pub teams: Option<usize>,
    /// Roster size [default: 16]
    #[arg(long)]
    pub players_per_team: Option<usize>,
    /// Encounters [default: 844]
    #[arg(long)]
    pub encounters: Option<usize>,
    /// Noise standard deviation of a point difference [default: 8]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Random seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand)]
pub enum ExportCommand {
    /// Per-entity quartiles sorted by median
    Caterpillar {
        #[arg(long)]
        draws: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[command(flatten)]
        filter: EntityFilter,
    },
    /// Lineup draws for the lineups observed in an encounter file
    Lineups {
        /// Player draws CSV
        #[arg(long)]
        draws: PathBuf,
        #[arg(long)]
        encounters: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Keep only lineups of this team
        #[arg(long)]
        team: Option<String>,
    },
    /// DOT graph and rankings of an error-free statement report
    Graph {
        /// Statement report JSON with t = q = 0
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(io) = cause.downcast_ref::<std::io::Error>() {
            if io.kind() == std::io::ErrorKind::NotFound {
                return 2;
            }
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Sample(a) => commands::sample(a),
        Command::Statements(a) => commands::statements(a),
        Command::Optimize(a) => commands::optimize(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Generate(a) => commands::generate(a),
        Command::Export(c) => commands::export(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
