use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use conflictfree::bench::{Family, Method};
use conflictfree::Error;
use serde_json::json;

mod commands;
mod input;

/// Conflict-free joint selection for two players.
#[derive(Parser)]
#[command(name = "conflictfree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineMethod {
    Uniform,
    Renorm,
    Order,
}

#[derive(Subcommand)]
enum Command {
    /// Build the loss-minimizing matrix for a preference file.
    Construct {
        /// Preference JSON; "-" reads stdin.
        #[arg(default_value = "-")]
        input: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Exit with status 1 if zero loss is not achievable.
        #[arg(long)]
        require_zero_loss: bool,
    },
    /// Evaluate one of the comparison mechanisms.
    Baseline {
        #[arg(default_value = "-")]
        input: String,
        #[arg(long, value_enum)]
        method: BaselineMethod,
        /// Use the uniform matrix when renormalization has nothing to normalize.
        #[arg(long)]
        fallback_uniform: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Sweep the preference families and report every method's loss.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "i,ii,iii,iv")]
        families: Vec<Family>,
        #[arg(long, default_value_t = 3)]
        n_min: usize,
        #[arg(long, default_value_t = 50)]
        n_max: usize,
        #[arg(long, value_delimiter = ',', default_value = "uniform,renorm,order,optimal")]
        methods: Vec<Method>,
        /// Output path; standard output when omitted.
        #[arg(long)]
        out: Option<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Print min/max loss per family and method to stderr.
        #[arg(long)]
        summary: bool,
    },
    /// Check optimality of a matrix (given, or constructed from the preferences).
    Verify {
        #[arg(default_value = "-")]
        input: String,
        #[arg(long)]
        kkt: bool,
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        convexity: bool,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Draw arm pairs from a matrix.
    Sample {
        #[arg(default_value = "-")]
        input: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        draws: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Zero-loss feasibility for two or more players.
    Feasibility {
        /// JSON of the form {"players": [[...], ...]}.
        #[arg(default_value = "-")]
        input: String,
        /// Expected number of players; rejects input with a different count.
        #[arg(long)]
        players: Option<usize>,
        /// Also run the tuple-simplex minimizer.
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

/// Why a command did not succeed, mapped onto the exit status.
pub enum Failure {
    /// The request was well formed but cannot be satisfied (status 1).
    Unsatisfied(serde_json::Value),
    Core(Error),
    Io(String),
}

impl Failure {
    pub fn io(msg: String) -> Self {
        Failure::Io(msg)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Construct { input, format, require_zero_loss } => commands::construct(&input, format, require_zero_loss),
        Command::Baseline { input, method, fallback_uniform, format } => {
            commands::baseline(&input, method, fallback_uniform, format)
        }
        Command::Bench { families, n_min, n_max, methods, out, format, summary } => {
            commands::bench(&families, n_min..=n_max, &methods, out.as_deref(), format, summary)
        }
        Command::Verify { input, kkt, oracle, convexity, trials, seed, format } => {
            commands::verify(&input, commands::Checks { kkt, oracle, convexity, trials, seed }, format)
        }
        Command::Sample { input, seed, draws, format } => commands::sample(&input, seed, draws, format),
        Command::Feasibility { input, players, oracle, format } => commands::feasibility(&input, players, oracle, format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Unsatisfied(report)) => {
            eprintln!("{report}");
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("{}", json!({ "kind": e.kind(), "message": e.to_string() }));
            ExitCode::from(if e.is_internal() { 3 } else { 2 })
        }
        Err(Failure::Io(msg)) => {
            eprintln!("{}", json!({ "kind": "io", "message": msg }));
            ExitCode::from(2)
        }
    }
}
