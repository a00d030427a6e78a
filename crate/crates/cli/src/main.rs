//! Command-line front end.
//!
//! Exit codes: 0 completed with no anomalies, 1 counterexample certificate
//! emitted (`search-fkg`), 2 invalid input, 3 internal consistency failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "corrineq", version, about = "Exact correlation-functional verification and FKG search")]
pub struct Cli {
    /// Master seed for generated instances.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of generated instances.
    #[arg(long, global = true)]
    pub count: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write a CSV summary here.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum CoeffMode {
    #[value(name = "F-check")]
    FCheck,
    #[value(name = "B-check")]
    BCheck,
    #[value(name = "e200")]
    E200,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Direct,
    En,
    Both,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Shapes of n with set-partition counts and c_λ, as CSV.
    Partitions {
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
    /// Evaluate E_δ, E_λ and E_n on a JSON instance.
    Eval { instance: PathBuf },
    /// Check the F and B coefficient formulas against brute force.
    Coeffs {
        /// Chain length (defaults to the length of --mu).
        #[arg(long = "N")]
        levels: Option<usize>,
        /// Number of functions.
        #[arg(long)]
        n: usize,
        /// Comma-separated measure, e.g. 1/3,2/3 (uniform if omitted).
        #[arg(long)]
        mu: Option<String>,
        #[arg(long, value_enum, default_value = "e200")]
        mode: CoeffMode,
    },
    /// Expand 1 − ∏(1 − p)^μ for the "series" of a JSON instance.
    Series {
        instance: PathBuf,
        #[arg(long = "T", default_value_t = corrineq::series::DEFAULT_TRUNCATION)]
        truncation: usize,
        #[arg(long, value_enum, default_value = "both")]
        route: Route,
    },
    /// Random chain instances; checks E_n ≥ 0 exactly.
    VerifyLemma {
        #[command(flatten)]
        batch: BatchArgs,
    },
    /// Random FKG lattice instances; reports the smallest E_n found.
    SearchFkg {
        #[command(flatten)]
        batch: BatchArgs,
    },
    /// Both series routes on random chain and lattice instances.
    Corollary {
        #[command(flatten)]
        batch: BatchArgs,
        /// Lattice instances (chain instances come from --count).
        #[arg(long, default_value_t = 50)]
        lattice_count: usize,
    },
}

/// Overrides on top of the default (or `--config`) search configuration.
#[derive(clap::Args, Debug, Default)]
pub struct BatchArgs {
    /// JSON search configuration; other flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long = "N-min")]
    pub chain_min: Option<usize>,
    #[arg(long = "N-max")]
    pub chain_max: Option<usize>,
    #[arg(long)]
    pub ground_size_min: Option<usize>,
    #[arg(long)]
    pub ground_size_max: Option<usize>,
    #[arg(long)]
    pub max_den: Option<u32>,
    #[arg(long = "T")]
    pub truncation: Option<usize>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub time_budget: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
