//! `opuc`: command-line driver producing oracle tables, predictor tables and comparison reports.

mod compare;
mod config;
mod error;
mod oracle;
mod predict;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult};
use crate::predict::Method;

#[derive(Parser)]
#[command(name = "opuc", version, about = "Orthogonal polynomials on the unit circle: oracle, predictors, comparison")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moments and Szegő recurrence: alpha, kappa, log-determinant tables and Phi_n dumps.
    Oracle {
        #[arg(long)]
        config: PathBuf,
    },
    /// Asymptotic predictor tables.
    Predict {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        config: PathBuf,
    },
    /// Checks predictor outputs against oracle outputs.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("OPUC_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Validation(format!("OPUC_THREADS = {v:?} is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Numerical(e.to_string()))
}

fn run(cli: Cli) -> CliResult<bool> {
    let pool = thread_pool()?;
    pool.install(|| match cli.command {
        Command::Oracle { config } => oracle::cmd_oracle(&config::load(&config)?).map(|_| true),
        Command::Predict { method, config } => predict::cmd_predict(&config::load(&config)?, method).map(|_| true),
        Command::Compare { config } => compare::cmd_compare(&config::load(&config)?),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("opuc: {e}");
            e.exit_code()
        }
    }
}
