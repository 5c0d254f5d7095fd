//! `oraclesat` command-line driver.
//!
//! Exit codes: `solve` returns 10 when some run found a solution and 20 when
//! none did; `exact` returns 10 (SAT), 20 (UNSAT) or 30 (budget exhausted).
//! Every other successful command returns 0. Errors return 1, malformed
//! arguments 2.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "oraclesat", version, about = "Oracle-based stochastic local search for SAT")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Master seed; every random choice derives from it
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Suppress log output and human-readable summaries on stderr
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Emit machine-readable JSON on stdout
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate random k-SAT instances and a manifest
    Gen(commands::GenArgs),
    /// Run Moser-Tardos or WalkSAT on one instance
    Solve(commands::SolveArgs),
    /// Evaluate the local lemma condition for an oracle
    CheckLll(commands::CheckLllArgs),
    /// Evaluate the Gibbs, LLL and total training loss
    Loss(commands::LossArgs),
    /// Run the benchmark protocol over a manifest
    Bench(commands::BenchArgs),
    /// Decide an instance with the complete DPLL solver
    Exact(commands::ExactArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.global.quiet {
            log::LevelFilter::Off
        } else {
            log::LevelFilter::Warn
        })
        .format_timestamp(None)
        .init();

    let result = match &cli.command {
        Command::Gen(a) => commands::gen(&cli.global, a),
        Command::Solve(a) => commands::solve(&cli.global, a),
        Command::CheckLll(a) => commands::check_lll(&cli.global, a),
        Command::Loss(a) => commands::loss(&cli.global, a),
        Command::Bench(a) => commands::bench(&cli.global, a),
        Command::Exact(a) => commands::exact(&cli.global, a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
