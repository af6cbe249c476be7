//! `qpresponse` command-line driver.

mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::RunConfig;
use crate::exit::CliError;

#[derive(Debug, Parser)]
#[command(name = "qpresponse", version, about = "Response solutions of dissipative quasi-periodically forced oscillators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's "out".
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,
    /// Evaluate the bifurcation function with the alternative general-system
    /// weighting (eps a zeta + linear_0 + eps higher_0).
    #[arg(long = "literal-3-1b", global = true)]
    literal: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the response and write solution.json and summary.json.
    Solve,
    /// Small-divisor profile and constructive bounds.
    Diagnose,
    /// Solve over the config's eps grid and write sweep.csv.
    Sweep,
    /// Cross-check the solution against the trees, a direct solve and the ODE.
    Verify,
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::usage("--config PATH is required"))?;
    if cli.parallel == 0 {
        return Err(CliError::usage("--parallel must be at least 1"));
    }
    let config = RunConfig::load(path)?;
    let out = cli
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out)?;
    let ctx = Context {
        config: &config,
        out: &out,
        literal: cli.literal,
    };
    match cli.command {
        Command::Solve => commands::solve(&ctx),
        Command::Diagnose => commands::diagnose(&ctx),
        Command::Sweep => commands::sweep(&ctx, cli.parallel),
        Command::Verify => commands::verify(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    };
    ExitCode::from(code as u8)
}
