#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod exit;
mod report;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::exit::CliError;

const THREADS_VAR: &str = "MEMDECAY_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        CliError::Usage(format!(
            "{THREADS_VAR} must be a non-negative integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Generate(a) => commands::run_generate(a),
        Command::Analyze(a) => commands::run_analyze(a),
        Command::Bound(a) => commands::run_bound(a),
        Command::Verify(a) => commands::run_verify(a),
        Command::Invert(a) => commands::run_invert(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("memdecay: {e}");
            ExitCode::from(e.code())
        }
    }
}
