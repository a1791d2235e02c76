//! `fjlp`: plan, apply, verify and time fast `ℓ₂ → ℓ_p` embeddings.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 parameter error,
//! 3 I/O or format error. Reports go to standard output as JSON; a short
//! summary goes to standard error.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug)]
pub enum CliError {
    Param(String),
    Io(String),
}

impl From<fjlp_core::Error> for CliError {
    fn from(e: fjlp_core::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Param(e.to_string())
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Param("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Param(e.to_string()))?;
    }
    match &cli.command {
        Command::Plan(a) => commands::plan(a),
        Command::Embed(a) => commands::embed(a),
        Command::Verify { check } => commands::verify(check),
        Command::Bench(a) => commands::bench(a),
        Command::Lowerbound(a) => commands::lowerbound(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(CliError::Param(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
