//! `cssm`: build an index, rank, evaluate, explain and sweep.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod args;
mod commands;
mod sweep;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};

/// Bad or missing flags, or an invalid parameter value.
#[derive(Debug)]
pub struct UsageError(pub String);

pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<cssm_core::Error> for Failure {
    fn from(e: cssm_core::Error) -> Self {
        Failure::Data(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{}", args::Cli::command().render_usage());
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
