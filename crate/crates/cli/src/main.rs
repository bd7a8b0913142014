//! `proxgn`: command-line front end for the proximal Gauss-Newton solver.
//!
//! Exit codes: 0 success; 1 usage or configuration error; 2 non-convergence,
//! failed verification, missing ground truth or another runtime failure;
//! 3 h-condition violated or majorant model unavailable.

mod args;
mod commands;
mod output;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;
use proxgn_core::Error;

use crate::args::{Cli, Command};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn gate(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::H3Violated(_) | Error::InvalidModel(_) => CliError::gate(message),
            Error::InvalidProblem(_)
            | Error::InvalidPenalty(_)
            | Error::InvalidConstants(_)
            | Error::DimensionMismatch { .. } => CliError::usage(message),
            _ => CliError::runtime(message),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PROXGN_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => commands::solve_cmd(a),
        Command::Certify(a) => commands::certify(a),
        Command::Verify(a) => commands::verify(a),
        Command::Catalog => commands::catalog_cmd(),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
