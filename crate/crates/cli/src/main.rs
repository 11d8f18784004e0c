//! `qnet`: generate networks, compute epidemic thresholds, simulate SIS
//! dynamics and run configured experiments.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or config error,
//! 3 degenerate input, 4 capability exceeded.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use qnet_epidemic::Error;

use args::{Cli, Command};

/// A failed command: message for stderr and the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) | Error::MalformedFile { .. } | Error::NoConvergence { .. } => 1,
            Error::InvalidArgument(_) | Error::Config(_) => 2,
            Error::DegenerateGraph(_) | Error::InsufficientData(_) => 3,
            Error::TooLarge { .. } => 4,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Threshold(a) => commands::threshold(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Experiment(a) => commands::experiment(a),
        Command::ValidateConfig(a) => commands::validate_config(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
