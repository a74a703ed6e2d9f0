//! Command-line driver for the qmean estimators.
//!
//! Exit codes: 0 success, 1 I/O failure or failed oracle check, 2 invalid
//! input, 3 runtime cap exceeded (restarts or phase unwrap window).

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use qmean::Error;

use args::{Cli, Command};
use commands::Status;

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::RestartCapExceeded(_) | Error::PhaseWindowExceeded { .. }) => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::EstimateSerial(a) => commands::estimate_serial(a),
        Command::EstimateEpr(a) => commands::estimate_epr(a),
        Command::EstimateDistributed(a) => commands::estimate_distributed(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::OracleCheck(a) => commands::oracle_check(a),
        Command::Baseline(a) => commands::baseline(a),
        Command::Ladder(a) => commands::ladder(a),
    };
    match result {
        Ok(Status::Passed) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => {
            eprintln!("qmean: oracle check failed");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("qmean: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
