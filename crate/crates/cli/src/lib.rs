//! Command-line driver for simulation, identification and diagnostics of
//! point sources in parabolic models.
//!
//! Exit codes: 0 success, 2 invalid input, 3 forward solver failure,
//! 4 identification failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod noise;

use args::{Cli, Command};
use clap::Parser;
use std::ffi::OsString;
use std::process::ExitCode;

pub fn run(cli: &Cli) -> error::CliResult<()> {
    match &cli.command {
        Command::Simulate(a) => commands::simulate::run(a),
        Command::Identify(a) => commands::identify::run(a),
        Command::Diagnose(a) => commands::diagnose::run(a),
        Command::ReproduceExample(a) => commands::reproduce::run(a),
    }
}

/// Parses `args` and runs the command, mapping failures to exit codes.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {}", e.stage, e.message);
            e.exit_code()
        }
    }
}
