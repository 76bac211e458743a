//! `qfi` command-line driver: reads a JSON run configuration, evaluates the
//! requested scenario (optionally over a one-parameter sweep) and writes
//! plot-ready CSV or JSON.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
//! 4 I/O failure. Failures also print a one-line JSON error record on stderr.

// `!(x <= tol)` rejects NaN as well as large values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod custom;
pub mod error;
pub mod output;
pub mod scenarios;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

pub use commands::Options;
pub use config::{Format, RunConfig, ScenarioKind};
pub use custom::{load_custom, save_custom};
pub use error::{CliError, CliResult, ErrorKind};

#[derive(Debug, Parser)]
#[command(
    name = "qfi",
    version,
    about = "Quantum Fisher information under reference-frame noise"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every sweep point and write one record per point.
    Run(Options),
    /// Audit the loss conditions of a single-point configuration.
    Check(Options),
    /// Optimize the reference-frame state of the qubit-plus-oscillator model.
    Optimize(Options),
    /// Validate a configuration without evaluating it.
    Load(Options),
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Run(o) => commands::run(o),
        Command::Check(o) => commands::check(o),
        Command::Optimize(o) => commands::optimize(o),
        Command::Load(o) => commands::load(o),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            if e.use_stderr() {
                eprintln!("{}", CliError::parse(e.kind().to_string()).record());
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.record());
            e.exit_code()
        }
    }
}
