//! Benchmark and verification CLI for the neighbor-search library.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 verification
//! failure.

mod args;
mod commands;
mod dataset_spec;
mod error;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    let outcome = match cli.command {
        Command::Knn(args) => commands::cmd_knn(args),
        Command::Compare(args) => commands::cmd_compare(args),
        Command::Sweep(args) => commands::cmd_sweep(args),
        Command::Oracle(args) => commands::cmd_oracle(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
