//! `causalfire` command-line tool.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 structure learning did not
//! converge, 4 schema or data error.

mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let run = &cli.run;
    let result = match &cli.command {
        Command::Summarize => commands::summarize(run),
        Command::Discover(a) => commands::discover(run, a),
        Command::Study(a) => commands::study(run, a),
        Command::Compare(a) => commands::compare(run, a),
        Command::Synth(a) => commands::synth(run, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
