//! Command-line front end for the `vkde` library.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod svg;

use std::ffi::OsString;

use clap::Parser;

use config::{Cli, Command};
use error::CliError;

/// Parses `argv`, runs the command and returns the process exit code.
///
/// `VKDE_THREADS` caps the worker pool when set.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = std::env::var("VKDE_THREADS").ok().and_then(|s| s.parse().ok()) {
        vkde::exec::set_thread_cap(t);
    }
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Estimate(a) => commands::estimate(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Bandwidth(a) => commands::bandwidth(a),
        Command::Diagnose(a) => commands::diagnose(a),
        Command::Moments(a) => commands::moments(a),
    }
}
