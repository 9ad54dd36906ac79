//! Front end of the `qconv` binary: shared JSON formats, run manifests,
//! rayon drivers and the subcommands themselves.

pub mod cli;
pub mod commands;
pub mod error;
pub mod formats;
pub mod io;
pub mod manifest;
pub mod number;
pub mod parallel;
pub mod repro;

use std::time::Instant;

use clap::Parser;

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors are reported as one JSON line on stderr.
pub fn run(args: Vec<String>) -> i32 {
    let parsed = match cli::Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    parallel::init_threads();
    let start = Instant::now();
    let mut ledger = io::Ledger::default();
    let result = commands::dispatch(parsed.command, &mut ledger)
        .and_then(|_| manifest::write_manifests(&args, &ledger, start.elapsed()).map(|_| ()));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
