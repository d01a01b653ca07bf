//! Command-line front end. Every command writes a CSV document headed by a
//! `#`-prefixed manifest whose `args` line reproduces the output.
//!
//! Exit codes: 0 ok, 1 other failure, 2 usage, 3 some theoretical value is
//! `NA`, 4 degenerate simulation.

mod args;
mod commands;
mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::{Cli, Command};
pub use output::{fmt_num, fmt_pct, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NA: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Degenerate(String),
    Failure(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Degenerate(_) => EXIT_DEGENERATE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Degenerate(m) | CliError::Failure(m) => m,
        }
    }
}

/// Whether every requested theoretical value was available.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    NotAvailable,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code. The CSV goes to `stdout` unless `--output` is given.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let result = args::apply_config(&mut cli.command).and_then(|()| match &cli.command {
        Command::Theory(a) => commands::theory(a),
        Command::Curve(a) => commands::curve(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Scaling(a) => commands::scaling(a),
    });
    let (table, outcome) = match result {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            return e.exit_code();
        }
    };
    let text = table.render();
    let written = match table.output() {
        Some(path) => std::fs::write(path, text.as_bytes())
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(stderr, "error: {msg}");
        return EXIT_FAILURE;
    }
    match outcome {
        Outcome::Ok => EXIT_OK,
        Outcome::NotAvailable => EXIT_NA,
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
