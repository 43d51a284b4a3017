//! Command-line front end for `qmarkov`.
//!
//! [`run`] parses arguments, executes one subcommand and writes
//! `report.json` into the output directory. Diagnostics go to standard
//! error; nothing is printed to standard output except help and version.

pub mod args;
pub mod commands;
pub mod error;
pub mod format;
pub mod output;
pub mod report;
pub mod series;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Context;
pub use error::CliError;
use report::Report;

/// Name of the report file inside the output directory.
pub const REPORT_FILE: &str = "report.json";

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Analyze(_) => "analyze",
        Command::SteadyState(_) => "steady-state",
        Command::Simulate(_) => "simulate",
        Command::CheckLyapunov(_) => "check-lyapunov",
        Command::CheckLasalle(_) => "check-lasalle",
        Command::Synthesize(_) => "synthesize",
        Command::ProbeInvariantSet(_) => "probe-invariant-set",
    }
}

/// Execute a parsed command line, returning the exit status.
pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    let g = &cli.global;
    if !(g.tol.is_finite() && g.tol >= 0.0) {
        return Err(CliError::Usage(format!("--tol must be a nonnegative number, got {}", g.tol)));
    }
    std::fs::create_dir_all(&g.out).map_err(|source| CliError::Write {
        path: g.out.clone(),
        source,
    })?;
    let ctx = Context { global: g };
    let mut report = Report::new(command_name(&cli.command));
    report.setting("seed", g.seed);
    report.setting("tol", g.tol);
    report.setting("strict", g.strict);
    report.setting("format", format!("{:?}", g.format).to_lowercase());
    match &cli.command {
        Command::Analyze(a) => commands::analyze(&ctx, a, &mut report)?,
        Command::SteadyState(a) => commands::steady_state(&ctx, a, &mut report)?,
        Command::Simulate(a) => commands::simulate(&ctx, a, &mut report)?,
        Command::CheckLyapunov(a) => commands::check_lyapunov_cmd(&ctx, a, &mut report)?,
        Command::CheckLasalle(a) => commands::check_lasalle(&ctx, a, &mut report)?,
        Command::Synthesize(a) => commands::synthesize(&ctx, a, &mut report)?,
        Command::ProbeInvariantSet(a) => commands::probe(&ctx, a, &mut report)?,
    }
    let code = report.finish(g.strict);
    let path = g.out.join(REPORT_FILE);
    output::write_atomic(&path, report.to_json().as_bytes()).map_err(|source| CliError::Write { path, source })?;
    for c in &report.checks {
        eprintln!("{}: {}", c.name, c.verdict);
    }
    Ok(code)
}

/// Parse `argv` (program name first) and run.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => error::EXIT_USAGE,
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qmarkov: {e}");
            e.exit_code()
        }
    }
}
