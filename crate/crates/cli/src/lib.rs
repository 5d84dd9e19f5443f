//! Command-line front end: CSV ingestion, seeded synthesis and JSON reports.
//!
//! Every command prints one [`RunReport`] as JSON. Exit codes are 0 on
//! success (a test that fails to reject is a success), 1 for usage errors,
//! 2 for unreadable or malformed data and 3 for numeric-domain failures.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, Command};
use crate::commands::Output;
pub use crate::error::{CliError, CliResult};
pub use crate::report::RunReport;

pub fn execute(cli: &Cli) -> CliResult<Output> {
    let deg = cli.degrees;
    let body = || match &cli.command {
        Command::Synth(a) => commands::synth(a, deg),
        Command::Test(a) => commands::test(a, deg),
        Command::Frame(c) => commands::frame(c, deg),
        Command::Order(a) => commands::order(a, deg),
        Command::Fit(a) => commands::fit(a, deg),
    };
    match cli.threads {
        None => body(),
        Some(0) => Err(error::usage("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| error::usage(format!("cannot start {t} threads: {e}")))?
            .install(body),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok(Output { report, stdout_csv }) => {
            let json = report.to_json();
            let written = match stdout_csv {
                Some(csv) => stdout
                    .write_all(csv.as_bytes())
                    .and_then(|_| stderr.write_all(json.as_bytes())),
                None => stdout.write_all(json.as_bytes()),
            };
            if written.is_err() {
                return 2;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
