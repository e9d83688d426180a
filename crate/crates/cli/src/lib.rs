//! The `weyllab` command line: argument surface, per-command drivers, the
//! JSON result schema and the bound ledger.

pub mod args;
pub mod commands;
pub mod parse;
pub mod report;
pub mod suite;

use std::time::Instant;

pub use args::{Cli, Command, Format};
pub use commands::Output;
pub use report::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] weyllab::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for anything the user can fix by changing the invocation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Core(weyllab::Error::InvalidInput(_) | weyllab::Error::Parse { .. }) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

/// Exit status when a suite bound fails.
pub const EXIT_VIOLATION: i32 = 3;

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let start = Instant::now();
    let mut out = match &cli.command {
        Command::Eval(a) => commands::eval(a)?,
        Command::Levelsets(a) => commands::levelsets(a)?,
        Command::Incidence(a) => commands::incidence(a)?,
        Command::Kernel(a) => commands::kernel(a)?,
        Command::Weights(a) => commands::weights(a)?,
        Command::Counterexample(a) => commands::counterexample(a)?,
        Command::Suite(a) => suite::run(a)?,
        Command::Rationals(a) => commands::rationals(a)?,
    };
    if cli.format == Format::Csv && out.csv.is_none() {
        return Err(CliError::Invalid(format!("{} has no csv output", cli.command.name())));
    }
    out.report.wall_time = start.elapsed().as_secs_f64();
    Ok(out)
}

/// The primary artifact in the requested format.
pub fn render(cli: &Cli, out: &Output) -> String {
    match cli.format {
        Format::Json => out.report.to_json(),
        Format::Csv => out.csv.clone().unwrap_or_default(),
    }
}
