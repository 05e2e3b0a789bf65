//! Library side of the `gremk` command-line tool: configuration parsing and
//! the four subcommands. `main.rs` only parses flags and maps errors to exit
//! codes.

pub mod commands;
pub mod config;

use std::fmt;

pub use commands::{cmd_classify, cmd_env, cmd_simulate, cmd_verify, Outcome};
pub use config::{parse_checks, RunConfig, ScheduleSpec, ALL_CHECKS};

/// Exit code for a run where every selected check passed or was inconclusive.
pub const EXIT_OK: i32 = 0;
/// At least one check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Bad flags, config or input file.
pub const EXIT_USAGE: i32 = 2;
/// A node or event budget was exhausted.
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Core(gremk::error::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(gremk::error::Error::BudgetExceeded(_)) => EXIT_BUDGET,
            _ => EXIT_USAGE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gremk::error::Error> for CliError {
    fn from(e: gremk::error::Error) -> Self {
        CliError::Core(e)
    }
}
