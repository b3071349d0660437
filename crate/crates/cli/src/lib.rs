//! Batch front end: scenario files in, CSV tables and JSON reports out.

pub mod commands;
pub mod error;
pub mod output;
pub mod scenario;

pub use commands::{run, Command, Outcome, Overrides, RunOptions};
pub use error::{CliError, CliResult, ErrorKind, Location};
pub use scenario::{parse_scenario, parse_str, OutputSpec, ScenarioFile};
