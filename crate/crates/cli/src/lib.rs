//! Batch front end: configuration, dispatch and JSON reports.

pub mod commands;
pub mod config;
mod error;

pub use commands::{run, with_defaults, Outcome};
pub use config::{Initial, RunConfig, COMMANDS, PROFILE_ENV, SCHEMA};
pub use error::{CliError, ConfigError};
