//! Config ingestion, file formats and subcommands of the `lk` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::Status;
pub use config::{Run, RunConfig};
pub use error::CliError;
