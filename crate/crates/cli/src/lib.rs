//! Library side of the `edbsw` command-line tool: image I/O, run manifests,
//! CSV reports and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod error;
pub mod filters;
pub mod io;
pub mod manifest;
pub mod report;

pub use error::{CliError, CliResult, EXIT_FILTER, EXIT_INPUT, EXIT_OK, EXIT_PIPELINE};
