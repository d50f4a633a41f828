//! Command implementations behind the `treeshap` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod render;

pub use commands::{cmd_compute, cmd_count, cmd_stream, cmd_verify, compute_report, VerifyOptions, VerifyReport};
pub use config::{MechanismName, OutputFormat, RunConfig};
pub use error::CliError;
