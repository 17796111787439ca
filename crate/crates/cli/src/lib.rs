//! Experiment driver: configuration, per-job seeding, parallel scheduling
//! and CSV/JSON artifacts with run manifests.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod sched;

pub use args::Cli;
pub use commands::execute;
pub use error::{CliError, CliResult};

/// Runs a parsed command line.
pub fn run(cli: Cli) -> CliResult<manifest::Manifest> {
    let inv = cli.resolve()?;
    execute(&inv.config, &inv.out, inv.workers)
}
