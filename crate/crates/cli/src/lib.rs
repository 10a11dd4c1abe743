//! Command-line front end for the `sea-core` toolkit: run configuration
//! parsing, per-subcommand drivers and the datasheet comparison report.

pub mod commands;
pub mod config;
pub mod output;
pub mod report;

pub use commands::{CommandError, Context, Outcome};
pub use config::{parse_config, ConfigError, RunConfig};
pub use report::{run_report, GoldenRecord, Report, Source, Tolerance};
