//! Command-line front end for `dhom-core`: run configuration, trajectory and
//! seed export, and the property-check suites.

pub mod check;
pub mod commands;
pub mod config;

pub use check::{run_suite, CheckLine, Fixture, Suite};
pub use commands::{cmd_seeds, cmd_simulate, CliError};
pub use config::{parse_config, serialize_config, ConfigError, RunConfig};
