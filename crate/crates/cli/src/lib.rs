//! Command-line front end of the `rotdecoh` engine.
//!
//! Commands: `rate`, `ratio`, `grid`, `coeffs`, `oracle-check`. See
//! [`config`] for the keys and defaults.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, RunConfig};
pub use run::{render, run, CliError, ExitStatus};
