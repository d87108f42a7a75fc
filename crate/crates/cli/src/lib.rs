//! Library half of the `densitylab` binary: configuration and commands.

pub mod config;
pub mod run;

pub use config::{ConfigError, RunConfig};
pub use run::{cmd_optimize, cmd_profile, cmd_verify, Failure};
