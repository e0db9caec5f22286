//! Configuration parsing and command execution behind the `cmlwealth` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_config_with, Command, RunConfig, Scalar};
pub use run::run;
