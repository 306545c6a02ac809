//! Configuration, command line and output files.

pub mod cli;
pub mod config;
pub mod output;

pub use cli::run_command;
pub use config::{parse_config, print_config, Experiment, RunConfig};
