//! Experiment driver for the `slc` binary: configuration files, field
//! persistence and the train/test/sweep/reproduce commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod field_file;

pub use commands::{run, Command, Overrides, Outcome};
pub use config::ExperimentConfig;
pub use error::{CliError, ExitCode};
pub use field_file::FieldFile;
