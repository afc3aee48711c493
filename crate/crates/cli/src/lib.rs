//! Batch front end for the balanced-metric solver: configuration, initial
//! metrics, trace/result files and the `run` / `verify` commands.

pub mod config;
pub mod init;
pub mod output;
pub mod run;
pub mod verify;

pub use config::{InitSpec, OutputPaths, RunConfig};
pub use run::{run_command, run_config, ExitCode};
pub use verify::{verify_command, verify_config, CheckRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] balanced::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
