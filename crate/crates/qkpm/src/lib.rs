//! Std companion to `qkpm-core`: exact references, file formats,
//! run configuration and the command-line pipeline.

pub mod config;
pub mod io;
pub mod manifest;
pub mod oracle;
pub mod pipeline;

pub use config::RunConfig;

/// Errors surfaced by the driver, each with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qkpm_core::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    /// 3 for resource caps, 1 for filesystem trouble, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(qkpm_core::Error::Resource(_)) => 3,
            CliError::Io(_) => 1,
            _ => 2,
        }
    }
}
