//! CLI error taxonomy: validation failures exit with code 1, I/O failures
//! with code 2, and every I/O failure names the path involved.

use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io { path: PathBuf, context: String, source: std::io::Error },
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn io(path: impl AsRef<Path>, context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().to_path_buf(), context: context.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io { .. } => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "{msg}"),
            CliError::Io { path, context, source } => {
                write!(f, "{context} ({}): {source}", path.display())
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<help_core::models::ModelError> for CliError {
    fn from(e: help_core::models::ModelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<help_core::graph::GraphError> for CliError {
    fn from(e: help_core::graph::GraphError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<help_core::synthdata::SynthError> for CliError {
    fn from(e: help_core::synthdata::SynthError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<help_core::metrics::MetricsError> for CliError {
    fn from(e: help_core::metrics::MetricsError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<help_core::checkpoint::CheckpointError> for CliError {
    fn from(e: help_core::checkpoint::CheckpointError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<help_core::pca::PcaError> for CliError {
    fn from(e: help_core::pca::PcaError) -> Self {
        CliError::Validation(e.to_string())
    }
}
