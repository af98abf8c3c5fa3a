use std::io;

use serde::Serialize;

/// Failure of a command. Input problems exit with 2, everything else with 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] moran_core::Error),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Input { path: String, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: io::Error },
    #[error("thread pool: {0}")]
    Pool(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Model(e) => e.kind(),
            CliError::Parse(_) => "ParseError",
            CliError::Usage(_) => "UsageError",
            CliError::Input { .. } => "InputError",
            CliError::Output { .. } => "IoError",
            CliError::Pool(_) => "PoolError",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(e) if !e.is_input_error() => 1,
            CliError::Model(_) | CliError::Parse(_) | CliError::Usage(_) | CliError::Input { .. } => 2,
            CliError::Output { .. } | CliError::Pool(_) => 1,
        }
    }

    pub fn to_json(&self) -> ErrorOutput {
        ErrorOutput {
            error: ErrorBody {
                kind: self.kind().to_string(),
                message: self.to_string(),
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorOutput {
    pub error: ErrorBody,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}
