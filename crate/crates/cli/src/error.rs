use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ReadConfig { path: String, source: io::Error },
    #[error("invalid config {path}: {source}")]
    ParseConfig {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: io::Error },
    #[error(transparent)]
    Core(#[from] superint::Error),
}

impl CliError {
    /// 2 for runtime failures, 3 for anything the user must fix in the
    /// config or command line.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Write { .. } => 2,
            CliError::Core(e) if e.is_singular() => 2,
            CliError::Core(superint::Error::Overflow { .. } | superint::Error::NonFinite(_)) => 2,
            _ => 3,
        }
    }
}
