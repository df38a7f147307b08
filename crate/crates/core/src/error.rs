use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = EdaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum EdaError {
    #[error("invalid order-statistic parameters: {0}")]
    InvalidParams(String),

    #[error("median of an empty list")]
    EmptyInput,

    #[error("at least 2 peers are required, got {0}")]
    TooFewPeers(usize),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("duplicate transaction index {0}")]
    DuplicateTransaction(u64),

    #[error("nothing to write: history is empty")]
    EmptyHistory,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl EdaError {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        EdaError::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        EdaError::Io {
            path: path.into(),
            source,
        }
    }
}
