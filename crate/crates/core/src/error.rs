use std::path::PathBuf;

use codeprompt_llm::LlmError;
use codeprompt_metrics::MetricError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("optimization failed: {0}")]
    Optimization(String),
    /// Some items failed; `failed` names them, `message` carries the first cause.
    #[error("{} item(s) failed ({}): {message}", failed.len(), failed.join(", "))]
    Partial { failed: Vec<String>, message: String },
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CoreError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
