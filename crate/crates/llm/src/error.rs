use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LlmError {
    /// Network failure, timeout or server-side error that persisted through all retries.
    #[error("transient provider failure after {attempts} attempt(s): {message}")]
    Transient { attempts: u32, message: String },
    /// Rejected by the provider (4xx) or by the strict mock; never retried.
    #[error("permanent provider error{}: {message}", status.map(|s| format!(" (HTTP {s})")).unwrap_or_default())]
    Permanent { status: Option<u16>, message: String },
    #[error("capability not supported: {0}")]
    Capability(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("configuration error: {0}")]
    Config(String),
}

impl LlmError {
    pub fn is_permanent(&self) -> bool {
        !matches!(self, LlmError::Transient { .. })
    }
}
