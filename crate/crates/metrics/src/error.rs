use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("unsupported language `{0}` (expected one of: java, python)")]
    UnsupportedLanguage(String),
    #[error("parser failure: {0}")]
    Parser(String),
    #[error("length mismatch: {predictions} predictions vs {truths} truth sets")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("k must be positive")]
    ZeroK,
}
