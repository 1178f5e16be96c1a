//! Ranked-retrieval metrics for API recommendation.

use crate::api::{normalize_api, ApiPrediction};
use crate::{MetricError, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum MatchMode {
    /// Normalized, case-sensitive exact match.
    #[default]
    Exact,
    CaseInsensitive,
}

impl MatchMode {
    fn matches(self, predicted: &str, truth: &str) -> bool {
        let (p, t) = (normalize_api(predicted), normalize_api(truth));
        match self {
            MatchMode::Exact => p == t,
            MatchMode::CaseInsensitive => p.eq_ignore_ascii_case(&t),
        }
    }
}

/// 1-based rank of the first relevant prediction.
pub fn first_relevant_rank<S: AsRef<str>>(
    prediction: &ApiPrediction,
    truth: &[S],
    mode: MatchMode,
) -> Option<usize> {
    prediction
        .apis
        .iter()
        .position(|p| truth.iter().any(|t| mode.matches(p, t.as_ref())))
        .map(|i| i + 1)
}

fn check_lengths<T>(predictions: &[ApiPrediction], truths: &[T]) -> Result<()> {
    if predictions.len() != truths.len() {
        return Err(MetricError::LengthMismatch {
            predictions: predictions.len(),
            truths: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(MetricError::Empty("predictions"));
    }
    Ok(())
}

/// Fraction of queries with at least one relevant API in the top `k`.
pub fn success_rate_at_k<S: AsRef<str>>(
    predictions: &[ApiPrediction],
    truths: &[Vec<S>],
    k: usize,
    mode: MatchMode,
) -> Result<f64> {
    if k == 0 {
        return Err(MetricError::ZeroK);
    }
    check_lengths(predictions, truths)?;
    let hits = predictions
        .iter()
        .zip(truths)
        .filter(|(p, t)| first_relevant_rank(p, t, mode).is_some_and(|r| r <= k))
        .count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// Mean over queries of `1 / rank` of the first relevant API (0 when absent).
pub fn mrr<S: AsRef<str>>(predictions: &[ApiPrediction], truths: &[Vec<S>], mode: MatchMode) -> Result<f64> {
    check_lengths(predictions, truths)?;
    let total: f64 = predictions
        .iter()
        .zip(truths)
        .map(|(p, t)| first_relevant_rank(p, t, mode).map_or(0.0, |r| 1.0 / r as f64))
        .sum();
    Ok(total / predictions.len() as f64)
}
