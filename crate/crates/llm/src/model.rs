use serde::{Deserialize, Serialize};

use crate::{Completion, LlmError, Result, SamplingParams};

/// How per-token log-probabilities of a target collapse into one score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogprobAggregation {
    /// Mean per-token log-probability; removes length bias between candidates.
    #[default]
    Mean,
    Sum,
}

impl LogprobAggregation {
    pub fn apply(self, logprobs: &[f64]) -> f64 {
        let sum: f64 = logprobs.iter().sum();
        match self {
            LogprobAggregation::Mean => sum / logprobs.len() as f64,
            LogprobAggregation::Sum => sum,
        }
    }
}

pub trait LanguageModel: Send + Sync {
    fn model_name(&self) -> &str;

    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Completion>;

    /// Log-probabilities of each token of `target` when it follows `prompt`.
    ///
    /// `target` is already normalized by the caller (trailing whitespace removed).
    fn target_token_logprobs(&self, prompt: &str, target: &str) -> Result<Vec<f64>>;
}

pub fn ensure_prompt(prompt: &str) -> Result<()> {
    if prompt.trim().is_empty() {
        Err(LlmError::InvalidRequest("prompt must not be empty".into()))
    } else {
        Ok(())
    }
}

pub trait ScoreExt: LanguageModel {
    /// Aggregated log-probability of `target` given `prompt`; never above 0 for a backend
    /// that reports true log-probabilities.
    fn score_target_logprob(
        &self,
        prompt: &str,
        target: &str,
        aggregation: LogprobAggregation,
    ) -> Result<f64> {
        let target = target.trim_end();
        if target.is_empty() {
            return Err(LlmError::InvalidRequest("target must not be empty".into()));
        }
        let lps = self.target_token_logprobs(prompt, target)?;
        if lps.is_empty() {
            return Err(LlmError::Capability(format!(
                "{} returned no target log-probabilities",
                self.model_name()
            )));
        }
        if let Some(bad) = lps.iter().find(|x| !x.is_finite()) {
            return Err(LlmError::Permanent {
                status: None,
                message: format!("non-finite log-probability {bad}"),
            });
        }
        Ok(aggregation.apply(&lps))
    }
}

impl<T: LanguageModel + ?Sized> ScoreExt for T {}

impl<T: LanguageModel + ?Sized> LanguageModel for std::sync::Arc<T> {
    fn model_name(&self) -> &str {
        (**self).model_name()
    }
    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Completion> {
        (**self).complete(prompt, params)
    }
    fn target_token_logprobs(&self, prompt: &str, target: &str) -> Result<Vec<f64>> {
        (**self).target_token_logprobs(prompt, target)
    }
}

impl<T: LanguageModel + ?Sized> LanguageModel for &T {
    fn model_name(&self) -> &str {
        (**self).model_name()
    }
    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Completion> {
        (**self).complete(prompt, params)
    }
    fn target_token_logprobs(&self, prompt: &str, target: &str) -> Result<Vec<f64>> {
        (**self).target_token_logprobs(prompt, target)
    }
}
