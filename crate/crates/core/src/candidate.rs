use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateSource {
    Manual,
    Ape,
    Opro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateInstruction {
    pub text: String,
    /// Higher is better; `None` until evaluated, finite afterwards.
    pub score: Option<f64>,
    pub source: CandidateSource,
    pub iteration: u32,
}

impl CandidateInstruction {
    pub fn manual(text: impl Into<String>) -> Self {
        CandidateInstruction {
            text: text.into(),
            score: None,
            source: CandidateSource::Manual,
            iteration: 0,
        }
    }

    pub fn new(text: impl Into<String>, source: CandidateSource, iteration: u32) -> Self {
        CandidateInstruction {
            text: text.into(),
            score: None,
            source,
            iteration,
        }
    }

    pub fn scored(mut self, score: f64) -> Result<Self> {
        if !score.is_finite() {
            return Err(CoreError::InvalidInput(format!(
                "non-finite score {score} for instruction {:?}",
                self.text
            )));
        }
        self.score = Some(score);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.score.is_some_and(|s| !s.is_finite()) {
            return Err(CoreError::InvalidInput(format!(
                "non-finite score on {:?}",
                self.text
            )));
        }
        if self.source == CandidateSource::Manual && self.iteration != 0 {
            return Err(CoreError::InvalidInput(
                "manual instructions must have iteration 0".into(),
            ));
        }
        Ok(())
    }
}

/// Collapses all whitespace runs to one space and trims; the dedup key for candidates.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
