//! CodeBLEU: n-gram BLEU, keyword-weighted n-gram BLEU, syntax match and dataflow match.

use serde::{Deserialize, Serialize};

use crate::dataflow::{dataflow_match, extract_dataflow};
use crate::ngram::{bleu4, weighted_bleu4};
use crate::subtree::syntax_match;
use crate::{parse_code, Language, MetricError, Result};

/// Unigram weight of a language keyword relative to any other token.
pub const KEYWORD_WEIGHT: f64 = 4.0;

/// Mixing weights for (BLEU, weighted n-gram, syntax match, dataflow match).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Default for CodeBleuWeights {
    fn default() -> Self {
        CodeBleuWeights {
            alpha: 0.25,
            beta: 0.25,
            gamma: 0.25,
            delta: 0.25,
        }
    }
}

impl CodeBleuWeights {
    /// Nonnegative weights, renormalized to sum to one.
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let w = [alpha, beta, gamma, delta];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(MetricError::InvalidWeights(format!(
                "weights must be finite and nonnegative, got {w:?}"
            )));
        }
        let sum: f64 = w.iter().sum();
        if sum <= 0.0 {
            return Err(MetricError::InvalidWeights("weights sum to zero".into()));
        }
        Ok(CodeBleuWeights {
            alpha: alpha / sum,
            beta: beta / sum,
            gamma: gamma / sum,
            delta: delta / sum,
        })
    }

    pub fn sum(&self) -> f64 {
        self.alpha + self.beta + self.gamma + self.delta
    }
}

/// Component scores before mixing. `dataflow` is `None` when the reference has no
/// dataflow edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuComponents {
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub syntax: f64,
    pub dataflow: Option<f64>,
}

impl CodeBleuComponents {
    /// Weighted sum. Without a dataflow component the remaining weights are renormalized.
    pub fn combine(&self, w: &CodeBleuWeights) -> f64 {
        let partial = w.alpha * self.ngram + w.beta * self.weighted_ngram + w.gamma * self.syntax;
        match self.dataflow {
            Some(dm) => partial + w.delta * dm,
            None => {
                let rest = w.alpha + w.beta + w.gamma;
                if rest > 0.0 {
                    partial / rest
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuScore {
    pub score: f64,
    pub components: CodeBleuComponents,
    /// Dataflow match reported on its own. Equals `components.dataflow` when the reference
    /// has edges, otherwise follows the empty-reference convention of [`dataflow_match`].
    pub dataflow_match: f64,
    /// Provenance flags: `dataflow_dropped`, `candidate_parse_degraded`,
    /// `reference_parse_degraded`.
    pub flags: Vec<String>,
}

pub fn codebleu(
    candidate: &str,
    reference: &str,
    language: Language,
    weights: &CodeBleuWeights,
) -> Result<CodeBleuScore> {
    let cand_tree = parse_code(candidate, language)?;
    let ref_tree = parse_code(reference, language)?;

    let cand_tokens = cand_tree.tokens();
    let ref_tokens = vec![ref_tree.tokens()];
    let ngram = bleu4(&cand_tokens, &ref_tokens);
    let weighted_ngram = weighted_bleu4(&cand_tokens, &ref_tokens, |t| {
        if language.is_keyword(t) {
            KEYWORD_WEIGHT
        } else {
            1.0
        }
    });
    let syntax = syntax_match(&cand_tree, &ref_tree);
    let ref_edges = extract_dataflow(&ref_tree);
    let cand_edges = extract_dataflow(&cand_tree);

    let mut flags = Vec::new();
    let dataflow = if ref_edges.is_empty() {
        flags.push("dataflow_dropped".to_string());
        None
    } else {
        Some(dataflow_match(&cand_edges, &ref_edges))
    };
    if cand_tree.is_degraded() {
        flags.push("candidate_parse_degraded".to_string());
    }
    if ref_tree.is_degraded() {
        flags.push("reference_parse_degraded".to_string());
    }
    let components = CodeBleuComponents {
        ngram,
        weighted_ngram,
        syntax,
        dataflow,
    };
    Ok(CodeBleuScore {
        score: components.combine(weights).clamp(0.0, 1.0),
        components,
        dataflow_match: dataflow_match(&cand_edges, &ref_edges),
        flags,
    })
}
