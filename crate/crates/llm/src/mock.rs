//! Scripted, deterministic language model.
//!
//! A script maps SHA-256 prompt hashes to fixed responses and adds ordered substring rules.
//! Lookup order for completions: exact hash, then the first rule carrying `text` whose
//! substrings all occur in the prompt. Scoring consults the hash entry (when its text is the
//! target), then the first rule carrying log-probabilities. Anything unscripted is a
//! permanent error in strict mode and a seeded pseudo-random answer otherwise.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::ensure_prompt;
use crate::{Completion, FinishReason, LanguageModel, LlmError, Result, SamplingParams, TokenLogprob};

pub fn prompt_hash(prompt: &str) -> String {
    let digest = Sha256::digest(prompt.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScriptedResponse {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_logprobs: Option<Vec<(String, f64)>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockRule {
    /// Every entry must occur in the prompt; empty matches all prompts.
    #[serde(default)]
    pub prompt_contains: Vec<String>,
    /// Restricts a scoring rule to targets containing this substring.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_contains: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_logprobs: Option<Vec<f64>>,
    /// Uniform per-token log-probability assigned to every whitespace token of the target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_logprob: Option<f64>,
}

impl MockRule {
    fn matches_prompt(&self, prompt: &str) -> bool {
        self.prompt_contains.iter().all(|s| prompt.contains(s.as_str()))
    }

    fn scores(&self) -> bool {
        self.token_logprobs.is_some() || self.target_logprob.is_some()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MockScript {
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_name: Option<String>,
    #[serde(default)]
    pub responses: BTreeMap<String, ScriptedResponse>,
    #[serde(default)]
    pub rules: Vec<MockRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_text: Option<String>,
}

impl MockScript {
    pub fn strict() -> Self {
        MockScript {
            strict: true,
            ..Default::default()
        }
    }

    pub fn respond(mut self, prompt: &str, text: impl Into<String>) -> Self {
        self.responses.insert(
            prompt_hash(prompt),
            ScriptedResponse {
                text: text.into(),
                token_logprobs: None,
            },
        );
        self
    }

    pub fn respond_with_logprobs(mut self, prompt: &str, tokens: &[(&str, f64)]) -> Self {
        let text = tokens.iter().map(|(t, _)| *t).collect::<Vec<_>>().join(" ");
        self.responses.insert(
            prompt_hash(prompt),
            ScriptedResponse {
                text,
                token_logprobs: Some(tokens.iter().map(|(t, l)| (t.to_string(), *l)).collect()),
            },
        );
        self
    }

    pub fn rule(mut self, rule: MockRule) -> Self {
        self.rules.push(rule);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |x: f64| !x.is_finite() || x > 0.0;
        for (key, r) in &self.responses {
            if key.len() != 64 || !key.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(LlmError::Config(format!(
                    "mock response key {key:?} is not a SHA-256 hex digest"
                )));
            }
            if let Some(lp) = &r.token_logprobs {
                if lp.iter().any(|(_, x)| bad(*x)) {
                    return Err(LlmError::Config(format!(
                        "mock response {key} has a log-probability outside (-inf, 0]"
                    )));
                }
            }
        }
        for (i, rule) in self.rules.iter().enumerate() {
            let values = rule
                .token_logprobs
                .iter()
                .flatten()
                .chain(rule.target_logprob.iter());
            if values.copied().any(bad) {
                return Err(LlmError::Config(format!(
                    "mock rule {i} has a log-probability outside (-inf, 0]"
                )));
            }
            if rule.token_logprobs.as_ref().is_some_and(|v| v.is_empty()) {
                return Err(LlmError::Config(format!(
                    "mock rule {i} has empty token_logprobs"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct MockModel {
    script: MockScript,
    name: String,
    log: Mutex<Vec<String>>,
}

impl MockModel {
    pub fn new(script: MockScript) -> Result<Self> {
        script.validate()?;
        let name = script.model_name.clone().unwrap_or_else(|| "mock".to_string());
        Ok(MockModel {
            script,
            name,
            log: Mutex::new(Vec::new()),
        })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let script: MockScript =
            serde_json::from_str(json).map_err(|e| LlmError::Config(format!("invalid mock script: {e}")))?;
        Self::new(script)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Config(format!("cannot read mock script {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn script(&self) -> &MockScript {
        &self.script
    }

    /// Every prompt received by `complete`, in call order (order is nondeterministic under
    /// concurrent callers).
    pub fn prompts(&self) -> Vec<String> {
        self.log.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn unscripted(&self, what: &str, prompt: &str) -> LlmError {
        LlmError::Permanent {
            status: None,
            message: format!(
                "strict mock has no script for {what} (prompt hash {})",
                prompt_hash(prompt)
            ),
        }
    }

    fn pseudo(&self, parts: &[&[u8]]) -> u64 {
        let mut h = Sha256::new();
        h.update(self.script.seed.to_le_bytes());
        for p in parts {
            h.update((p.len() as u64).to_le_bytes());
            h.update(p);
        }
        let d = h.finalize();
        u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
    }
}

fn truncate_tokens(text: &str, max_tokens: usize) -> Option<&str> {
    let base = text.as_ptr() as usize;
    let mut words = text.split_whitespace();
    let last = words.by_ref().take(max_tokens).last()?;
    words.next()?;
    let end = last.as_ptr() as usize - base + last.len();
    Some(&text[..end])
}

impl LanguageModel for MockModel {
    fn model_name(&self) -> &str {
        &self.name
    }

    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Completion> {
        ensure_prompt(prompt)?;
        params.validate()?;
        self.log
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .push(prompt.to_string());
        let response = if let Some(r) = self.script.responses.get(&prompt_hash(prompt)) {
            r.clone()
        } else if let Some(text) = self
            .script
            .rules
            .iter()
            .find(|r| r.text.is_some() && r.target_contains.is_none() && r.matches_prompt(prompt))
            .and_then(|r| r.text.clone())
        {
            ScriptedResponse {
                text,
                token_logprobs: None,
            }
        } else if self.script.strict {
            return Err(self.unscripted("completion", prompt));
        } else {
            let text = self.script.fallback_text.clone().unwrap_or_else(|| {
                let seed = params.seed.unwrap_or(0).to_le_bytes();
                format!("mock-{:016x}", self.pseudo(&[prompt.as_bytes(), &seed]))
            });
            ScriptedResponse {
                text,
                token_logprobs: None,
            }
        };

        let max = params.max_tokens as usize;
        let (text, finish_reason) = match truncate_tokens(&response.text, max) {
            Some(cut) => (cut.to_string(), FinishReason::Length),
            None => (response.text.clone(), FinishReason::Stop),
        };
        let token_logprobs = response.token_logprobs.map(|v| {
            v.into_iter()
                .take(max)
                .map(|(token, logprob)| TokenLogprob { token, logprob })
                .collect()
        });
        Ok(Completion {
            text,
            token_logprobs,
            finish_reason,
        })
    }

    fn target_token_logprobs(&self, prompt: &str, target: &str) -> Result<Vec<f64>> {
        ensure_prompt(prompt)?;
        let n_tokens = target.split_whitespace().count().max(1);
        if let Some(r) = self.script.responses.get(&prompt_hash(prompt)) {
            if r.text.trim_end() == target {
                return Ok(match &r.token_logprobs {
                    Some(v) => v.iter().map(|(_, x)| *x).collect(),
                    None => vec![0.0; n_tokens],
                });
            }
        }
        let rule = self.script.rules.iter().find(|r| {
            r.scores()
                && r.matches_prompt(prompt)
                && r.target_contains.as_deref().is_none_or(|t| target.contains(t))
        });
        if let Some(rule) = rule {
            return Ok(match (&rule.token_logprobs, rule.target_logprob) {
                (Some(v), _) => v.clone(),
                (None, Some(x)) => vec![x; n_tokens],
                (None, None) => unreachable!("scoring rules carry log-probabilities"),
            });
        }
        if self.script.strict {
            return Err(self.unscripted("target scoring", prompt));
        }
        Ok(target
            .split_whitespace()
            .enumerate()
            .map(|(i, tok)| {
                let h = self.pseudo(&[prompt.as_bytes(), tok.as_bytes(), &(i as u64).to_le_bytes()]);
                -((h % 10_000) as f64) / 1_000.0
            })
            .collect())
    }
}
