//! Instruction length accounting.

use std::fmt;
use std::str::FromStr;

use codeprompt_metrics::{nl_tokens, whitespace_tokens};
use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tokenizer {
    /// Maximal runs of non-whitespace.
    Whitespace,
    /// Alphanumeric words plus one token per punctuation character.
    WordPunct,
}

impl Tokenizer {
    pub const REGISTERED: [Tokenizer; 2] = [Tokenizer::Whitespace, Tokenizer::WordPunct];

    pub fn as_str(self) -> &'static str {
        match self {
            Tokenizer::Whitespace => "whitespace",
            Tokenizer::WordPunct => "word-punct",
        }
    }

    pub fn count(self, text: &str) -> usize {
        match self {
            Tokenizer::Whitespace => whitespace_tokens(text).len(),
            Tokenizer::WordPunct => nl_tokens(text).len(),
        }
    }
}

impl FromStr for Tokenizer {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        Tokenizer::REGISTERED
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| {
                CoreError::Config(format!(
                    "unknown tokenizer {s:?}; registered: {}",
                    Tokenizer::REGISTERED.map(|t| t.as_str()).join(", ")
                ))
            })
    }
}

impl fmt::Display for Tokenizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mean token count over `instructions`.
pub fn count_instruction_tokens<S: AsRef<str>>(instructions: &[S], tokenizer: &str) -> Result<f64> {
    let tok: Tokenizer = tokenizer.parse()?;
    if instructions.is_empty() {
        return Err(CoreError::Precondition("no instructions to count".into()));
    }
    let total: usize = instructions.iter().map(|s| tok.count(s.as_ref())).sum();
    Ok(total as f64 / instructions.len() as f64)
}
