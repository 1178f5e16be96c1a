//! Tokenizers for natural-language and code text.

use crate::{parse_code, Language, Result};

/// Lowercased word and punctuation tokens for natural-language metrics.
///
/// Runs of alphanumerics (plus `_`) form one token; every other non-space character is
/// its own token.
pub fn nl_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() || ch == '_' {
            word.extend(ch.to_lowercase());
        } else {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            if !ch.is_whitespace() {
                out.push(ch.to_string());
            }
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

pub fn whitespace_tokens(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Lexer tokens of a code snippet, comments excluded.
pub fn code_tokens(source: &str, language: Language) -> Result<Vec<String>> {
    let tree = parse_code(source, language)?;
    Ok(tree.tokens().into_iter().map(str::to_string).collect())
}
