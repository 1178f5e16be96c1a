//! API mention extraction from free-form model output.

use serde::{Deserialize, Serialize};

pub const DEFAULT_PREDICTION_CAP: usize = 10;

/// Ranked, deduplicated API names (dotted paths).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiPrediction {
    pub apis: Vec<String>,
}

impl ApiPrediction {
    /// Normalizes, deduplicates (first occurrence wins) and truncates to `cap`.
    pub fn from_ranked<I, S>(items: I, cap: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut apis: Vec<String> = Vec::new();
        for item in items {
            let n = normalize_api(item.as_ref());
            if n.is_empty() || apis.contains(&n) {
                continue;
            }
            if apis.len() == cap {
                break;
            }
            apis.push(n);
        }
        ApiPrediction { apis }
    }

    pub fn len(&self) -> usize {
        self.apis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.apis.is_empty()
    }
}

const TRAILING_PUNCT: &[char] = &['.', ',', ';', ':', '!', '?', ')', ']', '}', '\'', '"', '`'];
const LEADING_PUNCT: &[char] = &['(', '[', '{', '\'', '"', '`'];

/// Canonical form of an API mention: no argument list, `#` member separators become
/// dots, surrounding quotes and punctuation stripped. Idempotent.
pub fn normalize_api(raw: &str) -> String {
    let mut s = raw.trim();
    if let Some(i) = s.find('(') {
        s = &s[..i];
    }
    let s = s.replace('#', ".");
    s.trim()
        .trim_start_matches(LEADING_PUNCT)
        .trim_end_matches(TRAILING_PUNCT)
        .trim()
        .to_string()
}

const NOT_APIS: &[&str] = &["e.g", "i.e", "etc", "vs", "a.k.a"];

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

/// Dotted identifiers (`a.b`, `a.b.c`, `A#m`) in order of appearance.
fn dotted_identifiers(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let boundary = i == 0 || !(is_ident_char(chars[i - 1]) || chars[i - 1] == '.');
        if !(boundary && is_ident_start(chars[i])) {
            i += 1;
            continue;
        }
        let mut segments = Vec::new();
        let mut j = i;
        loop {
            let start = j;
            while j < chars.len() && is_ident_char(chars[j]) {
                j += 1;
            }
            segments.push(chars[start..j].iter().collect::<String>());
            let sep = j < chars.len() && (chars[j] == '.' || chars[j] == '#');
            if sep && j + 1 < chars.len() && is_ident_start(chars[j + 1]) {
                j += 1;
            } else {
                break;
            }
        }
        if segments.len() >= 2 {
            let joined = segments.join(".");
            if !NOT_APIS.contains(&joined.to_ascii_lowercase().as_str()) {
                out.push(joined);
            }
        }
        i = j.max(i + 1);
    }
    out
}

/// Ranked API prediction from a model response.
///
/// Numbered and bulleted lines, inline code spans and plain prose are all scanned in
/// document order; the first mention of each API fixes its rank.
pub fn extract_apis(model_output: &str) -> ApiPrediction {
    extract_apis_with_cap(model_output, DEFAULT_PREDICTION_CAP)
}

pub fn extract_apis_with_cap(model_output: &str, cap: usize) -> ApiPrediction {
    ApiPrediction::from_ranked(dotted_identifiers(model_output), cap)
}
