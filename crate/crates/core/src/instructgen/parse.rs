use std::collections::HashSet;

use crate::candidate::normalize_whitespace;

const OPEN: &str = "<INS>";
const CLOSE: &str = "</INS>";

fn strip_list_marker(line: &str) -> &str {
    let t = line.trim_start();
    if let Some(rest) = t.strip_prefix(['-', '*', '•']) {
        return rest.trim_start();
    }
    let digits = t.bytes().take_while(u8::is_ascii_digit).count();
    if digits > 0 {
        if let Some(rest) = t[digits..].strip_prefix(['.', ')']) {
            return rest.trim_start();
        }
    }
    t
}

/// Instructions from a model response: `<INS>…</INS>` spans when present, otherwise one per
/// non-empty line (list markers removed). Whitespace-normalized, deduplicated, in order.
pub fn parse_candidates(response: &str) -> Vec<String> {
    let mut raw = Vec::new();
    let mut rest = response;
    while let Some(start) = rest.find(OPEN) {
        let after = &rest[start + OPEN.len()..];
        let end = after.find(CLOSE).unwrap_or(after.len());
        raw.push(after[..end].to_string());
        rest = &after[(end + CLOSE.len()).min(after.len())..];
    }
    if raw.is_empty() {
        raw = response
            .lines()
            .map(|l| strip_list_marker(l).to_string())
            .collect();
    }
    let mut seen = HashSet::new();
    raw.iter()
        .map(|s| normalize_whitespace(s))
        .filter(|s| !s.is_empty() && seen.insert(s.clone()))
        .collect()
}
