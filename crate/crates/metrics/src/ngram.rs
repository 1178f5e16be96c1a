//! BLEU-4 and its keyword-weighted variant.
//!
//! Modified n-gram precision is clipped by the maximum count of each n-gram over the
//! references. Higher-order precisions (n >= 2) whose clipped match count is zero are
//! smoothed to `1 / (total + 1)`; unigram precision is never smoothed, so a candidate
//! sharing no unigram with any reference scores exactly 0. The brevity penalty uses the
//! reference length closest to the candidate length (shorter wins ties).

use std::collections::HashMap;
use std::hash::Hash;

pub const MAX_ORDER: usize = 4;

pub(crate) fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for w in tokens.windows(n) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

fn max_ref_counts<T: Eq + Hash>(references: &[Vec<T>], n: usize) -> HashMap<&[T], usize> {
    let mut max_counts: HashMap<&[T], usize> = HashMap::new();
    for r in references {
        for (g, c) in ngram_counts(r, n) {
            let e = max_counts.entry(g).or_insert(0);
            *e = (*e).max(c);
        }
    }
    max_counts
}

pub(crate) fn closest_ref_len<T>(cand_len: usize, references: &[Vec<T>]) -> usize {
    references
        .iter()
        .map(Vec::len)
        .min_by_key(|&r| (r.abs_diff(cand_len), r))
        .unwrap_or(0)
}

pub(crate) fn brevity_penalty(cand_len: usize, ref_len: usize) -> f64 {
    if cand_len == 0 {
        0.0
    } else if cand_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    }
}

fn weighted_bleu_impl<T, W>(candidate: &[T], references: &[Vec<T>], unigram_weight: W) -> f64
where
    T: Eq + Hash,
    W: Fn(&T) -> f64,
{
    if candidate.is_empty() || references.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=MAX_ORDER {
        let cand = ngram_counts(candidate, n);
        let refs = max_ref_counts(references, n);
        let (mut matched, mut total) = (0.0, 0.0);
        for (g, &c) in &cand {
            let w = if n == 1 { unigram_weight(&g[0]) } else { 1.0 };
            let clip = c.min(refs.get(g).copied().unwrap_or(0));
            matched += w * clip as f64;
            total += w * c as f64;
        }
        let p = if n == 1 {
            if total == 0.0 {
                0.0
            } else {
                matched / total
            }
        } else if matched == 0.0 {
            1.0 / (total + 1.0)
        } else {
            matched / total
        };
        if p <= 0.0 {
            return 0.0;
        }
        log_sum += p.ln() / MAX_ORDER as f64;
    }
    let bp = brevity_penalty(candidate.len(), closest_ref_len(candidate.len(), references));
    (bp * log_sum.exp()).clamp(0.0, 1.0)
}

/// Sentence-level BLEU-4 with uniform weights.
pub fn bleu4<T: Eq + Hash>(candidate: &[T], references: &[Vec<T>]) -> f64 {
    weighted_bleu_impl(candidate, references, |_| 1.0)
}

/// BLEU-4 whose unigram precision weights each candidate token by `unigram_weight`.
///
/// CodeBLEU uses this with language keywords weighted above ordinary tokens.
pub fn weighted_bleu4<T, W>(candidate: &[T], references: &[Vec<T>], unigram_weight: W) -> f64
where
    T: Eq + Hash,
    W: Fn(&T) -> f64,
{
    weighted_bleu_impl(candidate, references, unigram_weight)
}
