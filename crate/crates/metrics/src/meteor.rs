//! METEOR-lite: exact and Porter-stem unigram alignment, no synonym stage.
//!
//! Alignment runs in two stages. The exact stage aligns identical tokens, the stem stage
//! aligns remaining tokens whose Porter stems agree. Inside a stage, candidate tokens are
//! visited left to right and each one takes the free reference token that sits closest to
//! the slot right after the previous alignment (earliest position on ties). Both stages
//! reach the maximum number of matches for their key; the placement rule only decides
//! which of several equal tokens is used, which in turn fixes the chunk count.
//!
//! Score: `Fmean * (1 - 0.5 * (chunks / matches)^3)` where
//! `Fmean = 10 P R / (R + 9 P)`.

use std::collections::HashMap;

pub const RECALL_WEIGHT: f64 = 9.0;
pub const PENALTY_GAMMA: f64 = 0.5;
pub const PENALTY_BETA: f64 = 3.0;

/// One aligned `(candidate index, reference index)` pair.
pub type AlignedPair = (usize, usize);

pub fn stem(token: &str) -> String {
    porter_stemmer::stem(&token.to_lowercase())
}

fn align_stage(
    cand_keys: &[String],
    ref_keys: &[String],
    cand_used: &mut [bool],
    ref_used: &mut [bool],
    pairs: &mut Vec<AlignedPair>,
) {
    let mut free: HashMap<&str, Vec<usize>> = HashMap::new();
    for (j, k) in ref_keys.iter().enumerate() {
        if !ref_used[j] {
            free.entry(k.as_str()).or_default().push(j);
        }
    }
    for i in 0..cand_keys.len() {
        if cand_used[i] {
            continue;
        }
        let Some(slots) = free.get_mut(cand_keys[i].as_str()) else {
            continue;
        };
        if slots.is_empty() {
            continue;
        }
        let expected = pairs
            .iter()
            .filter(|(c, _)| *c < i)
            .max_by_key(|(c, _)| *c)
            .map(|(_, r)| r + 1)
            .unwrap_or(0);
        let (pos, &j) = slots
            .iter()
            .enumerate()
            .min_by_key(|(_, &j)| (j.abs_diff(expected), j))
            .expect("non-empty");
        slots.remove(pos);
        cand_used[i] = true;
        ref_used[j] = true;
        pairs.push((i, j));
    }
}

/// Alignment produced by the exact and stem stages, sorted by candidate index.
pub fn align<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> Vec<AlignedPair> {
    let mut cand_used = vec![false; candidate.len()];
    let mut ref_used = vec![false; reference.len()];
    let mut pairs = Vec::new();

    let exact_c: Vec<String> = candidate.iter().map(|t| t.as_ref().to_string()).collect();
    let exact_r: Vec<String> = reference.iter().map(|t| t.as_ref().to_string()).collect();
    align_stage(&exact_c, &exact_r, &mut cand_used, &mut ref_used, &mut pairs);

    let stem_c: Vec<String> = candidate.iter().map(|t| stem(t.as_ref())).collect();
    let stem_r: Vec<String> = reference.iter().map(|t| stem(t.as_ref())).collect();
    align_stage(&stem_c, &stem_r, &mut cand_used, &mut ref_used, &mut pairs);

    pairs.sort_unstable();
    pairs
}

/// Number of maximal runs of pairs contiguous in both candidate and reference.
pub fn count_chunks(pairs: &[AlignedPair]) -> usize {
    let mut chunks = 0;
    let mut prev: Option<AlignedPair> = None;
    for &(c, r) in pairs {
        match prev {
            Some((pc, pr)) if c == pc + 1 && r == pr + 1 => {}
            _ => chunks += 1,
        }
        prev = Some((c, r));
    }
    chunks
}

/// Closed-form METEOR score from alignment statistics.
pub fn meteor_from_counts(matches: usize, chunks: usize, cand_len: usize, ref_len: usize) -> f64 {
    if matches == 0 || cand_len == 0 || ref_len == 0 {
        return 0.0;
    }
    let p = matches as f64 / cand_len as f64;
    let r = matches as f64 / ref_len as f64;
    let fmean = (1.0 + RECALL_WEIGHT) * p * r / (r + RECALL_WEIGHT * p);
    let penalty = PENALTY_GAMMA * (chunks as f64 / matches as f64).powf(PENALTY_BETA);
    (fmean * (1.0 - penalty)).clamp(0.0, 1.0)
}

pub fn meteor_lite<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> f64 {
    let pairs = align(candidate, reference);
    meteor_from_counts(
        pairs.len(),
        count_chunks(&pairs),
        candidate.len(),
        reference.len(),
    )
}
