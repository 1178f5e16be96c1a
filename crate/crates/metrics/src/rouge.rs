//! ROUGE-L: longest-common-subsequence F-measure.

pub const DEFAULT_BETA: f64 = 1.2;

pub(crate) fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L F-measure with recall weight `beta` = 1.2.
pub fn rouge_l<T: PartialEq>(candidate: &[T], reference: &[T]) -> f64 {
    rouge_l_with_beta(candidate, reference, DEFAULT_BETA)
}

pub fn rouge_l_with_beta<T: PartialEq>(candidate: &[T], reference: &[T], beta: f64) -> f64 {
    let lcs = lcs_len(candidate, reference);
    if lcs == 0 {
        return 0.0;
    }
    let p = lcs as f64 / candidate.len() as f64;
    let r = lcs as f64 / reference.len() as f64;
    let b2 = beta * beta;
    ((1.0 + b2) * p * r / (r + b2 * p)).clamp(0.0, 1.0)
}
