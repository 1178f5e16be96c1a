//! Brute-force reference implementations used to check the metric engine.
//!
//! Nothing here calls into the library's scoring code; only the parser is shared.
#![allow(dead_code)]

use codeprompt_metrics::syntax::SyntaxTree;

pub mod suites;

/// Occurrences of `gram` in `tokens`, by linear scan.
fn occurrences(tokens: &[&str], gram: &[&str]) -> usize {
    if gram.len() > tokens.len() {
        return 0;
    }
    (0..=tokens.len() - gram.len())
        .filter(|&i| &tokens[i..i + gram.len()] == gram)
        .count()
}

/// BLEU-4 by exhaustive n-gram tally, optional unigram weights.
pub fn bleu(cand: &[&str], refs: &[Vec<&str>], weight: &dyn Fn(&str) -> f64) -> f64 {
    if cand.is_empty() {
        return 0.0;
    }
    let mut product = 1.0f64;
    for n in 1..=4usize {
        let mut seen: Vec<&[&str]> = Vec::new();
        let mut matched = 0.0;
        let mut total = 0.0;
        if cand.len() >= n {
            for i in 0..=cand.len() - n {
                let g = &cand[i..i + n];
                if seen.contains(&g) {
                    continue;
                }
                seen.push(g);
                let c = occurrences(cand, g);
                let max_ref = refs.iter().map(|r| occurrences(r, g)).max().unwrap_or(0);
                let w = if n == 1 { weight(g[0]) } else { 1.0 };
                matched += w * c.min(max_ref) as f64;
                total += w * c as f64;
            }
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
        product *= p;
    }
    let c = cand.len() as f64;
    let mut best = refs[0].len();
    for r in refs {
        let (d_new, d_best) = ((r.len() as f64 - c).abs(), (best as f64 - c).abs());
        if d_new < d_best || (d_new == d_best && r.len() < best) {
            best = r.len();
        }
    }
    let r = best as f64;
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    bp * product.powf(0.25)
}

/// LCS length by enumerating every subsequence of `a` (|a| <= 16).
pub fn lcs_brute(a: &[&str], b: &[&str]) -> usize {
    assert!(a.len() <= 16, "oracle is exponential");
    let is_subseq = |s: &[&str]| {
        let mut it = b.iter();
        s.iter().all(|x| it.any(|y| y == x))
    };
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let n = mask.count_ones() as usize;
        if n <= best {
            continue;
        }
        let sub: Vec<&str> = (0..a.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| a[i])
            .collect();
        if is_subseq(&sub) {
            best = n;
        }
    }
    best
}

pub fn rouge_l(cand: &[&str], reference: &[&str]) -> f64 {
    let l = lcs_brute(cand, reference) as f64;
    if l == 0.0 {
        return 0.0;
    }
    let p = l / cand.len() as f64;
    let r = l / reference.len() as f64;
    let beta2 = 1.2f64 * 1.2;
    (1.0 + beta2) * p * r / (r + beta2 * p)
}

/// METEOR from an explicit, hand-written alignment.
pub fn meteor_from_alignment(pairs: &[(usize, usize)], cand_len: usize, ref_len: usize) -> f64 {
    let m = pairs.len() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let mut sorted = pairs.to_vec();
    sorted.sort();
    let mut chunks = 1.0;
    for w in sorted.windows(2) {
        if !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1) {
            chunks += 1.0;
        }
    }
    let p = m / cand_len as f64;
    let r = m / ref_len as f64;
    let fmean = 10.0 * p * r / (r + 9.0 * p);
    fmean * (1.0 - 0.5 * (chunks / m).powi(3))
}

fn sexp(tree: &SyntaxTree, id: usize) -> String {
    let node = tree.node(id);
    let mut s = String::from("(");
    s.push_str(node.kind);
    for &c in &node.children {
        if tree.node(c).comment {
            continue;
        }
        s.push(' ');
        s.push_str(&sexp(tree, c));
    }
    s.push(')');
    s
}

/// Every countable subtree as a kind-only s-expression: non-root, non-leaf, non-comment.
pub fn enumerate_subtrees(tree: &SyntaxTree) -> Vec<String> {
    let mut out = Vec::new();
    for id in 0..tree.len() {
        let node = tree.node(id);
        if id == tree.root() || node.comment {
            continue;
        }
        if node.children.iter().all(|&c| tree.node(c).comment) {
            continue;
        }
        out.push(sexp(tree, id));
    }
    out
}

pub fn syntax_match(cand: &SyntaxTree, reference: &SyntaxTree) -> (usize, usize) {
    let refs = enumerate_subtrees(reference);
    let mut pool = enumerate_subtrees(cand);
    let mut matched = 0;
    for r in &refs {
        if let Some(i) = pool.iter().position(|c| c == r) {
            pool.remove(i);
            matched += 1;
        }
    }
    (matched, refs.len())
}

/// A hand-written def-use row: variable, def line, use line, comes-from?, sink.
#[derive(Debug, Clone, PartialEq)]
pub struct DefUse {
    pub var: String,
    pub def_line: usize,
    pub use_line: usize,
    pub comes_from: bool,
    pub sink: Option<String>,
}

pub fn du(var: &str, def_line: usize, use_line: usize, comes_from: bool, sink: Option<&str>) -> DefUse {
    DefUse {
        var: var.to_string(),
        def_line,
        use_line,
        comes_from,
        sink: sink.map(str::to_string),
    }
}

/// Dataflow match from two def-use tables (rows in use order).
pub fn dataflow_match(cand: &[DefUse], reference: &[DefUse]) -> f64 {
    fn id(n: &str, names: &mut Vec<String>) -> usize {
        if let Some(i) = names.iter().position(|x| x == n) {
            i
        } else {
            names.push(n.to_string());
            names.len() - 1
        }
    }
    fn keys(rows: &[DefUse]) -> Vec<(usize, bool, Option<usize>)> {
        let mut names: Vec<String> = Vec::new();
        rows.iter()
            .map(|r| {
                let v = id(&r.var, &mut names);
                let s = r.sink.as_deref().map(|s| id(s, &mut names));
                (v, r.comes_from, s)
            })
            .collect()
    }
    if reference.is_empty() {
        return if cand.is_empty() { 1.0 } else { 0.0 };
    }
    let refs = keys(reference);
    let mut pool = keys(cand);
    let mut matched = 0;
    for k in &refs {
        if let Some(i) = pool.iter().position(|c| c == k) {
            pool.remove(i);
            matched += 1;
        }
    }
    matched as f64 / refs.len() as f64
}

/// First-relevant rank by direct scan.
pub fn first_rank(pred: &[&str], truth: &[&str]) -> Option<usize> {
    for (i, p) in pred.iter().enumerate() {
        if truth.contains(p) {
            return Some(i + 1);
        }
    }
    None
}
