//! Syntax match: the share of reference subtrees that reappear in the candidate.
//!
//! A subtree is identified by its shape: node kinds only, recursively, so identifier and
//! literal text never matter. Every non-leaf node except the root contributes one subtree;
//! the root is the whole compilation unit and would only match an identical file.
//! Comment nodes are ignored. Matching consumes the candidate multiset: a candidate subtree
//! can account for at most one reference occurrence.

use std::collections::HashMap;

use crate::syntax::{NodeId, SyntaxTree};

#[derive(Default)]
struct ShapeInterner {
    ids: HashMap<(&'static str, Vec<u32>), u32>,
}

impl ShapeInterner {
    fn intern(&mut self, kind: &'static str, children: Vec<u32>) -> u32 {
        let next = self.ids.len() as u32;
        *self.ids.entry((kind, children)).or_insert(next)
    }

    /// Shape ids of every countable subtree in `tree`, as a multiset.
    fn subtree_multiset(&mut self, tree: &SyntaxTree) -> HashMap<u32, usize> {
        let mut shape_of = vec![u32::MAX; tree.len()];
        let mut counts = HashMap::new();
        // Arena order is pre-order, so reverse order visits children before parents.
        for id in (0..tree.len()).rev() {
            let node = tree.node(id);
            if node.comment {
                continue;
            }
            let children: Vec<u32> = node
                .children
                .iter()
                .filter(|&&c| !tree.node(c).comment)
                .map(|&c| shape_of[c])
                .collect();
            let countable = !children.is_empty() && id != tree.root();
            shape_of[id] = self.intern(node.kind, children);
            if countable {
                *counts.entry(shape_of[id]).or_insert(0) += 1;
            }
        }
        counts
    }
}

/// Number of countable subtrees in a tree.
pub fn subtree_count(tree: &SyntaxTree) -> usize {
    ShapeInterner::default().subtree_multiset(tree).values().sum()
}

/// `(matched, total)` reference subtree counts.
pub fn syntax_match_counts(candidate: &SyntaxTree, reference: &SyntaxTree) -> (usize, usize) {
    let mut interner = ShapeInterner::default();
    let refs = interner.subtree_multiset(reference);
    let cands = interner.subtree_multiset(candidate);
    let total = refs.values().sum();
    let matched = refs
        .iter()
        .map(|(shape, &n)| n.min(cands.get(shape).copied().unwrap_or(0)))
        .sum();
    (matched, total)
}

/// Fraction of reference subtrees found in the candidate, in `[0, 1]`.
///
/// A reference without any countable subtree scores 1.0 against a candidate that also has
/// none, 0.0 otherwise.
pub fn syntax_match(candidate: &SyntaxTree, reference: &SyntaxTree) -> f64 {
    let (matched, total) = syntax_match_counts(candidate, reference);
    if total == 0 {
        return if subtree_count(candidate) == 0 { 1.0 } else { 0.0 };
    }
    matched as f64 / total as f64
}

/// Kind-only s-expression of the subtree rooted at `id`.
pub fn shape_sexp(tree: &SyntaxTree, id: NodeId) -> String {
    let node = tree.node(id);
    let kids: Vec<String> = node
        .children
        .iter()
        .filter(|&&c| !tree.node(c).comment)
        .map(|&c| shape_sexp(tree, c))
        .collect();
    if kids.is_empty() {
        node.kind.to_string()
    } else {
        format!("({} {})", node.kind, kids.join(" "))
    }
}
