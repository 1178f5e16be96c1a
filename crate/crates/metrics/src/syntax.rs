//! Concrete syntax trees for Java and Python.
//!
//! Parsing is backed by the bundled tree-sitter grammars. The tree-sitter tree is copied
//! into an owned arena so downstream metrics never touch FFI types. String and character
//! literals are kept as single leaves, which makes leaf order equal to the lexer's
//! token stream.

use tree_sitter::{Node as TsNode, Parser};

use crate::{Language, MetricError, Result};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxNode {
    pub kind: &'static str,
    pub named: bool,
    /// Field name under which this node hangs off its parent, e.g. `left`.
    pub field: Option<&'static str>,
    pub start: usize,
    pub end: usize,
    /// 1-based line of the first byte.
    pub line: usize,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// `ERROR` or `MISSING` node inserted by error recovery.
    pub error: bool,
    pub comment: bool,
}

impl SyntaxNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SyntaxTree {
    language: Language,
    source: String,
    nodes: Vec<SyntaxNode>,
    degraded: bool,
}

const ATOMIC_KINDS: &[&str] = &[
    // python
    "string",
    "concatenated_string",
    // java
    "string_literal",
    "character_literal",
    "text_block",
];

/// Parse `source` into a full-fidelity syntax tree.
///
/// Syntax errors never fail the call: error-recovery nodes are kept in the tree and the
/// tree is flagged [`SyntaxTree::is_degraded`].
pub fn parse_code(source: &str, language: Language) -> Result<SyntaxTree> {
    let mut parser = Parser::new();
    let grammar = match language {
        Language::Java => tree_sitter_java::LANGUAGE.into(),
        Language::Python => tree_sitter_python::LANGUAGE.into(),
    };
    parser
        .set_language(&grammar)
        .map_err(|e| MetricError::Parser(e.to_string()))?;
    let ts_tree = parser
        .parse(source, None)
        .ok_or_else(|| MetricError::Parser("parse was cancelled".into()))?;

    let mut nodes = Vec::new();
    copy_node(ts_tree.root_node(), None, None, &mut nodes);
    let degraded = ts_tree.root_node().has_error() || nodes.iter().any(|n| n.error);
    Ok(SyntaxTree {
        language,
        source: source.to_string(),
        nodes,
        degraded,
    })
}

/// Parse a source string with a language given by name (`"java"`, `"python"`).
pub fn parse_code_named(source: &str, language: &str) -> Result<SyntaxTree> {
    parse_code(source, language.parse()?)
}

fn copy_node(
    node: TsNode<'_>,
    parent: Option<NodeId>,
    field: Option<&'static str>,
    out: &mut Vec<SyntaxNode>,
) -> NodeId {
    let id = out.len();
    let kind = node.kind();
    out.push(SyntaxNode {
        kind,
        named: node.is_named(),
        field,
        start: node.start_byte(),
        end: node.end_byte(),
        line: node.start_position().row + 1,
        parent,
        children: Vec::new(),
        error: node.is_error() || node.is_missing(),
        comment: kind.contains("comment"),
    });
    if ATOMIC_KINDS.contains(&kind) {
        return id;
    }
    let mut cursor = node.walk();
    if cursor.goto_first_child() {
        loop {
            let child = cursor.node();
            let child_field = cursor.field_name();
            let child_id = copy_node(child, Some(id), child_field, out);
            out[id].children.push(child_id);
            if !cursor.goto_next_sibling() {
                break;
            }
        }
    }
    id
}

impl SyntaxTree {
    pub fn language(&self) -> Language {
        self.language
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &SyntaxNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[SyntaxNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn text(&self, id: NodeId) -> &str {
        let n = &self.nodes[id];
        &self.source[n.start..n.end]
    }

    /// True when the parser had to recover from at least one syntax error.
    pub fn is_degraded(&self) -> bool {
        self.degraded
    }

    pub fn error_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.error).count()
    }

    /// Nodes in pre-order (the arena order).
    pub fn preorder(&self) -> impl Iterator<Item = NodeId> + '_ {
        0..self.nodes.len()
    }

    /// Leaf nodes in source order.
    pub fn leaves(&self) -> Vec<NodeId> {
        self.preorder().filter(|&i| self.nodes[i].is_leaf()).collect()
    }

    /// Lexer tokens: non-comment, non-empty leaf texts in source order.
    pub fn tokens(&self) -> Vec<&str> {
        self.leaves()
            .into_iter()
            .filter(|&i| !self.nodes[i].comment && self.nodes[i].end > self.nodes[i].start)
            .map(|i| self.text(i))
            .collect()
    }

    pub fn in_error_region(&self, id: NodeId) -> bool {
        let mut cur = Some(id);
        while let Some(i) = cur {
            if self.nodes[i].error {
                return true;
            }
            cur = self.nodes[i].parent;
        }
        false
    }

    pub fn child_by_field(&self, id: NodeId, field: &str) -> Option<NodeId> {
        self.nodes[id]
            .children
            .iter()
            .copied()
            .find(|&c| self.nodes[c].field == Some(field))
    }

    pub fn children_by_field<'a>(&'a self, id: NodeId, field: &'a str) -> impl Iterator<Item = NodeId> + 'a {
        self.nodes[id]
            .children
            .iter()
            .copied()
            .filter(move |&c| self.nodes[c].field == Some(field))
    }

    pub fn named_children(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes[id]
            .children
            .iter()
            .copied()
            .filter(|&c| self.nodes[c].named)
    }

    /// Rebuild the source from leaves and the whitespace between them.
    ///
    /// Returns `None` if some non-whitespace byte is not covered by a leaf.
    pub fn reconstruct(&self) -> Option<String> {
        let mut out = String::with_capacity(self.source.len());
        let mut pos = 0;
        for leaf in self.leaves() {
            let n = &self.nodes[leaf];
            if n.start < pos {
                continue;
            }
            let gap = &self.source[pos..n.start];
            if !gap.chars().all(char::is_whitespace) {
                return None;
            }
            out.push_str(gap);
            out.push_str(self.text(leaf));
            pos = n.end;
        }
        let tail = &self.source[pos..];
        if !tail.chars().all(char::is_whitespace) {
            return None;
        }
        out.push_str(tail);
        Some(out)
    }

    /// S-expression of kinds, handy in test failure messages.
    pub fn to_sexp(&self, id: NodeId) -> String {
        let n = &self.nodes[id];
        if n.children.is_empty() {
            return n.kind.to_string();
        }
        let inner: Vec<String> = n.children.iter().map(|&c| self.to_sexp(c)).collect();
        format!("({} {})", n.kind, inner.join(" "))
    }
}
