//! Def-use dataflow edges and dataflow match.
//!
//! Extraction is a straight-line approximation: the tree is walked in program text order
//! (right-hand sides before the targets they assign), every variable use is linked to the
//! nearest preceding definition of the same name in the enclosing function, and control
//! flow is ignored. Each function, method or lambda starts an empty scope. Subtrees under
//! parser error nodes contribute nothing.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::syntax::{NodeId, SyntaxTree};
use crate::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    /// Ordinal of the identifier among the tree's leaves.
    pub token: usize,
    /// 1-based source line.
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Relation {
    /// The use is the whole value being assigned (`y = x`).
    ComesFrom,
    /// The use feeds a larger computation (`y = x + 1`, `f(x)`).
    ComputedFrom,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DataflowEdge {
    pub variable: String,
    pub def_position: Position,
    pub use_position: Position,
    pub relation: Relation,
    /// Variable assigned by the statement containing the use, if any.
    pub sink: Option<String>,
}

struct Walker<'t> {
    tree: &'t SyntaxTree,
    token_of: Vec<usize>,
    defs: HashMap<String, Position>,
    edges: Vec<DataflowEdge>,
}

/// Def-use edges of `tree`, ordered by use position.
pub fn extract_dataflow(tree: &SyntaxTree) -> Vec<DataflowEdge> {
    let mut token_of = vec![usize::MAX; tree.len()];
    for (ordinal, leaf) in tree.leaves().into_iter().enumerate() {
        token_of[leaf] = ordinal;
    }
    let mut w = Walker {
        tree,
        token_of,
        defs: HashMap::new(),
        edges: Vec::new(),
    };
    w.walk(tree.root(), None);
    w.edges.sort_by_key(|e| (e.use_position, e.def_position));
    w.edges
}

impl<'t> Walker<'t> {
    fn kind(&self, id: NodeId) -> &'static str {
        self.tree.node(id).kind
    }

    fn field(&self, id: NodeId, name: &str) -> Option<NodeId> {
        self.tree.child_by_field(id, name)
    }

    fn pos(&self, id: NodeId) -> Position {
        Position {
            token: self.token_of[id],
            line: self.tree.node(id).line,
        }
    }

    fn is_identifier(&self, id: NodeId) -> bool {
        self.kind(id) == "identifier"
    }

    fn children(&self, id: NodeId) -> Vec<NodeId> {
        self.tree.node(id).children.clone()
    }

    fn walk_children(&mut self, id: NodeId, sink: Option<&str>) {
        for c in self.children(id) {
            self.walk(c, sink);
        }
    }

    fn first_identifier(&self, id: NodeId) -> Option<String> {
        if self.is_identifier(id) {
            return Some(self.tree.text(id).to_string());
        }
        match self.kind(id) {
            "attribute" | "subscript" | "field_access" | "array_access" => None,
            _ => self
                .tree
                .node(id)
                .children
                .iter()
                .find_map(|&c| self.first_identifier(c)),
        }
    }

    fn walk(&mut self, id: NodeId, sink: Option<&str>) {
        let node = self.tree.node(id);
        if node.error || node.comment {
            return;
        }
        match self.tree.language() {
            Language::Python => self.walk_python(id, sink),
            Language::Java => self.walk_java(id, sink),
        }
    }

    fn with_fresh_scope(&mut self, f: impl FnOnce(&mut Self)) {
        let saved = std::mem::take(&mut self.defs);
        f(self);
        self.defs = saved;
    }

    fn define(&mut self, id: NodeId) {
        let name = self.tree.text(id).to_string();
        let pos = self.pos(id);
        self.defs.insert(name, pos);
    }

    fn use_identifier(&mut self, id: NodeId, sink: Option<&str>) {
        let name = self.tree.text(id);
        let Some(&def) = self.defs.get(name) else {
            return;
        };
        let relation = if self.is_direct_value(id) {
            Relation::ComesFrom
        } else {
            Relation::ComputedFrom
        };
        self.edges.push(DataflowEdge {
            variable: name.to_string(),
            def_position: def,
            use_position: self.pos(id),
            relation,
            sink: sink.map(str::to_string),
        });
    }

    fn is_direct_value(&self, id: NodeId) -> bool {
        let node = self.tree.node(id);
        let Some(parent) = node.parent else {
            return false;
        };
        match (self.kind(parent), node.field) {
            ("assignment", Some("right"))
            | ("named_expression", Some("value"))
            | ("variable_declarator", Some("value")) => true,
            ("assignment_expression", Some("right")) => self.assign_operator(parent) == "=",
            _ => false,
        }
    }

    fn assign_operator(&self, id: NodeId) -> &str {
        self.field(id, "operator")
            .map(|op| self.tree.text(op))
            .unwrap_or("=")
    }

    // ---- python ----

    fn walk_python(&mut self, id: NodeId, sink: Option<&str>) {
        match self.kind(id) {
            "identifier" => self.use_identifier(id, sink),
            "function_definition" | "lambda" => self.with_fresh_scope(|w| {
                if let Some(params) = w.field(id, "parameters") {
                    w.define_python_target(params);
                }
                if let Some(body) = w.field(id, "body") {
                    w.walk(body, None);
                }
            }),
            "class_definition" => {
                for c in self.children(id) {
                    if self.tree.node(c).field != Some("name") {
                        self.walk(c, None);
                    }
                }
            }
            "assignment" => {
                let target = self.field(id, "left").and_then(|l| self.first_identifier(l));
                if let Some(right) = self.field(id, "right") {
                    self.walk(right, target.as_deref());
                    if let Some(left) = self.field(id, "left") {
                        self.define_python_target(left);
                    }
                } else if let Some(left) = self.field(id, "left") {
                    // Bare annotation: `x: int` declares nothing we can track.
                    if !self.is_identifier(left) {
                        self.walk(left, None);
                    }
                }
            }
            "augmented_assignment" => {
                let left = self.field(id, "left");
                let target = left.and_then(|l| self.first_identifier(l));
                if let Some(right) = self.field(id, "right") {
                    self.walk(right, target.as_deref());
                }
                if let Some(left) = left {
                    if self.is_identifier(left) {
                        self.use_identifier(left, target.as_deref());
                        self.define(left);
                    } else {
                        self.walk(left, None);
                    }
                }
            }
            "named_expression" => {
                let name = self.field(id, "name");
                let target = name.map(|n| self.tree.text(n).to_string());
                if let Some(v) = self.field(id, "value") {
                    self.walk(v, target.as_deref());
                }
                if let Some(n) = name {
                    self.define(n);
                }
            }
            "for_statement" | "for_in_clause" => {
                if let Some(right) = self.field(id, "right") {
                    self.walk(right, None);
                }
                if let Some(left) = self.field(id, "left") {
                    self.define_python_target(left);
                }
                for c in self.children(id) {
                    let f = self.tree.node(c).field;
                    if f != Some("left") && f != Some("right") {
                        self.walk(c, None);
                    }
                }
            }
            "as_pattern" => {
                for c in self.children(id) {
                    if self.tree.node(c).field == Some("alias") {
                        self.define_python_target(c);
                    } else {
                        self.walk(c, sink);
                    }
                }
            }
            "keyword_argument" => {
                if let Some(v) = self.field(id, "value") {
                    self.walk(v, sink);
                }
            }
            "attribute" => {
                if let Some(obj) = self.field(id, "object") {
                    self.walk(obj, sink);
                }
            }
            "import_statement"
            | "import_from_statement"
            | "future_import_statement"
            | "global_statement"
            | "nonlocal_statement" => {}
            _ => self.walk_children(id, sink),
        }
    }

    fn define_python_target(&mut self, id: NodeId) {
        match self.kind(id) {
            "identifier" => self.define(id),
            "attribute" | "subscript" => self.walk(id, None),
            "default_parameter" | "typed_default_parameter" => {
                if let Some(v) = self.field(id, "value") {
                    self.walk(v, None);
                }
                if let Some(n) = self.field(id, "name") {
                    self.define_python_target(n);
                }
            }
            "typed_parameter" => {
                if let Some(first) = self.tree.named_children(id).next() {
                    self.define_python_target(first);
                }
            }
            _ => {
                for c in self.children(id) {
                    if self.tree.node(c).named {
                        self.define_python_target(c);
                    }
                }
            }
        }
    }

    // ---- java ----

    fn walk_java(&mut self, id: NodeId, sink: Option<&str>) {
        match self.kind(id) {
            "identifier" => self.use_identifier(id, sink),
            "method_declaration" | "constructor_declaration" | "lambda_expression" => {
                self.with_fresh_scope(|w| {
                    if let Some(params) = w.field(id, "parameters") {
                        w.define_java_params(params);
                    }
                    if let Some(body) = w.field(id, "body") {
                        w.walk(body, None);
                    }
                })
            }
            "class_declaration" | "interface_declaration" | "enum_declaration" | "record_declaration" => {
                if let Some(body) = self.field(id, "body") {
                    self.walk(body, None);
                }
            }
            "variable_declarator" => {
                let name = self.field(id, "name");
                let target = name.map(|n| self.tree.text(n).to_string());
                if let Some(v) = self.field(id, "value") {
                    self.walk(v, target.as_deref());
                }
                if let Some(n) = name {
                    self.define(n);
                }
            }
            "assignment_expression" => {
                let left = self.field(id, "left");
                let target = left.and_then(|l| self.first_identifier(l));
                let compound = self.assign_operator(id) != "=";
                if let Some(l) = left {
                    if compound && self.is_identifier(l) {
                        self.use_identifier(l, target.as_deref());
                    }
                }
                if let Some(r) = self.field(id, "right") {
                    self.walk(r, target.as_deref());
                }
                if let Some(l) = left {
                    if self.is_identifier(l) {
                        self.define(l);
                    } else {
                        self.walk(l, None);
                    }
                }
            }
            "update_expression" => {
                let ident = self.tree.named_children(id).find(|&c| self.is_identifier(c));
                match ident {
                    Some(i) => {
                        let name = self.tree.text(i).to_string();
                        self.use_identifier(i, Some(&name));
                        self.define(i);
                    }
                    None => self.walk_children(id, sink),
                }
            }
            "enhanced_for_statement" => {
                if let Some(v) = self.field(id, "value") {
                    self.walk(v, None);
                }
                if let Some(n) = self.field(id, "name") {
                    self.define(n);
                }
                if let Some(b) = self.field(id, "body") {
                    self.walk(b, None);
                }
            }
            "catch_formal_parameter" => {
                if let Some(n) = self.field(id, "name") {
                    self.define(n);
                }
            }
            "resource" => {
                let name = self.field(id, "name");
                let target = name.map(|n| self.tree.text(n).to_string());
                if let Some(v) = self.field(id, "value") {
                    self.walk(v, target.as_deref());
                }
                if let Some(n) = name {
                    self.define(n);
                }
            }
            "method_invocation" => {
                for c in self.children(id) {
                    if self.tree.node(c).field != Some("name") {
                        self.walk(c, sink);
                    }
                }
            }
            "field_access" => {
                if let Some(obj) = self.field(id, "object") {
                    self.walk(obj, sink);
                }
            }
            "marker_annotation"
            | "annotation"
            | "import_declaration"
            | "package_declaration"
            | "labeled_statement" => {}
            _ => self.walk_children(id, sink),
        }
    }

    fn define_java_params(&mut self, id: NodeId) {
        match self.kind(id) {
            "identifier" => self.define(id),
            "formal_parameter" | "spread_parameter" | "receiver_parameter" => {
                if let Some(n) = self.field(id, "name") {
                    self.define(n);
                } else {
                    for c in self.children(id) {
                        if self.kind(c) == "variable_declarator" {
                            if let Some(n) = self.field(c, "name") {
                                self.define(n);
                            }
                        }
                    }
                }
            }
            _ => {
                for c in self.children(id) {
                    self.define_java_params(c);
                }
            }
        }
    }
}

type EdgeKey = (usize, Relation, Option<usize>);

/// Edges as position-free keys with variables renamed by order of first appearance.
fn normalized_keys(edges: &[DataflowEdge]) -> HashMap<EdgeKey, usize> {
    let mut names: HashMap<&str, usize> = HashMap::new();
    let mut keys = HashMap::new();
    for e in edges {
        let var = canonical(&mut names, &e.variable);
        let sink = e.sink.as_deref().map(|s| canonical(&mut names, s));
        *keys.entry((var, e.relation, sink)).or_insert(0) += 1;
    }
    keys
}

fn canonical<'a>(names: &mut HashMap<&'a str, usize>, name: &'a str) -> usize {
    let next = names.len();
    *names.entry(name).or_insert(next)
}

/// Fraction of reference edges matched by candidate edges, after variable renaming.
///
/// A reference without edges scores 1.0 against a candidate without edges and 0.0
/// otherwise; CodeBLEU drops the component in that case instead of using this value.
pub fn dataflow_match(candidate: &[DataflowEdge], reference: &[DataflowEdge]) -> f64 {
    if reference.is_empty() {
        return if candidate.is_empty() { 1.0 } else { 0.0 };
    }
    let refs = normalized_keys(reference);
    let cands = normalized_keys(candidate);
    let matched: usize = refs
        .iter()
        .map(|(k, &n)| n.min(cands.get(k).copied().unwrap_or(0)))
        .sum();
    matched as f64 / reference.len() as f64
}
