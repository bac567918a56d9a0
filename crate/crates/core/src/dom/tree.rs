//! Labelled document trees and their consistency constraints.

use crate::selector::PseudoClass;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Reserved attribute namespace that carries `:lang()` information.
pub const LANG_NS: &str = "\u{1}lang";

/// Node label: namespace, element name, attributes and pseudo-classes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Label {
    /// `""` is the null namespace.
    pub ns: String,
    pub elem: String,
    /// `(namespace, attribute) -> value`.
    pub attrs: BTreeMap<(String, String), String>,
    pub pcs: BTreeSet<PseudoClass>,
}

impl Label {
    pub fn element(elem: &str) -> Self {
        Label {
            elem: elem.to_string(),
            ..Default::default()
        }
    }

    pub fn with_attr(mut self, name: &str, value: &str) -> Self {
        self.attrs.insert((String::new(), name.to_string()), value.to_string());
        self
    }

    pub fn with_ns_attr(mut self, ns: &str, name: &str, value: &str) -> Self {
        self.attrs.insert((ns.to_string(), name.to_string()), value.to_string());
        self
    }

    pub fn with_pc(mut self, pc: PseudoClass) -> Self {
        self.pcs.insert(pc);
        self
    }

    pub fn attr(&self, ns: &str, name: &str) -> Option<&str> {
        self.attrs.get(&(ns.to_string(), name.to_string())).map(String::as_str)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.ns.is_empty() {
            write!(f, "{}|", self.ns)?;
        }
        f.write_str(&self.elem)?;
        for ((ns, a), v) in &self.attrs {
            if ns == LANG_NS {
                write!(f, " lang:{v:?}")?;
            } else if ns.is_empty() {
                write!(f, " {a}={v:?}")?;
            } else {
                write!(f, " {ns}|{a}={v:?}")?;
            }
        }
        for p in &self.pcs {
            write!(f, " :{}", p.name())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Node {
    pub label: Label,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// 0-based index among the parent's children.
    pub sibling_index: usize,
}

/// A finite ordered tree; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DocumentTree {
    pub nodes: Vec<Node>,
}

impl DocumentTree {
    /// Tree with a single root node. `:root` is added to the label.
    pub fn new(mut root: Label) -> Self {
        root.pcs.insert(PseudoClass::Root);
        DocumentTree {
            nodes: vec![Node {
                label: root,
                parent: None,
                children: Vec::new(),
                sibling_index: 0,
            }],
        }
    }

    /// Append a new last child of `parent`.
    pub fn add_child(&mut self, parent: usize, mut label: Label) -> usize {
        label.pcs.remove(&PseudoClass::Root);
        let id = self.nodes.len();
        let sibling_index = self.nodes[parent].children.len();
        self.nodes[parent].children.push(id);
        self.nodes.push(Node {
            label,
            parent: Some(parent),
            children: Vec::new(),
            sibling_index,
        });
        id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn label(&self, n: usize) -> &Label {
        &self.nodes[n].label
    }

    pub fn parent(&self, n: usize) -> Option<usize> {
        self.nodes[n].parent
    }

    pub fn children(&self, n: usize) -> &[usize] {
        &self.nodes[n].children
    }

    /// Siblings of `n` including `n`, in document order. The root is alone.
    pub fn siblings(&self, n: usize) -> &[usize] {
        match self.nodes[n].parent {
            Some(p) => &self.nodes[p].children,
            None => &[0],
        }
    }

    pub fn prev_sibling(&self, n: usize) -> Option<usize> {
        let p = self.nodes[n].parent?;
        let i = self.nodes[n].sibling_index;
        (i > 0).then(|| self.nodes[p].children[i - 1])
    }

    pub fn is_root(&self, n: usize) -> bool {
        n == 0
    }

    /// Depth-first rendering with two-space indentation.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        self.dump_rec(0, 0, &mut out);
        out
    }

    fn dump_rec(&self, n: usize, depth: usize, out: &mut String) {
        out.push_str(&"  ".repeat(depth));
        out.push_str(&format!("{}\n", self.nodes[n].label));
        for &c in &self.nodes[n].children {
            self.dump_rec(c, depth + 1, out);
        }
    }
}

/// A violated consistency constraint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    DuplicateId { ns: String, value: String, nodes: (usize, usize) },
    LinkAndVisited(usize),
    EnabledAndDisabled(usize),
    MultipleTargets(usize, usize),
    RootMislabelled(usize),
    EmptyWithChildren(usize),
}

/// Check the consistency constraints of a document tree.
pub fn validate_tree(t: &DocumentTree) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut ids: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    let mut target: Option<usize> = None;
    for (i, node) in t.nodes.iter().enumerate() {
        let l = &node.label;
        for ((ns, a), v) in &l.attrs {
            if a == "id" && ns != LANG_NS {
                if let Some(&j) = ids.get(&(ns.as_str(), v.as_str())) {
                    out.push(Violation::DuplicateId {
                        ns: ns.clone(),
                        value: v.clone(),
                        nodes: (j, i),
                    });
                } else {
                    ids.insert((ns, v), i);
                }
            }
        }
        if l.pcs.contains(&PseudoClass::Link) && l.pcs.contains(&PseudoClass::Visited) {
            out.push(Violation::LinkAndVisited(i));
        }
        if l.pcs.contains(&PseudoClass::Enabled) && l.pcs.contains(&PseudoClass::Disabled) {
            out.push(Violation::EnabledAndDisabled(i));
        }
        if l.pcs.contains(&PseudoClass::Target) {
            match target {
                Some(j) => out.push(Violation::MultipleTargets(j, i)),
                None => target = Some(i),
            }
        }
        if l.pcs.contains(&PseudoClass::Root) != (i == 0) {
            out.push(Violation::RootMislabelled(i));
        }
        if l.pcs.contains(&PseudoClass::Empty) && !node.children.is_empty() {
            out.push(Violation::EmptyWithChildren(i));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_tree_is_valid() {
        assert!(validate_tree(&DocumentTree::new(Label::element("html"))).is_empty());
    }

    #[test]
    fn detects_violations() {
        let mut t = DocumentTree::new(Label::element("html").with_pc(PseudoClass::Empty));
        t.add_child(0, Label::element("a").with_attr("id", "x").with_pc(PseudoClass::Target));
        t.add_child(
            0,
            Label::element("b")
                .with_attr("id", "x")
                .with_pc(PseudoClass::Target)
                .with_pc(PseudoClass::Link)
                .with_pc(PseudoClass::Visited),
        );
        let v = validate_tree(&t);
        assert!(v.contains(&Violation::EmptyWithChildren(0)));
        assert!(v.iter().any(|x| matches!(x, Violation::DuplicateId { .. })));
        assert!(v.contains(&Violation::MultipleTargets(1, 2)));
        assert!(v.contains(&Violation::LinkAndVisited(2)));
    }

    #[test]
    fn ids_are_per_namespace() {
        let mut t = DocumentTree::new(Label::element("html").with_attr("id", "x"));
        t.add_child(0, Label::element("a").with_ns_attr("svg", "id", "x"));
        assert!(validate_tree(&t).is_empty());
    }
}
