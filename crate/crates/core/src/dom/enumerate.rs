//! Exhaustive enumeration of small document trees.

use super::tree::{validate_tree, DocumentTree, Label};
use crate::selector::PseudoClass;
use std::collections::BTreeSet;

/// Bounds for tree enumeration.
#[derive(Clone, Debug)]
pub struct Bounds {
    /// Maximum number of levels (a lone root has depth 1).
    pub max_depth: usize,
    /// Maximum number of children per node.
    pub max_branch: usize,
    /// Maximum number of nodes in a tree.
    pub max_nodes: usize,
    /// Candidate labels for every node; `:root` is managed by the enumerator.
    pub labels: Vec<Label>,
}

impl Bounds {
    pub fn new(max_depth: usize, max_branch: usize, labels: Vec<Label>) -> Self {
        Bounds {
            max_depth,
            max_branch,
            max_nodes: usize::MAX,
            labels,
        }
    }

    pub fn with_max_nodes(mut self, n: usize) -> Self {
        self.max_nodes = n;
        self
    }
}

/// Labels built from every combination of namespace and element with no
/// attributes and no pseudo-classes.
pub fn plain_labels(ns_set: &[&str], ele_set: &[&str]) -> Vec<Label> {
    let mut out = Vec::new();
    for ns in ns_set {
        for e in ele_set {
            out.push(Label {
                ns: ns.to_string(),
                elem: e.to_string(),
                ..Default::default()
            });
        }
    }
    out
}

/// Labels over all namespaces, elements, attribute assignments (each attribute
/// absent or any word over `alphabet` up to `attr_len`) and subsets of `pcs`.
pub fn exhaustive_labels(
    ns_set: &[&str],
    ele_set: &[&str],
    attr_names: &[&str],
    alphabet: &[char],
    attr_len: usize,
    pcs: &[PseudoClass],
) -> Vec<Label> {
    let mut words = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..attr_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &c in alphabet {
                next.push(format!("{w}{c}"));
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    let mut labels = plain_labels(ns_set, ele_set);
    for a in attr_names {
        let mut next = Vec::new();
        for l in &labels {
            next.push(l.clone());
            for w in &words {
                next.push(l.clone().with_attr(a, w));
            }
        }
        labels = next;
    }
    for &pc in pcs {
        let mut next = Vec::new();
        for l in &labels {
            next.push(l.clone());
            next.push(l.clone().with_pc(pc));
        }
        labels = next;
    }
    labels
}

/// An ordered tree shape given as preorder parent indices.
pub type Shape = Vec<Option<usize>>;

#[derive(Clone, Debug)]
struct ShapeTree(Vec<ShapeTree>);

impl ShapeTree {
    fn size(&self) -> usize {
        1 + self.0.iter().map(ShapeTree::size).sum::<usize>()
    }

    fn preorder(&self, parent: Option<usize>, out: &mut Shape) {
        let me = out.len();
        out.push(parent);
        for c in &self.0 {
            c.preorder(Some(me), out);
        }
    }
}

fn trees(depth: usize, branch: usize, budget: usize) -> Vec<ShapeTree> {
    if depth == 0 || budget == 0 {
        return Vec::new();
    }
    forests(depth - 1, branch, branch, budget - 1)
        .into_iter()
        .map(ShapeTree)
        .collect()
}

fn forests(depth: usize, branch: usize, slots: usize, budget: usize) -> Vec<Vec<ShapeTree>> {
    let mut out = vec![Vec::new()];
    if slots == 0 || depth == 0 || budget == 0 {
        return out;
    }
    for first in trees(depth, branch, budget) {
        let used = first.size();
        for rest in forests(depth, branch, slots - 1, budget - used) {
            let mut f = vec![first.clone()];
            f.extend(rest);
            out.push(f);
        }
    }
    out
}

/// All ordered tree shapes within the depth, branching and size bounds.
pub fn shapes(max_depth: usize, max_branch: usize, max_nodes: usize) -> Vec<Shape> {
    let mut out: Vec<Shape> = trees(max_depth, max_branch, max_nodes)
        .into_iter()
        .map(|t| {
            let mut s = Vec::new();
            t.preorder(None, &mut s);
            s
        })
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Build a tree from a shape and one label per node.
pub fn build_tree(shape: &Shape, labels: &[&Label]) -> DocumentTree {
    let mut t = DocumentTree::new(labels[0].clone());
    for (i, p) in shape.iter().enumerate().skip(1) {
        let id = t.add_child(p.expect("only the root lacks a parent"), labels[i].clone());
        debug_assert_eq!(id, i);
    }
    t
}

/// Deterministic stream of valid trees within bounds.
pub struct TreeIter<'a> {
    shapes: Vec<Shape>,
    labels: &'a [Label],
    shape_idx: usize,
    odometer: Vec<usize>,
}

impl Iterator for TreeIter<'_> {
    type Item = DocumentTree;

    fn next(&mut self) -> Option<DocumentTree> {
        if self.labels.is_empty() {
            return None;
        }
        loop {
            let shape = self.shapes.get(self.shape_idx)?;
            if self.odometer.len() != shape.len() {
                self.odometer = vec![0; shape.len()];
            }
            let labels: Vec<&Label> = self.odometer.iter().map(|&i| &self.labels[i]).collect();
            let tree = build_tree(shape, &labels);
            // Advance the odometer, moving to the next shape on overflow.
            let mut k = 0;
            loop {
                if k == self.odometer.len() {
                    self.shape_idx += 1;
                    self.odometer.clear();
                    break;
                }
                self.odometer[k] += 1;
                if self.odometer[k] < self.labels.len() {
                    break;
                }
                self.odometer[k] = 0;
                k += 1;
            }
            if validate_tree(&tree).is_empty() {
                return Some(tree);
            }
        }
    }
}

/// Enumerate all valid trees within `bounds`, duplicate-free when the labels are distinct.
pub fn enumerate_trees(bounds: &Bounds) -> TreeIter<'_> {
    let labels_unique: BTreeSet<&Label> = bounds.labels.iter().collect();
    debug_assert_eq!(labels_unique.len(), bounds.labels.len(), "labels must be distinct");
    TreeIter {
        shapes: shapes(bounds.max_depth, bounds.max_branch, bounds.max_nodes),
        labels: &bounds.labels,
        shape_idx: 0,
        odometer: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_counts() {
        assert_eq!(shapes(1, 1, usize::MAX).len(), 1);
        assert_eq!(shapes(2, 2, usize::MAX).len(), 3);
        // Depth 3, branch 2: root with 0, 1 or 2 children each having 0..2 children.
        assert_eq!(shapes(3, 2, usize::MAX).len(), 1 + 3 + 9);
        assert_eq!(shapes(3, 2, 3).len(), 1 + 2 + 1);
    }

    #[test]
    fn single_node_trees() {
        let labels = plain_labels(&[""], &["a", "b"]);
        let b = Bounds::new(1, 1, labels);
        assert_eq!(enumerate_trees(&b).count(), 2);
    }

    #[test]
    fn counts_grow_with_bounds() {
        let labels = plain_labels(&[""], &["a"]);
        let mut last = 0;
        for d in 1..4 {
            let n = enumerate_trees(&Bounds::new(d, 2, labels.clone())).count();
            assert!(n > last);
            last = n;
        }
    }

    #[test]
    fn invalid_trees_are_skipped() {
        let labels = vec![Label::element("a").with_attr("id", "x")];
        assert_eq!(enumerate_trees(&Bounds::new(2, 2, labels)).count(), 1);
    }

    #[test]
    fn exhaustive_label_count() {
        let l = exhaustive_labels(&[""], &["a"], &["x"], &['p', 'q'], 1, &[PseudoClass::Hover]);
        // (absent + "" + p + q) * (hover or not)
        assert_eq!(l.len(), 4 * 2);
    }
}
