//! Checking that a rewritten stylesheet is equivalent to the original.
//!
//! Two independent checks are combined. The graph check rebuilds the CSS
//! graph of the original, reads the rewritten rules as a covering of it and
//! requires that covering to contain exactly the original edges and to
//! respect the edge order. The cascade check compares computed styles of
//! both stylesheets on every node of a bounded family of small documents.

use crate::dom::{
    compute_cascade_over, enumerate_trees, oracle_intersection, oracle_labels, property_names, tight_labels, Bounds,
    DocumentTree, OracleBounds,
};
use crate::emptiness::IntersectionChecker;
use crate::graph::{extract_edge_order, is_valid_covering, validity_violation, CRule, CssGraph};
use crate::properties::related_property_names;
use crate::selector::{PseudoElement, Selector};
use crate::stylesheet::{Rule, Segment, Stylesheet};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};

/// Limits of the cascade check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationBounds {
    pub max_depth: usize,
    pub max_branch: usize,
    /// Largest number of nodes of an enumerated document.
    pub max_nodes: usize,
    /// Enumerated documents checked at most.
    pub tree_budget: usize,
    /// Selector pairs for which a common witness document is searched.
    pub pair_budget: usize,
}

impl Default for ValidationBounds {
    fn default() -> Self {
        ValidationBounds::new(2, 2)
    }
}

impl ValidationBounds {
    pub fn new(max_depth: usize, max_branch: usize) -> Self {
        ValidationBounds {
            max_depth,
            max_branch,
            max_nodes: 4,
            tree_budget: 20_000,
            pair_budget: 2_000,
        }
    }
}

/// Above this many distinct selectors only one witness label per node
/// selector is enumerated instead of the full oracle label set.
pub const ORACLE_LABEL_LIMIT: usize = 40;

/// A document node styled differently by the two stylesheets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub tree: DocumentTree,
    pub node: usize,
    pub pseudo_element: Option<PseudoElement>,
    pub property: String,
    pub original: Option<String>,
    pub minified: Option<String>,
}

impl std::fmt::Display for Counterexample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let pe = self.pseudo_element.map(|p| format!("::{}", p.name())).unwrap_or_default();
        writeln!(
            f,
            "node {}{pe}: {} is {:?} originally but {:?} after minification in",
            self.node, self.property, self.original, self.minified
        )?;
        f.write_str(&self.tree.dump())
    }
}

/// Outcome of [`validate_equivalence`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Validation {
    pub pass: bool,
    /// Reason the graph check failed, if it did.
    pub graph_failure: Option<String>,
    pub counterexample: Option<Counterexample>,
    pub trees_checked: usize,
    pub pairs_checked: usize,
    /// All documents within the bounds were enumerated.
    pub exhaustive: bool,
}

/// Graph part of the check: the rewritten segments must be valid coverings
/// of the original graphs with the same edges.
pub fn graph_check(original: &Stylesheet, minified: &Stylesheet, checker: &IntersectionChecker) -> Result<(), String> {
    let (so, sm) = (original.segments(), minified.segments());
    if so.len() != sm.len() {
        return Err(format!("{} segments originally, {} after minification", so.len(), sm.len()));
    }
    for (k, (a, b)) in so.iter().zip(&sm).enumerate() {
        match (a, b) {
            (Segment::Passthrough(x), Segment::Passthrough(y)) if x == y => {}
            (Segment::Rules(ra), Segment::Rules(rb)) => {
                check_segment(ra, rb, checker).map_err(|e| format!("segment {k}: {e}"))?;
            }
            _ => return Err(format!("segment {k} differs in kind or verbatim text")),
        }
    }
    Ok(())
}

fn check_segment(original: &[Rule], minified: &[Rule], checker: &IntersectionChecker) -> Result<(), String> {
    let (mut g, c0) = CssGraph::build(original);
    g.order = extract_edge_order(&g, &c0, checker);
    let sel_id: HashMap<&str, usize> = g.sel_text.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let prop_id: HashMap<&str, usize> = g.prop_text.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let mut cm = Vec::new();
    for r in minified {
        let mut sels = Vec::new();
        for s in &r.selectors {
            let t = s.to_string();
            let id = *sel_id.get(t.as_str()).ok_or_else(|| format!("selector {t} is new"))?;
            if !sels.contains(&id) {
                sels.push(id);
            }
        }
        let mut props: Vec<usize> = Vec::new();
        for d in &r.decls {
            let t = d.to_string();
            let id = *prop_id.get(t.as_str()).ok_or_else(|| format!("declaration {t} is new"))?;
            props.retain(|&p| p != id);
            props.push(id);
        }
        cm.push(CRule::new(sels, props));
    }
    let edges: BTreeSet<_> = cm.iter().flat_map(|r| r.edges()).collect();
    if let Some(e) = g.edges.difference(&edges).next() {
        return Err(format!("edge {} is lost", g.edge_label(*e)));
    }
    if let Some(e) = edges.difference(&g.edges).next() {
        return Err(format!("edge {} is new", g.edge_label(*e)));
    }
    if !is_valid_covering(&g, &cm) {
        let (e, f) = validity_violation(&g, &cm).expect("invalid covering has a violated pair");
        return Err(format!(
            "{} must come before {} but no longer does",
            g.edge_label(e),
            g.edge_label(f)
        ));
    }
    Ok(())
}

struct CascadeCheck {
    original: Vec<Rule>,
    minified: Vec<Rule>,
    names: BTreeSet<String>,
    pes: Vec<Option<PseudoElement>>,
}

impl CascadeCheck {
    fn first_difference(&self, t: &DocumentTree) -> Option<Counterexample> {
        for n in 0..t.len() {
            for &pe in &self.pes {
                let a = compute_cascade_over(t, n, pe, &self.original, &self.names);
                let b = compute_cascade_over(t, n, pe, &self.minified, &self.names);
                let (va, vb) = (a.values(), b.values());
                if va == vb {
                    continue;
                }
                let property = self
                    .names
                    .iter()
                    .find(|q| va.get(q.as_str()) != vb.get(q.as_str()))
                    .expect("differing styles differ on some property")
                    .clone();
                return Some(Counterexample {
                    tree: t.clone(),
                    node: n,
                    pseudo_element: pe,
                    original: va.get(property.as_str()).cloned(),
                    minified: vb.get(property.as_str()).cloned(),
                    property,
                });
            }
        }
        None
    }
}

/// Decide whether `minified` is an equivalent rewriting of `original`.
pub fn validate_equivalence(
    original: &Stylesheet,
    minified: &Stylesheet,
    bounds: &ValidationBounds,
    checker: &IntersectionChecker,
) -> Validation {
    let mut v = Validation {
        pass: true,
        graph_failure: graph_check(original, minified, checker).err(),
        counterexample: None,
        trees_checked: 0,
        pairs_checked: 0,
        exhaustive: true,
    };
    let ro: Vec<Rule> = original.rules().cloned().collect();
    let rm: Vec<Rule> = minified.rules().cloned().collect();
    let mut names = property_names(&ro);
    names.extend(property_names(&rm));
    let mut selectors: Vec<&Selector> = Vec::new();
    let mut seen = BTreeSet::new();
    for s in original.rules().chain(minified.rules()).flat_map(|r| &r.selectors) {
        if seen.insert(s.to_string()) {
            selectors.push(s);
        }
    }
    let mut pes: BTreeSet<Option<PseudoElement>> = selectors.iter().map(|s| s.pseudo_element).collect();
    pes.insert(None);
    let check = CascadeCheck {
        original: ro.clone(),
        minified: rm,
        names,
        pes: pes.into_iter().collect(),
    };

    let labels = if selectors.len() <= ORACLE_LABEL_LIMIT {
        oracle_labels(&selectors)
    } else {
        tight_labels(&selectors)
    };
    let b = Bounds::new(bounds.max_depth, bounds.max_branch, labels).with_max_nodes(bounds.max_nodes);
    let mut trees = enumerate_trees(&b);
    for t in trees.by_ref().take(bounds.tree_budget) {
        v.trees_checked += 1;
        if let Some(cx) = check.first_difference(&t) {
            v.counterexample = Some(cx);
            break;
        }
    }
    if v.counterexample.is_none() && trees.next().is_some() {
        v.exhaustive = false;
    }

    if v.counterexample.is_none() {
        let pair_bounds = OracleBounds {
            max_depth: bounds.max_depth,
            max_branch: bounds.max_branch,
            max_nodes: bounds.max_nodes,
        };
        'pairs: for (s1, s2) in conflicting_pairs(&ro) {
            if v.pairs_checked == bounds.pair_budget {
                v.exhaustive = false;
                break;
            }
            if !checker.may_intersect(s1, s2) {
                continue;
            }
            v.pairs_checked += 1;
            if let Some((t, _)) = oracle_intersection(s1, s2, pair_bounds) {
                if let Some(cx) = check.first_difference(&t) {
                    v.counterexample = Some(cx);
                    break 'pairs;
                }
            }
        }
    }
    v.pass = v.graph_failure.is_none() && v.counterexample.is_none();
    v
}

/// Distinct selector pairs of rules declaring related properties, in
/// document order.
fn conflicting_pairs(rules: &[Rule]) -> Vec<(&Selector, &Selector)> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, a) in rules.iter().enumerate() {
        for b in &rules[i..] {
            let related = a
                .decls
                .iter()
                .any(|x| b.decls.iter().any(|y| related_property_names(&x.property, &y.property)));
            if !related {
                continue;
            }
            for s1 in &a.selectors {
                for s2 in &b.selectors {
                    let (t1, t2) = (s1.to_string(), s2.to_string());
                    if t1 == t2 {
                        continue;
                    }
                    let key = if t1 < t2 { (t1, t2) } else { (t2, t1) };
                    if seen.insert(key) {
                        out.push((s1, s2));
                    }
                }
            }
        }
    }
    out
}
