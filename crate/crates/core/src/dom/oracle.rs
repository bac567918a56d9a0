//! Brute-force intersection oracle over enumerated trees.
//!
//! Node labels are derived from the selectors under test: for each node
//! selector a label satisfying its non-positional conditions, labels
//! satisfying pairs of node selectors at once, near misses that violate one
//! condition, and a blank label with a fresh element name.

use super::enumerate::{enumerate_trees, Bounds};
use super::matching::{attr_op_match, label_satisfies, matches};
use super::tree::{DocumentTree, Label, LANG_NS};
use crate::selector::*;
use std::collections::{BTreeMap, BTreeSet};

const FRESH_ELEM: &str = "zz";
const FRESH_NS: &str = "zns";
const ANY_NS_SLOT: &str = "wns";

fn exemplars(tests: &[&AttrSel]) -> Vec<String> {
    let mut ex: BTreeSet<String> = BTreeSet::new();
    ex.insert("x".into());
    for a in tests {
        match &a.test {
            None => {}
            Some((op, v)) => {
                ex.insert(v.clone());
                if *op == AttrOp::DashMatch {
                    ex.insert(format!("{v}-x"));
                }
            }
        }
    }
    ex.into_iter().collect()
}

fn candidates(pos: &[&AttrSel]) -> Vec<String> {
    let ex = exemplars(pos);
    let mut out: Vec<String> = ex.clone();
    for a in &ex {
        for b in &ex {
            for sep in ["", " ", "-"] {
                out.push(format!("{a}{sep}{b}"));
            }
        }
    }
    if ex.len() <= 6 {
        for a in &ex {
            for b in &ex {
                for c in &ex {
                    out.push(format!("{a} {b} {c}"));
                    out.push(format!("{a}{b}{c}"));
                }
            }
        }
    }
    out.push(String::new());
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out.dedup();
    out
}

fn value_ok(v: &str, a: &AttrSel) -> bool {
    match &a.test {
        None => true,
        Some((op, w)) => attr_op_match(*op, v, w),
    }
}

fn key_of(a: &AttrSel) -> (String, String) {
    let ns = match &a.ns {
        AttrNs::Null => String::new(),
        AttrNs::Named(ns) => ns.clone(),
        AttrNs::Lang => LANG_NS.to_string(),
        AttrNs::Any => ANY_NS_SLOT.to_string(),
    };
    (ns, a.name.clone())
}

/// A label satisfying the non-positional conditions of every node selector
/// in `nodes`, found heuristically; `None` when none is found.
pub fn witness_label(nodes: &[&NodeSelector]) -> Option<Label> {
    let mut ns: Option<String> = None;
    let mut elem: Option<String> = None;
    let set_ns = |v: &str, ns: &mut Option<String>| -> bool {
        match ns {
            Some(old) => old == v,
            None => {
                *ns = Some(v.to_string());
                true
            }
        }
    };
    let mut pcs = BTreeSet::new();
    let mut pos: BTreeMap<(String, String), Vec<&AttrSel>> = BTreeMap::new();
    let mut neg: Vec<&AttrSel> = Vec::new();
    for n in nodes {
        match &n.ty {
            TypeSelector::Any => {}
            TypeSelector::AnyInNs(x) => {
                if !set_ns(x, &mut ns) {
                    return None;
                }
            }
            TypeSelector::Element(e) => {
                if !set_ns(e, &mut elem) {
                    return None;
                }
            }
            TypeSelector::NsElement(x, e) => {
                if !set_ns(x, &mut ns) || !set_ns(e, &mut elem) {
                    return None;
                }
            }
        }
        for c in &n.conds {
            match c {
                Condition::Is(Simple::Attr(a)) => pos.entry(key_of(a)).or_default().push(a),
                Condition::Is(Simple::Pseudo(p)) => {
                    pcs.insert(*p);
                }
                Condition::Not(Negated::Simple(Simple::Attr(a))) => neg.push(a),
                _ => {}
            }
        }
    }
    let mut label = Label {
        ns: ns.clone().unwrap_or_default(),
        elem: elem.clone().unwrap_or_else(|| FRESH_ELEM.to_string()),
        attrs: BTreeMap::new(),
        pcs,
    };
    for (key, tests) in &pos {
        let relevant_neg: Vec<&&AttrSel> = neg
            .iter()
            .filter(|a| a.name == key.1 && (key_of(a) == *key || a.ns == AttrNs::Any))
            .collect();
        let v = candidates(tests)
            .into_iter()
            .find(|v| tests.iter().all(|a| value_ok(v, a)) && !relevant_neg.iter().any(|a| value_ok(v, a)))?;
        label.attrs.insert(key.clone(), v);
    }
    let all_ok = |l: &Label| nodes.iter().all(|n| label_satisfies(l, n));
    if all_ok(&label) {
        return Some(label);
    }
    // Retry with alternative fresh names for unconstrained type parts.
    for alt_ns in ["", FRESH_NS] {
        for alt_elem in [FRESH_ELEM, "yy"] {
            let mut l = label.clone();
            if ns.is_none() {
                l.ns = alt_ns.to_string();
            }
            if elem.is_none() {
                l.elem = alt_elem.to_string();
            }
            if all_ok(&l) {
                return Some(l);
            }
        }
    }
    None
}

/// Blank label with a fresh element and no attributes.
pub fn blank_label() -> Label {
    Label::element(FRESH_ELEM)
}

fn negate(c: &Condition) -> Option<Condition> {
    match c {
        Condition::Is(s) => Some(Condition::Not(Negated::Simple(s.clone()))),
        Condition::Not(Negated::Simple(s)) => Some(Condition::Is(s.clone())),
        Condition::Not(Negated::Type(_)) => None,
    }
}

/// Witness labels for one node selector (one per node selector) plus the blank label.
pub fn tight_labels(selectors: &[&Selector]) -> Vec<Label> {
    let mut set = BTreeSet::new();
    for s in selectors {
        for n in &s.compounds {
            if let Some(l) = witness_label(&[n]) {
                set.insert(l);
            }
        }
    }
    set.insert(blank_label());
    set.into_iter().collect()
}

/// Tight labels extended with near misses (one condition flipped) and pairwise
/// merges of node selectors across the given selectors.
pub fn oracle_labels(selectors: &[&Selector]) -> Vec<Label> {
    let mut set: BTreeSet<Label> = tight_labels(selectors).into_iter().collect();
    let nodes: Vec<&NodeSelector> = selectors.iter().flat_map(|s| s.compounds.iter()).collect();
    for n in &nodes {
        for (i, c) in n.conds.iter().enumerate() {
            if matches!(c, Condition::Is(Simple::Positional(_)) | Condition::Not(Negated::Simple(Simple::Positional(_)))) {
                continue;
            }
            if let Some(nc) = negate(c) {
                let mut m = (*n).clone();
                m.conds[i] = nc;
                if let Some(l) = witness_label(&[&m]) {
                    set.insert(l);
                }
            }
        }
    }
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            if let Some(l) = witness_label(&[a, b]) {
                set.insert(l);
            }
        }
    }
    set.into_iter().collect()
}

/// Size bounds for oracle searches.
#[derive(Clone, Copy, Debug)]
pub struct OracleBounds {
    pub max_depth: usize,
    pub max_branch: usize,
    pub max_nodes: usize,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds {
            max_depth: 3,
            max_branch: 3,
            max_nodes: 5,
        }
    }
}

/// First tree and node (in enumeration order) matched by both selectors with
/// the same pseudo-element, or `None` up to the bounds.
pub fn oracle_intersection(s1: &Selector, s2: &Selector, bounds: OracleBounds) -> Option<(DocumentTree, usize)> {
    if s1.pseudo_element != s2.pseudo_element {
        return None;
    }
    let mut labels = oracle_labels(&[s1, s2]);
    // The subject pair witness goes first so that the common case is found early.
    if let Some(l) = witness_label(&[s1.subject(), s2.subject()]) {
        labels.retain(|x| *x != l);
        labels.insert(0, l);
    }
    let b = Bounds {
        max_depth: bounds.max_depth,
        max_branch: bounds.max_branch,
        max_nodes: bounds.max_nodes,
        labels,
    };
    for t in enumerate_trees(&b) {
        for n in 0..t.len() {
            if matches(&t, n, s1) && matches(&t, n, s2) {
                return Some((t, n));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sel(s: &str) -> Selector {
        parse_selector(s).unwrap()
    }

    #[test]
    fn classes_intersect_on_one_node() {
        let (t, n) = oracle_intersection(&sel(".a"), &sel(".b"), OracleBounds::default()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(n, 0);
        let v = t.label(0).attr("", "class").unwrap();
        assert!(v.split(' ').any(|c| c == "a") && v.split(' ').any(|c| c == "b"));
    }

    #[test]
    fn conflicting_ids_do_not_intersect() {
        assert!(oracle_intersection(&sel("#x[id=y]"), &sel("*"), OracleBounds::default()).is_none());
        assert!(oracle_intersection(&sel("#x"), &sel("#y"), OracleBounds::default()).is_none());
    }

    #[test]
    fn parity_conflict() {
        let b = OracleBounds {
            max_depth: 2,
            max_branch: 8,
            max_nodes: 9,
        };
        assert!(oracle_intersection(&sel(":nth-child(2n+3)"), &sel(":nth-child(2n+2)"), b).is_none());
        assert!(oracle_intersection(&sel(":nth-child(2n+3)"), &sel(":nth-child(3n+2)"), b).is_some());
    }

    #[test]
    fn witness_labels() {
        let l = witness_label(&[&sel("a[href^=http][href$=\".pdf\"]:hover").compounds[0]]).unwrap();
        assert_eq!(l.elem, "a");
        assert!(l.attr("", "href").unwrap().starts_with("http"));
        assert!(witness_label(&[&sel("a").compounds[0], &sel("b").compounds[0]]).is_none());
        let l = witness_label(&[&sel(":not(zz)").compounds[0]]).unwrap();
        assert_ne!(l.elem, "zz");
        assert!(witness_label(&[&sel("[x=a]:not([x^=a])").compounds[0]]).is_none());
    }
}
