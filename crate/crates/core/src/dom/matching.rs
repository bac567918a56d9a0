//! Selector matching over document trees.

use super::tree::{DocumentTree, Label, LANG_NS};
use crate::selector::*;

/// `~=` test: `v` occurs in `val` delimited by the string ends or spaces.
pub fn includes_match(val: &str, v: &str) -> bool {
    if val == v {
        return true;
    }
    let starts = val.len() > v.len() && val.starts_with(v) && val.as_bytes()[v.len()] == b' ';
    let ends = val.len() > v.len() && val.ends_with(v) && val.as_bytes()[val.len() - v.len() - 1] == b' ';
    starts || ends || val.contains(&format!(" {v} "))
}

/// Apply an attribute operator to a present attribute value.
pub fn attr_op_match(op: AttrOp, val: &str, v: &str) -> bool {
    match op {
        AttrOp::Equals => val == v,
        AttrOp::Includes => includes_match(val, v),
        AttrOp::DashMatch => val == v || (val.starts_with(v) && val[v.len()..].starts_with('-')),
        AttrOp::Prefix => val.starts_with(v),
        AttrOp::Suffix => val.ends_with(v),
        AttrOp::Substring => val.contains(v),
    }
}

fn test_value(a: &AttrSel, val: &str) -> bool {
    match &a.test {
        None => true,
        Some((op, v)) => attr_op_match(*op, val, v),
    }
}

/// Evaluate an attribute selector on a label.
pub fn attr_matches(l: &Label, a: &AttrSel) -> bool {
    match &a.ns {
        AttrNs::Null => l.attr("", &a.name).is_some_and(|v| test_value(a, v)),
        AttrNs::Named(ns) => l.attr(ns, &a.name).is_some_and(|v| test_value(a, v)),
        AttrNs::Lang => l.attr(LANG_NS, &a.name).is_some_and(|v| test_value(a, v)),
        AttrNs::Any => l
            .attrs
            .iter()
            .any(|((ns, name), v)| ns != LANG_NS && *name == a.name && test_value(a, v)),
    }
}

/// Evaluate a type selector on a label.
pub fn type_matches(l: &Label, t: &TypeSelector) -> bool {
    match t {
        TypeSelector::Any => true,
        TypeSelector::AnyInNs(ns) => l.ns == *ns,
        TypeSelector::Element(e) => l.elem == *e,
        TypeSelector::NsElement(ns, e) => l.ns == *ns && l.elem == *e,
    }
}

/// `x = a*n + b` for some integer `n >= 0`.
pub fn in_progression(x: i64, a: i64, b: i64) -> bool {
    if a == 0 {
        return x == b;
    }
    let d = x - b;
    d % a == 0 && d / a >= 0
}

/// Sibling counts of a node: 1-based position from start and end, overall and among same-type siblings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Position {
    pub from_start: i64,
    pub from_end: i64,
    pub type_from_start: i64,
    pub type_from_end: i64,
}

pub fn position(t: &DocumentTree, n: usize) -> Position {
    let sibs = t.siblings(n);
    let i = t.nodes[n].sibling_index;
    let l = t.label(n);
    let same = |&m: &usize| {
        let k = t.label(m);
        k.ns == l.ns && k.elem == l.elem
    };
    Position {
        from_start: i as i64 + 1,
        from_end: (sibs.len() - i) as i64,
        type_from_start: sibs[..i].iter().filter(|m| same(m)).count() as i64 + 1,
        type_from_end: sibs[i + 1..].iter().filter(|m| same(m)).count() as i64 + 1,
    }
}

fn positional_matches(t: &DocumentTree, n: usize, p: &Positional) -> bool {
    if t.is_root(n) {
        return false;
    }
    let pos = position(t, n);
    match p {
        Positional::OnlyChild => pos.from_start == 1 && pos.from_end == 1,
        Positional::OnlyOfType => pos.type_from_start == 1 && pos.type_from_end == 1,
        Positional::Nth { kind, a, b, .. } => {
            let x = match kind {
                NthKind::Child => pos.from_start,
                NthKind::LastChild => pos.from_end,
                NthKind::OfType => pos.type_from_start,
                NthKind::LastOfType => pos.type_from_end,
            };
            in_progression(x, *a, *b)
        }
    }
}

fn simple_matches(t: &DocumentTree, n: usize, s: &Simple) -> bool {
    let l = t.label(n);
    match s {
        Simple::Attr(a) => attr_matches(l, a),
        Simple::Pseudo(pc) => l.pcs.contains(pc),
        Simple::Positional(p) => positional_matches(t, n, p),
    }
}

/// Evaluate one condition at node `n`.
pub fn condition_matches(t: &DocumentTree, n: usize, c: &Condition) -> bool {
    match c {
        Condition::Is(s) => simple_matches(t, n, s),
        Condition::Not(Negated::Simple(s)) => !simple_matches(t, n, s),
        Condition::Not(Negated::Type(ty)) => !type_matches(t.label(n), ty),
    }
}

/// Evaluate a node selector at node `n`.
pub fn node_matches(t: &DocumentTree, n: usize, ns: &NodeSelector) -> bool {
    type_matches(t.label(n), &ns.ty) && ns.conds.iter().all(|c| condition_matches(t, n, c))
}

/// Evaluate the non-positional part of a node selector on a bare label.
pub fn label_satisfies(l: &Label, ns: &NodeSelector) -> bool {
    if !type_matches(l, &ns.ty) {
        return false;
    }
    ns.conds.iter().all(|c| match c {
        Condition::Is(Simple::Attr(a)) => attr_matches(l, a),
        Condition::Is(Simple::Pseudo(p)) => l.pcs.contains(p),
        Condition::Not(Negated::Simple(Simple::Attr(a))) => !attr_matches(l, a),
        Condition::Not(Negated::Simple(Simple::Pseudo(p))) => !l.pcs.contains(p),
        Condition::Not(Negated::Type(ty)) => !type_matches(l, ty),
        Condition::Is(Simple::Positional(_)) | Condition::Not(Negated::Simple(Simple::Positional(_))) => true,
    })
}

fn chain_matches(t: &DocumentTree, n: usize, s: &Selector, i: usize) -> bool {
    if !node_matches(t, n, &s.compounds[i]) {
        return false;
    }
    if i == 0 {
        return true;
    }
    match s.combinators[i - 1] {
        Combinator::Child => t.parent(n).is_some_and(|p| chain_matches(t, p, s, i - 1)),
        Combinator::Descendant => {
            let mut cur = t.parent(n);
            while let Some(p) = cur {
                if chain_matches(t, p, s, i - 1) {
                    return true;
                }
                cur = t.parent(p);
            }
            false
        }
        Combinator::Neighbour => t.prev_sibling(n).is_some_and(|m| chain_matches(t, m, s, i - 1)),
        Combinator::Sibling => {
            let idx = t.nodes[n].sibling_index;
            t.siblings(n)[..idx].iter().any(|&m| chain_matches(t, m, s, i - 1))
        }
    }
}

/// True when selector `s` matches node `n` of `t`.
///
/// For `first-line` and `first-letter` the node must additionally be non-empty.
pub fn matches(t: &DocumentTree, n: usize, s: &Selector) -> bool {
    if s.pseudo_element.is_some_and(|pe| pe.requires_content()) && t.label(n).pcs.contains(&PseudoClass::Empty) {
        return false;
    }
    chain_matches(t, n, s, s.compounds.len() - 1)
}
