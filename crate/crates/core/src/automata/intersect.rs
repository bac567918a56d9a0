//! Product construction for CSS automata.

use super::{CssAutomaton, Dir, Transition};
use crate::selector::{Condition, Negated, NodeSelector, TypeSelector};

/// Intersection of two type selectors; `None` when they are incompatible.
pub fn intersect_types(t1: &TypeSelector, t2: &TypeSelector) -> Option<TypeSelector> {
    use TypeSelector::*;
    match (t1, t2) {
        (Any, t) | (t, Any) => Some(t.clone()),
        (AnyInNs(a), AnyInNs(b)) => (a == b).then(|| t1.clone()),
        (AnyInNs(a), NsElement(b, _)) | (NsElement(b, _), AnyInNs(a)) => (a == b).then(|| {
            if matches!(t1, NsElement(..)) {
                t1.clone()
            } else {
                t2.clone()
            }
        }),
        (AnyInNs(ns), Element(e)) | (Element(e), AnyInNs(ns)) => Some(NsElement(ns.clone(), e.clone())),
        (Element(a), Element(b)) => (a == b).then(|| t1.clone()),
        (Element(a), NsElement(_, b)) | (NsElement(_, b), Element(a)) => (a == b).then(|| {
            if matches!(t1, NsElement(..)) {
                t1.clone()
            } else {
                t2.clone()
            }
        }),
        (NsElement(a, e), NsElement(b, f)) => (a == b && e == f).then(|| t1.clone()),
    }
}

/// Intersection of node selectors: merged conditions over the combined type,
/// or `:not(*)` when the type parts disagree.
pub fn intersect_node_selectors(s1: &NodeSelector, s2: &NodeSelector) -> NodeSelector {
    match intersect_types(&s1.ty, &s2.ty) {
        None => NodeSelector::nothing(),
        Some(ty) => {
            let mut out = NodeSelector {
                ty,
                conds: s1.conds.clone(),
            };
            for c in &s2.conds {
                out.push_cond(c.clone());
            }
            out
        }
    }
}

/// Cheap syntactic unsatisfiability check: `:not(*)`, a negated type that the
/// type part implies, or a condition together with its negation.
pub fn is_trivially_empty(s: &NodeSelector) -> bool {
    s.conds.iter().any(|c| match c {
        Condition::Not(Negated::Type(t)) => intersect_types(&s.ty, t).as_ref() == Some(&s.ty),
        Condition::Not(Negated::Simple(x)) => s.conds.contains(&Condition::Is(x.clone())),
        Condition::Is(_) => false,
    })
}

/// Product automaton accepting the intersection of both languages.
pub fn intersect(a1: &CssAutomaton, a2: &CssAutomaton) -> CssAutomaton {
    let n2 = a2.num_states;
    let id = |p: usize, q: usize| p * n2 + q;
    let mut names = Vec::with_capacity(a1.num_states * n2);
    for p in 0..a1.num_states {
        for q in 0..n2 {
            names.push(format!("({},{})", a1.names[p], a2.names[q]));
        }
    }
    let mut transitions = Vec::new();
    for t1 in &a1.transitions {
        for t2 in &a2.transitions {
            if t1.dir == t2.dir {
                transitions.push(Transition {
                    from: id(t1.from, t2.from),
                    dir: t1.dir,
                    sel: intersect_node_selectors(&t1.sel, &t2.sel),
                    to: id(t1.to, t2.to),
                });
            }
            let is_skip_loop = |t: &Transition| t.dir == Dir::Sibling && t.from == t.to && t.sel.is_any();
            if t1.dir == Dir::Neighbour && is_skip_loop(t2) {
                transitions.push(Transition {
                    from: id(t1.from, t2.from),
                    dir: Dir::Neighbour,
                    sel: t1.sel.clone(),
                    to: id(t1.to, t2.from),
                });
            }
            if is_skip_loop(t1) && t2.dir == Dir::Neighbour {
                transitions.push(Transition {
                    from: id(t1.from, t2.from),
                    dir: Dir::Neighbour,
                    sel: t2.sel.clone(),
                    to: id(t1.from, t2.to),
                });
            }
        }
    }
    let mut a = CssAutomaton {
        num_states: names.len(),
        names,
        transitions,
        init: id(a1.init, a2.init),
        fin: id(a1.fin, a2.fin),
    };
    a.prune();
    a
}

#[cfg(test)]
mod tests {
    use super::super::{compile, validate_automaton};
    use super::*;
    use crate::selector::parse_selector;

    fn ns(s: &str) -> NodeSelector {
        parse_selector(s).unwrap().compounds[0].clone()
    }

    #[test]
    fn node_selector_cases() {
        assert_eq!(intersect_node_selectors(&ns("*"), &ns("e")).to_string(), "e");
        assert_eq!(intersect_node_selectors(&ns("x|*"), &ns("e")).to_string(), "x|e");
        assert_eq!(intersect_node_selectors(&ns("e"), &ns("x|*")).to_string(), "x|e");
        assert_eq!(intersect_node_selectors(&ns("x|e"), &ns("e")).to_string(), "x|e");
        assert_eq!(intersect_node_selectors(&ns("x|*"), &ns("x|e")).to_string(), "x|e");
        assert_eq!(intersect_node_selectors(&ns("e1"), &ns("e2")), NodeSelector::nothing());
        assert_eq!(intersect_node_selectors(&ns("x|*"), &ns("y|e")), NodeSelector::nothing());
        assert_eq!(intersect_node_selectors(&ns("a.b"), &ns(".c.b")).to_string(), "a.b.c");
    }

    #[test]
    fn trivial_emptiness() {
        assert!(is_trivially_empty(&NodeSelector::nothing()));
        assert!(is_trivially_empty(&ns("a:not(a)")));
        assert!(is_trivially_empty(&ns(".a:not(.a)")));
        assert!(!is_trivially_empty(&ns("a:not(b)")));
        assert!(!is_trivially_empty(&ns("*:not(a)")));
    }

    #[test]
    fn products_are_valid() {
        let a = compile(&parse_selector("p + .a").unwrap());
        let b = compile(&parse_selector("div p ~ .b").unwrap());
        let c = intersect(&a, &b);
        assert!(validate_automaton(&c).is_empty());
        assert!(!c.trivially_empty());
        let d = intersect(&compile(&parse_selector(".a").unwrap()), &compile(&parse_selector(":not(.a)").unwrap()));
        assert!(d.trivially_empty());
    }
}
