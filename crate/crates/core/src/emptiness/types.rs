//! Finite summary of the node types relevant to an automaton.

use crate::automata::CssAutomaton;
use crate::selector::{Condition, Negated, NodeSelector, Positional, Simple, TypeSelector};
use std::collections::{BTreeMap, BTreeSet};

/// A node type: namespace and element name.
pub type NodeType = (String, String);

/// Prefix of the reserved fresh namespace and element names.
pub const FRESH_PREFIX: &str = "\u{2}";

/// Types that suffice to witness non-emptiness.
///
/// Mentioned namespaces and elements are combined with fresh names: one fresh
/// element per non-trivial transition under every mentioned namespace, one
/// fresh namespace per non-trivial transition for every mentioned element,
/// and fresh elements under the null namespace. Every node of a witness can
/// be relabelled to one of these without changing which selectors hold and
/// without merging types that must be counted apart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeSummary {
    /// Mentioned namespaces followed by fresh ones.
    pub namespaces: Vec<String>,
    /// Mentioned elements followed by fresh ones.
    pub elements: Vec<String>,
    /// The type universe, indexed by position.
    pub types: Vec<NodeType>,
    /// Fresh type chosen for each non-trivial transition (by index).
    pub fresh: BTreeMap<usize, NodeType>,
    /// Type of all nodes not read by the run.
    pub null: NodeType,
    /// True when some selector counts siblings of the same type.
    pub counts_types: bool,
}

fn fresh_ns(k: usize) -> String {
    format!("{FRESH_PREFIX}n{k}")
}

fn fresh_elem(k: usize) -> String {
    format!("{FRESH_PREFIX}e{k}")
}

fn mentioned(ty: &TypeSelector, ns: &mut BTreeSet<String>, el: &mut BTreeSet<String>) {
    match ty {
        TypeSelector::Any => {}
        TypeSelector::AnyInNs(n) => {
            ns.insert(n.clone());
        }
        TypeSelector::Element(e) => {
            el.insert(e.clone());
        }
        TypeSelector::NsElement(n, e) => {
            ns.insert(n.clone());
            el.insert(e.clone());
        }
    }
}

/// True when some condition of `sel` counts same-type siblings.
pub fn counts_types(sel: &NodeSelector) -> bool {
    sel.conds.iter().any(|c| match c {
        Condition::Is(Simple::Positional(p)) | Condition::Not(Negated::Simple(Simple::Positional(p))) => {
            p.is_of_type() || matches!(p, Positional::OnlyOfType)
        }
        _ => false,
    })
}

pub fn type_selector_matches(ty: &TypeSelector, t: &NodeType) -> bool {
    match ty {
        TypeSelector::Any => true,
        TypeSelector::AnyInNs(n) => t.0 == *n,
        TypeSelector::Element(e) => t.1 == *e,
        TypeSelector::NsElement(n, e) => t.0 == *n && t.1 == *e,
    }
}

/// True when type `t` satisfies the type part and negated types of `sel`.
pub fn node_type_allowed(sel: &NodeSelector, t: &NodeType) -> bool {
    type_selector_matches(&sel.ty, t)
        && sel.conds.iter().all(|c| match c {
            Condition::Not(Negated::Type(ty)) => !type_selector_matches(ty, t),
            _ => true,
        })
}

pub fn compute_type_summary(a: &CssAutomaton) -> TypeSummary {
    let mut m_ns = BTreeSet::new();
    let mut m_el = BTreeSet::new();
    let mut counting = false;
    for t in &a.transitions {
        mentioned(&t.sel.ty, &mut m_ns, &mut m_el);
        for c in &t.sel.conds {
            if let Condition::Not(Negated::Type(ty)) = c {
                mentioned(ty, &mut m_ns, &mut m_el);
            }
        }
        counting |= counts_types(&t.sel);
    }
    let nontrivial: Vec<usize> = (0..a.transitions.len())
        .filter(|&i| !a.transitions[i].sel.is_any())
        .collect();
    let k = nontrivial.len();
    let f_ns: Vec<String> = (0..=k).map(fresh_ns).collect();
    let f_el: Vec<String> = (0..=k).map(fresh_elem).collect();
    let mut types: Vec<NodeType> = Vec::new();
    let mut push = |t: NodeType| {
        if !types.contains(&t) {
            types.push(t);
        }
    };
    let null = (f_ns[0].clone(), f_el[0].clone());
    push(null.clone());
    for n in &m_ns {
        for e in &m_el {
            push((n.clone(), e.clone()));
        }
        for e in &f_el {
            push((n.clone(), e.clone()));
        }
    }
    for n in &f_ns {
        for e in &m_el {
            push((n.clone(), e.clone()));
        }
    }
    for e in &f_el {
        push((f_ns[0].clone(), e.clone()));
    }
    let mut fresh = BTreeMap::new();
    for (j, &ti) in nontrivial.iter().enumerate() {
        let ft = match &a.transitions[ti].sel.ty {
            TypeSelector::NsElement(n, e) => (n.clone(), e.clone()),
            TypeSelector::AnyInNs(n) => (n.clone(), f_el[j + 1].clone()),
            TypeSelector::Element(e) => (f_ns[j + 1].clone(), e.clone()),
            TypeSelector::Any => (f_ns[0].clone(), f_el[j + 1].clone()),
        };
        fresh.insert(ti, ft);
    }
    let mut namespaces: Vec<String> = m_ns.into_iter().collect();
    namespaces.extend(f_ns);
    let mut elements: Vec<String> = m_el.into_iter().collect();
    elements.extend(f_el);
    TypeSummary {
        namespaces,
        elements,
        types,
        fresh,
        null,
        counts_types: counting,
    }
}

impl TypeSummary {
    /// Indices of the types allowed for a node read with `sel`.
    pub fn allowed(&self, sel: &NodeSelector) -> Vec<usize> {
        (0..self.types.len())
            .filter(|&i| node_type_allowed(sel, &self.types[i]))
            .collect()
    }
}
