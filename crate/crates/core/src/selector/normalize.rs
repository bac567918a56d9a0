//! Rewriting of derived selector forms into the core syntax.
//!
//! `:first-child` and friends become `:nth-*(0n+1)`, `even`/`odd` become
//! `2n`/`2n+1`. `:lang(l)` is already
//! parsed into a `|=` attribute test in the reserved language namespace.
//! Pseudo-elements stay as a tag on the selector; the extra `:not(:empty)`
//! requirement of `first-line`/`first-letter` is applied by the matcher and the
//! automaton compiler, so normalization never changes specificity.

use super::ast::*;

fn normalize_simple(s: &Simple) -> Simple {
    match s {
        Simple::Positional(Positional::Nth { kind, a, b, .. }) => {
            Simple::Positional(Positional::nth(*kind, *a, *b))
        }
        other => other.clone(),
    }
}

fn normalize_condition(c: &Condition) -> Condition {
    match c {
        Condition::Is(s) => Condition::Is(normalize_simple(s)),
        Condition::Not(Negated::Simple(s)) => Condition::Not(Negated::Simple(normalize_simple(s))),
        Condition::Not(Negated::Type(t)) => Condition::Not(Negated::Type(t.clone())),
    }
}

/// Normalize a node selector.
pub fn normalize_node(n: &NodeSelector) -> NodeSelector {
    let mut out = NodeSelector {
        ty: n.ty.clone(),
        conds: Vec::with_capacity(n.conds.len()),
    };
    for c in &n.conds {
        out.conds.push(normalize_condition(c));
    }
    out
}

/// Normalize a full selector. Idempotent.
pub fn normalize(s: &Selector) -> Selector {
    Selector {
        compounds: s.compounds.iter().map(normalize_node).collect(),
        combinators: s.combinators.clone(),
        pseudo_element: s.pseudo_element,
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_selector;
    use super::super::specificity::specificity;
    use super::*;

    fn norm(s: &str) -> String {
        normalize(&parse_selector(s).unwrap()).to_string()
    }

    #[test]
    fn rewrites() {
        assert_eq!(norm(":first-child"), ":nth-child(1)");
        assert_eq!(norm("p:nth-child(even)"), "p:nth-child(2n)");
        assert_eq!(norm("p:nth-last-of-type(odd)"), "p:nth-last-of-type(2n+1)");
        assert_eq!(norm("p:not(:last-child)"), "p:not(:nth-last-child(1))");
        assert_eq!(norm("x::before"), "x:before");
        assert_eq!(norm(".a.a"), ".a.a");
    }

    #[test]
    fn idempotent_and_specificity_preserving() {
        for s in [":first-of-type", "a:lang(en) b:nth-child(odd)", "p::first-line", ".a.a#b"] {
            let p = parse_selector(s).unwrap();
            let n = normalize(&p);
            assert_eq!(normalize(&n), n);
            assert_eq!(specificity(&p, false), specificity(&n, false));
        }
    }
}
