//! Per-node attribute and pseudo-class constraints.

use super::words::{AttrTest, ConstraintSet};
use crate::dom::LANG_NS;
use crate::selector::*;

/// Attribute identity: namespace and name. Positive `[*|a]` tests receive a
/// reserved namespace of their own, unique within the node selector.
pub type AttrKey = (String, String);

/// Prefix of the reserved namespaces given to `[*|a]` tests.
pub const FRESH_ATTR_NS: &str = "\u{2}any";

pub fn is_fresh_ns(ns: &str) -> bool {
    ns.starts_with(FRESH_ATTR_NS)
}

/// True for keys whose values must be unique across a document.
pub fn is_id_key(key: &AttrKey) -> bool {
    key.1 == "id" && key.0 != LANG_NS
}

/// Constraints on one attribute of a node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KeyConstraints {
    pub key: AttrKey,
    pub tests: ConstraintSet,
}

fn fixed_key(a: &AttrSel) -> Option<AttrKey> {
    match &a.ns {
        AttrNs::Null => Some((String::new(), a.name.clone())),
        AttrNs::Named(ns) => Some((ns.clone(), a.name.clone())),
        AttrNs::Lang => Some((LANG_NS.to_string(), a.name.clone())),
        AttrNs::Any => None,
    }
}

fn as_test(a: &AttrSel, positive: bool) -> AttrTest {
    AttrTest {
        positive,
        test: a.test.clone(),
    }
}

/// Group the attribute conditions of a node selector by the attribute they
/// constrain. Attributes with only negative tests are left absent and do not
/// appear. `None` when a negated presence test meets a required attribute.
pub fn attr_groups(sel: &NodeSelector, fresh_tag: &str) -> Option<Vec<KeyConstraints>> {
    let mut groups: Vec<KeyConstraints> = Vec::new();
    let mut fresh = 0usize;
    for c in &sel.conds {
        if let Condition::Is(Simple::Attr(a)) = c {
            let key = fixed_key(a).unwrap_or_else(|| {
                fresh += 1;
                (format!("{FRESH_ATTR_NS}{fresh_tag}_{fresh}"), a.name.clone())
            });
            match groups.iter_mut().find(|g| g.key == key) {
                Some(g) => g.tests.push(as_test(a, true)),
                None => groups.push(KeyConstraints {
                    key,
                    tests: vec![as_test(a, true)],
                }),
            }
        }
    }
    for c in &sel.conds {
        if let Condition::Not(Negated::Simple(Simple::Attr(a))) = c {
            let targets: Vec<&mut KeyConstraints> = match fixed_key(a) {
                Some(k) => groups.iter_mut().filter(|g| g.key == k).collect(),
                None => groups
                    .iter_mut()
                    .filter(|g| g.key.1 == a.name && g.key.0 != LANG_NS)
                    .collect(),
            };
            for g in targets {
                a.test.as_ref()?;
                g.tests.push(as_test(a, false));
            }
        }
    }
    Some(groups)
}

/// Pseudo-classes required and forbidden by a node selector.
pub fn pseudo_parts(sel: &NodeSelector) -> (Vec<PseudoClass>, Vec<PseudoClass>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for c in &sel.conds {
        match c {
            Condition::Is(Simple::Pseudo(p)) => pos.push(*p),
            Condition::Not(Negated::Simple(Simple::Pseudo(p))) => neg.push(*p),
            _ => {}
        }
    }
    (pos, neg)
}

/// Local pseudo-class consistency: no class both required and forbidden, and
/// neither `:link:visited` nor `:enabled:disabled`.
pub fn pseudo_consistent(sel: &NodeSelector) -> bool {
    let (pos, neg) = pseudo_parts(sel);
    let has = |p| pos.contains(&p);
    !pos.iter().any(|p| neg.contains(p))
        && !(has(PseudoClass::Link) && has(PseudoClass::Visited))
        && !(has(PseudoClass::Enabled) && has(PseudoClass::Disabled))
}

pub fn requires(sel: &NodeSelector, pc: PseudoClass) -> bool {
    sel.conds.contains(&Condition::Is(Simple::Pseudo(pc)))
}

pub fn forbids(sel: &NodeSelector, pc: PseudoClass) -> bool {
    sel.conds.contains(&Condition::Not(Negated::Simple(Simple::Pseudo(pc))))
}

/// Positional conditions with their polarity.
pub fn positional_parts(sel: &NodeSelector) -> Vec<(bool, &Positional)> {
    sel.conds
        .iter()
        .filter_map(|c| match c {
            Condition::Is(Simple::Positional(p)) => Some((true, p)),
            Condition::Not(Negated::Simple(Simple::Positional(p))) => Some((false, p)),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selector::parse_selector;

    fn groups(s: &str) -> Option<Vec<KeyConstraints>> {
        attr_groups(parse_selector(s).unwrap().subject(), "t")
    }

    #[test]
    fn grouping() {
        let g = groups(".a.b#x:not([title])").unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].key, (String::new(), "class".to_string()));
        assert_eq!(g[0].tests.len(), 2);
        assert!(is_id_key(&g[1].key));
    }

    #[test]
    fn any_namespace_tests_get_fresh_keys() {
        let g = groups("[*|a=x][*|a=y]:not([*|a$=z])").unwrap();
        assert_eq!(g.len(), 2);
        assert_ne!(g[0].key, g[1].key);
        assert!(g.iter().all(|k| k.tests.len() == 2 && is_fresh_ns(&k.key.0)));
    }

    #[test]
    fn negated_presence_conflicts() {
        assert!(groups("[a]:not([a])").is_none());
        assert!(groups("[a]:not([*|a])").is_none());
        assert!(groups("[x|a]:not([a])").is_some());
        assert!(groups(":lang(en):not([*|lang])").is_some());
    }

    #[test]
    fn pseudo_checks() {
        let s = |x: &str| parse_selector(x).unwrap().subject().clone();
        assert!(!pseudo_consistent(&s(":link:visited")));
        assert!(!pseudo_consistent(&s(":hover:not(:hover)")));
        assert!(pseudo_consistent(&s(":hover:not(:focus)")));
    }
}
