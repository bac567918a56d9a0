//! The cascade: which declaration determines each property of a node.

use super::matching::matches;
use super::tree::DocumentTree;
use crate::properties::affects;
use crate::selector::{specificity, PseudoElement, Specificity};
use crate::stylesheet::{Declaration, Rule};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Cascade key of a matching declaration; larger wins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Winner {
    pub specificity: Specificity,
    pub rule_index: usize,
    pub decl_pos: usize,
}

/// Winning declaration per property name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ComputedStyle {
    pub props: BTreeMap<String, (Declaration, Winner)>,
}

impl ComputedStyle {
    /// Property name to winning declaration text, ignoring cascade keys.
    pub fn values(&self) -> BTreeMap<&str, String> {
        self.props.iter().map(|(k, (d, _))| (k.as_str(), d.to_string())).collect()
    }
}

/// All property names declared in `rules`.
pub fn property_names<'a>(rules: impl IntoIterator<Item = &'a Rule>) -> BTreeSet<String> {
    rules
        .into_iter()
        .flat_map(|r| r.decls.iter().map(|d| d.property.clone()))
        .collect()
}

/// Cascade for node `n` (or its pseudo-element `pe`) over the names of `rules`.
pub fn compute_cascade(t: &DocumentTree, n: usize, pe: Option<PseudoElement>, rules: &[Rule]) -> ComputedStyle {
    compute_cascade_over(t, n, pe, rules, &property_names(rules))
}

/// Cascade restricted to an explicit set of property names.
///
/// For each name `q`, the winner is the maximal `(importance, specificity,
/// rule index, position)` among matching declarations whose property affects
/// `q`, so shorthands compete with their longhands.
pub fn compute_cascade_over(
    t: &DocumentTree,
    n: usize,
    pe: Option<PseudoElement>,
    rules: &[Rule],
    names: &BTreeSet<String>,
) -> ComputedStyle {
    let mut style = ComputedStyle::default();
    for (ri, rule) in rules.iter().enumerate() {
        let best: Option<Specificity> = rule
            .selectors
            .iter()
            .filter(|s| s.pseudo_element == pe && matches(t, n, s))
            .map(|s| specificity(s, false))
            .max();
        let Some(base) = best else { continue };
        for (di, d) in rule.decls.iter().enumerate() {
            let w = Winner {
                specificity: Specificity {
                    important: d.important,
                    ..base
                },
                rule_index: ri,
                decl_pos: di,
            };
            for q in names.iter().filter(|q| affects(&d.property, q)) {
                match style.props.get(q) {
                    Some((_, old)) if *old > w => {}
                    _ => {
                        style.props.insert(q.clone(), (d.clone(), w));
                    }
                }
            }
        }
    }
    style
}

#[cfg(test)]
mod tests {
    use super::super::tree::Label;
    use super::*;
    use crate::stylesheet::parse_stylesheet;

    fn rules(css: &str) -> Vec<Rule> {
        parse_stylesheet(css).unwrap().rules().cloned().collect()
    }

    fn values(t: &DocumentTree, n: usize, css: &str) -> Vec<String> {
        compute_cascade(t, n, None, &rules(css)).values().into_values().collect()
    }

    #[test]
    fn specificity_beats_order() {
        let t = DocumentTree::new(Label::element("li").with_attr("class", "fruit").with_attr("id", "apple"));
        let css = "#apple{color:blue;font-size:small}.fruit{color:red;font-size:large}";
        assert_eq!(values(&t, 0, css), vec!["color:blue", "font-size:small"]);
    }

    #[test]
    fn order_breaks_ties() {
        let t = DocumentTree::new(Label::element("p").with_attr("class", "b c"));
        assert_eq!(values(&t, 0, ".b{color:green}.c{color:red}"), vec!["color:red"]);
        assert_eq!(values(&t, 0, ".c{color:red}.b{color:green}"), vec!["color:green"]);
    }

    #[test]
    fn important_and_shorthands() {
        let t = DocumentTree::new(Label::element("p").with_attr("id", "x"));
        assert_eq!(values(&t, 0, "p{color:red!important}#x{color:blue}"), vec!["color:red!important"]);
        let s = compute_cascade(&t, 0, None, &rules("p{margin-left:1px}p{margin:0}"));
        assert_eq!(s.values()["margin-left"], "margin:0");
        let s = compute_cascade(&t, 0, None, &rules("p{margin:0}p{margin-left:1px}"));
        assert_eq!(s.values()["margin-left"], "margin-left:1px");
        assert_eq!(s.values()["margin"], "margin:0");
    }

    #[test]
    fn empty_sheet_and_pseudo_elements() {
        let t = DocumentTree::new(Label::element("p"));
        assert!(compute_cascade(&t, 0, None, &[]).props.is_empty());
        let r = rules("p::before{content:\"x\"}p{color:red}");
        assert_eq!(compute_cascade(&t, 0, Some(PseudoElement::Before), &r).props.len(), 1);
        assert_eq!(compute_cascade(&t, 0, None, &r).props.len(), 1);
    }
}
