//! CSS3 specificity.
//!
//! | component | counts                                                        |
//! |-----------|---------------------------------------------------------------|
//! | `a`       | `#id` shorthands                                              |
//! | `b`       | classes, attribute tests, pseudo-classes, `:lang`, counters   |
//! | `c`       | element type selectors and pseudo-elements                    |
//!
//! The universal selector counts nothing. The argument of `:not(...)` is
//! counted as if it stood alone; the negation itself is not.

use super::ast::*;
use serde::Serialize;

/// Specificity compared lexicographically as `(important, a, b, c)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Specificity {
    pub important: bool,
    pub ids: u32,
    pub classes: u32,
    pub types: u32,
}

impl Specificity {
    pub fn tuple(&self) -> (u32, u32, u32, u32) {
        (self.important as u32, self.ids, self.classes, self.types)
    }
}

fn count_type(t: &TypeSelector, sp: &mut Specificity) {
    if matches!(t, TypeSelector::Element(_) | TypeSelector::NsElement(..)) {
        sp.types += 1;
    }
}

fn count_simple(s: &Simple, sp: &mut Specificity) {
    match s {
        Simple::Attr(a) if a.form == AttrForm::Id => sp.ids += 1,
        _ => sp.classes += 1,
    }
}

/// Specificity of `s` for a declaration with the given `!important` flag.
pub fn specificity(s: &Selector, important: bool) -> Specificity {
    let mut sp = Specificity {
        important,
        ..Default::default()
    };
    for n in &s.compounds {
        count_type(&n.ty, &mut sp);
        for c in &n.conds {
            match c {
                Condition::Is(s) => count_simple(s, &mut sp),
                Condition::Not(Negated::Type(t)) => count_type(t, &mut sp),
                Condition::Not(Negated::Simple(s)) => count_simple(s, &mut sp),
            }
        }
    }
    if s.pseudo_element.is_some() {
        sp.types += 1;
    }
    sp
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_selector;
    use super::*;

    fn sp(s: &str) -> (u32, u32, u32, u32) {
        specificity(&parse_selector(s).unwrap(), false).tuple()
    }

    #[test]
    fn counts() {
        assert_eq!(sp("*"), (0, 0, 0, 0));
        assert_eq!(sp("h1.fruit.vegetable"), (0, 0, 2, 1));
        assert_eq!(sp("#apple"), (0, 1, 0, 0));
        assert_eq!(sp("[id=apple]"), (0, 0, 1, 0));
        assert_eq!(sp("ul li:not(.x)"), (0, 0, 1, 2));
        assert_eq!(sp(":not(p)"), (0, 0, 0, 1));
        assert_eq!(sp("p::before"), (0, 0, 0, 2));
        assert_eq!(sp("a:hover:lang(en):first-child"), (0, 0, 3, 1));
        assert!(sp("#apple") > sp(".fruit"));
        assert!(specificity(&parse_selector("*").unwrap(), true) > specificity(&parse_selector("#a").unwrap(), false));
    }
}
