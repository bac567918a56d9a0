//! Abstract syntax of CSS3 selectors.
//!
//! A [`Selector`] is a chain of [`NodeSelector`]s joined by [`Combinator`]s,
//! optionally terminated by a [`PseudoElement`]. Class and ID selectors are
//! represented as attribute selectors (`[class~=c]`, `[id=i]`) that remember
//! their shorthand spelling so that serialization and specificity stay faithful.

use serde::Serialize;

/// Combinator between two node selectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Combinator {
    /// Whitespace: the right node is a descendant of the left one.
    Descendant,
    /// `>`: the right node is a child of the left one.
    Child,
    /// `+`: the right node immediately follows the left one.
    Neighbour,
    /// `~`: the right node is some later sibling of the left one.
    Sibling,
}

/// Pseudo-element terminating a selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PseudoElement {
    FirstLine,
    FirstLetter,
    Before,
    After,
}

impl PseudoElement {
    pub fn name(self) -> &'static str {
        match self {
            PseudoElement::FirstLine => "first-line",
            PseudoElement::FirstLetter => "first-letter",
            PseudoElement::Before => "before",
            PseudoElement::After => "after",
        }
    }

    /// `::first-line` and `::first-letter` only exist on nodes with content.
    pub fn requires_content(self) -> bool {
        matches!(self, PseudoElement::FirstLine | PseudoElement::FirstLetter)
    }
}

/// Type part of a node selector. A namespace of `""` is the null namespace.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TypeSelector {
    /// `*` (equivalently `*|*`).
    Any,
    /// `ns|*`.
    AnyInNs(String),
    /// `e` (equivalently `*|e`): element `e` in any namespace.
    Element(String),
    /// `ns|e`.
    NsElement(String, String),
}

/// Namespace component of an attribute selector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AttrNs {
    /// No prefix or `|`: the attribute carries no namespace.
    Null,
    /// `ns|a`.
    Named(String),
    /// `*|a`: some (or, under negation, every) namespace.
    Any,
    /// Reserved namespace used to express `:lang(l)` as `[lang|=l]`.
    Lang,
}

/// Attribute value operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AttrOp {
    /// `=`
    Equals,
    /// `~=`
    Includes,
    /// `|=`
    DashMatch,
    /// `^=`
    Prefix,
    /// `$=`
    Suffix,
    /// `*=`
    Substring,
}

impl AttrOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AttrOp::Equals => "=",
            AttrOp::Includes => "~=",
            AttrOp::DashMatch => "|=",
            AttrOp::Prefix => "^=",
            AttrOp::Suffix => "$=",
            AttrOp::Substring => "*=",
        }
    }
}

/// Surface spelling of an attribute selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AttrForm {
    Bracket,
    Class,
    Id,
}

/// Attribute presence or value test.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AttrSel {
    pub ns: AttrNs,
    pub name: String,
    /// `None` for a presence test `[a]`.
    pub test: Option<(AttrOp, String)>,
    pub form: AttrForm,
}

impl AttrSel {
    pub fn class(value: &str) -> Self {
        AttrSel {
            ns: AttrNs::Null,
            name: "class".into(),
            test: Some((AttrOp::Includes, value.into())),
            form: AttrForm::Class,
        }
    }

    pub fn id(value: &str) -> Self {
        AttrSel {
            ns: AttrNs::Null,
            name: "id".into(),
            test: Some((AttrOp::Equals, value.into())),
            form: AttrForm::Id,
        }
    }

    /// True for a positive equality test on the null-namespace `id` attribute.
    pub fn required_id(&self) -> Option<&str> {
        match (&self.ns, self.name.as_str(), &self.test) {
            (AttrNs::Null, "id", Some((AttrOp::Equals, v))) => Some(v),
            _ => None,
        }
    }
}

/// The eleven non-positional pseudo-classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PseudoClass {
    Link,
    Visited,
    Hover,
    Active,
    Focus,
    Target,
    Enabled,
    Disabled,
    Checked,
    Root,
    Empty,
}

impl PseudoClass {
    pub const ALL: [PseudoClass; 11] = [
        PseudoClass::Link,
        PseudoClass::Visited,
        PseudoClass::Hover,
        PseudoClass::Active,
        PseudoClass::Focus,
        PseudoClass::Target,
        PseudoClass::Enabled,
        PseudoClass::Disabled,
        PseudoClass::Checked,
        PseudoClass::Root,
        PseudoClass::Empty,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PseudoClass::Link => "link",
            PseudoClass::Visited => "visited",
            PseudoClass::Hover => "hover",
            PseudoClass::Active => "active",
            PseudoClass::Focus => "focus",
            PseudoClass::Target => "target",
            PseudoClass::Enabled => "enabled",
            PseudoClass::Disabled => "disabled",
            PseudoClass::Checked => "checked",
            PseudoClass::Root => "root",
            PseudoClass::Empty => "empty",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        PseudoClass::ALL.iter().copied().find(|p| p.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Which counting pseudo-class an `an+b` condition uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum NthKind {
    Child,
    LastChild,
    OfType,
    LastOfType,
}

impl NthKind {
    pub fn name(self) -> &'static str {
        match self {
            NthKind::Child => "nth-child",
            NthKind::LastChild => "nth-last-child",
            NthKind::OfType => "nth-of-type",
            NthKind::LastOfType => "nth-last-of-type",
        }
    }

    pub fn is_of_type(self) -> bool {
        matches!(self, NthKind::OfType | NthKind::LastOfType)
    }

    pub fn is_from_end(self) -> bool {
        matches!(self, NthKind::LastChild | NthKind::LastOfType)
    }
}

/// Surface spelling of a counting pseudo-class, kept for round-tripping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum NthSpelling {
    /// `:nth-*(an+b)`.
    Formula,
    /// `:first-child`, `:last-child`, `:first-of-type`, `:last-of-type`.
    FirstOrLast,
    /// `:nth-*(even)`.
    Even,
    /// `:nth-*(odd)`.
    Odd,
}

/// Positional (counting) pseudo-classes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Positional {
    Nth {
        kind: NthKind,
        a: i64,
        b: i64,
        spelling: NthSpelling,
    },
    OnlyChild,
    OnlyOfType,
}

impl Positional {
    pub fn nth(kind: NthKind, a: i64, b: i64) -> Self {
        Positional::Nth {
            kind,
            a,
            b,
            spelling: NthSpelling::Formula,
        }
    }

    pub fn is_of_type(&self) -> bool {
        match self {
            Positional::Nth { kind, .. } => kind.is_of_type(),
            Positional::OnlyChild => false,
            Positional::OnlyOfType => true,
        }
    }
}

/// A simple, negation-free condition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Simple {
    Attr(AttrSel),
    Pseudo(PseudoClass),
    Positional(Positional),
}

/// Argument of `:not(...)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Negated {
    Type(TypeSelector),
    Simple(Simple),
}

/// A condition of a node selector: a simple condition or a single negation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Condition {
    Is(Simple),
    Not(Negated),
}

impl Condition {
    pub fn not_any() -> Self {
        Condition::Not(Negated::Type(TypeSelector::Any))
    }

    pub fn not_empty() -> Self {
        Condition::Not(Negated::Simple(Simple::Pseudo(PseudoClass::Empty)))
    }
}

/// A node selector `τΘ`: type part plus a set of conditions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeSelector {
    pub ty: TypeSelector,
    pub conds: Vec<Condition>,
}

impl NodeSelector {
    pub fn any() -> Self {
        NodeSelector {
            ty: TypeSelector::Any,
            conds: Vec::new(),
        }
    }

    /// The unsatisfiable node selector `:not(*)`.
    pub fn nothing() -> Self {
        NodeSelector {
            ty: TypeSelector::Any,
            conds: vec![Condition::not_any()],
        }
    }

    /// True for the unconstrained selector `*`.
    pub fn is_any(&self) -> bool {
        self.ty == TypeSelector::Any && self.conds.is_empty()
    }

    /// Add a condition unless an identical one is present.
    pub fn push_cond(&mut self, c: Condition) {
        if !self.conds.contains(&c) {
            self.conds.push(c);
        }
    }
}

/// A complete selector: `σ1 op1 σ2 ... σn` plus optional pseudo-element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Selector {
    /// Node selectors from left to right; never empty.
    pub compounds: Vec<NodeSelector>,
    /// `combinators[i]` joins `compounds[i]` and `compounds[i + 1]`.
    pub combinators: Vec<Combinator>,
    pub pseudo_element: Option<PseudoElement>,
}

impl Selector {
    pub fn single(n: NodeSelector) -> Self {
        Selector {
            compounds: vec![n],
            combinators: Vec::new(),
            pseudo_element: None,
        }
    }

    /// Rightmost node selector: the one that matches the selected node.
    pub fn subject(&self) -> &NodeSelector {
        self.compounds.last().expect("selector chains are non-empty")
    }

    /// Iterate over every condition in the chain.
    pub fn all_conditions(&self) -> impl Iterator<Item = &Condition> {
        self.compounds.iter().flat_map(|c| c.conds.iter())
    }
}
