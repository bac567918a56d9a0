//! Canonical serialization of selectors.
//!
//! Element names are lowercase, combinators other than descendant carry no
//! surrounding whitespace, attribute values are written bare when they are
//! valid identifiers and double-quoted otherwise, and `an+b` formulas use the
//! shortest equivalent spelling.

use super::ast::*;
use std::fmt::{self, Write};

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || !c.is_ascii()
}

fn is_name_char(c: char) -> bool {
    is_name_start(c) || c.is_ascii_digit() || c == '-'
}

/// True when `s` can be written as a CSS identifier without escapes.
pub fn is_plain_ident(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    let mut chars = body.chars();
    match chars.next() {
        Some(c) if is_name_start(c) => {}
        Some('-') if s.starts_with('-') => {}
        _ => return false,
    }
    chars.all(is_name_char)
}

fn write_escaped_char(f: &mut impl Write, c: char) -> fmt::Result {
    if c.is_ascii_graphic() && !c.is_ascii_hexdigit() {
        write!(f, "\\{c}")
    } else {
        write!(f, "\\{:x} ", c as u32)
    }
}

/// Write an identifier, escaping characters that would break it.
pub fn write_ident(f: &mut impl Write, s: &str) -> fmt::Result {
    if is_plain_ident(s) {
        return f.write_str(s);
    }
    for (i, c) in s.chars().enumerate() {
        let ok = if i == 0 {
            is_name_start(c) || (c == '-' && s.len() > 1 && !s[1..].starts_with(|d: char| d.is_ascii_digit()))
        } else {
            is_name_char(c)
        };
        if ok {
            f.write_char(c)?;
        } else {
            write_escaped_char(f, c)?;
        }
    }
    Ok(())
}

fn write_name_chars(f: &mut impl Write, s: &str) -> fmt::Result {
    for c in s.chars() {
        if is_name_char(c) {
            f.write_char(c)?;
        } else {
            write_escaped_char(f, c)?;
        }
    }
    Ok(())
}

fn write_value(f: &mut impl Write, v: &str) -> fmt::Result {
    if is_plain_ident(v) {
        return f.write_str(v);
    }
    f.write_char('"')?;
    for c in v.chars() {
        match c {
            '"' | '\\' => write!(f, "\\{c}")?,
            '\n' => f.write_str("\\a ")?,
            _ => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

/// Render `an+b` minimally.
pub fn format_anb(a: i64, b: i64) -> String {
    let mut s = String::new();
    match a {
        0 => return b.to_string(),
        1 => s.push('n'),
        -1 => s.push_str("-n"),
        _ => s.push_str(&format!("{a}n")),
    }
    match b.cmp(&0) {
        std::cmp::Ordering::Greater => s.push_str(&format!("+{b}")),
        std::cmp::Ordering::Less => s.push_str(&b.to_string()),
        std::cmp::Ordering::Equal => {}
    }
    s
}

impl fmt::Display for TypeSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeSelector::Any => f.write_char('*'),
            TypeSelector::AnyInNs(ns) => {
                write_ident(f, ns)?;
                f.write_str("|*")
            }
            TypeSelector::Element(e) => write_ident(f, e),
            TypeSelector::NsElement(ns, e) => {
                write_ident(f, ns)?;
                f.write_char('|')?;
                write_ident(f, e)
            }
        }
    }
}

impl fmt::Display for AttrSel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.ns, &self.test, self.form) {
            (AttrNs::Lang, Some((AttrOp::DashMatch, v)), _) => {
                f.write_str(":lang(")?;
                write_ident(f, v)?;
                return f.write_char(')');
            }
            (AttrNs::Null, Some((AttrOp::Includes, v)), AttrForm::Class)
                if self.name == "class" && !v.is_empty() =>
            {
                f.write_char('.')?;
                return write_ident(f, v);
            }
            (AttrNs::Null, Some((AttrOp::Equals, v)), AttrForm::Id) if self.name == "id" && !v.is_empty() => {
                f.write_char('#')?;
                return write_name_chars(f, v);
            }
            _ => {}
        }
        f.write_char('[')?;
        match &self.ns {
            AttrNs::Null => {}
            AttrNs::Named(ns) => {
                write_ident(f, ns)?;
                f.write_char('|')?;
            }
            AttrNs::Any => f.write_str("*|")?,
            AttrNs::Lang => f.write_str("lang|")?,
        }
        write_ident(f, &self.name)?;
        if let Some((op, v)) = &self.test {
            f.write_str(op.symbol())?;
            write_value(f, v)?;
        }
        f.write_char(']')
    }
}

impl fmt::Display for Positional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Positional::OnlyChild => f.write_str(":only-child"),
            Positional::OnlyOfType => f.write_str(":only-of-type"),
            Positional::Nth { kind, a, b, spelling } => {
                match (spelling, a, b) {
                    (NthSpelling::FirstOrLast, 0, 1) => {
                        let name = match kind {
                            NthKind::Child => "first-child",
                            NthKind::LastChild => "last-child",
                            NthKind::OfType => "first-of-type",
                            NthKind::LastOfType => "last-of-type",
                        };
                        return write!(f, ":{name}");
                    }
                    (NthSpelling::Odd, 2, 1) => return write!(f, ":{}(odd)", kind.name()),
                    (NthSpelling::Even, 2, 0) => return write!(f, ":{}(even)", kind.name()),
                    _ => {}
                }
                write!(f, ":{}({})", kind.name(), format_anb(*a, *b))
            }
        }
    }
}

impl fmt::Display for Simple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Simple::Attr(a) => a.fmt(f),
            Simple::Pseudo(p) => write!(f, ":{}", p.name()),
            Simple::Positional(p) => p.fmt(f),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Is(s) => s.fmt(f),
            Condition::Not(Negated::Type(t)) => write!(f, ":not({t})"),
            Condition::Not(Negated::Simple(s)) => write!(f, ":not({s})"),
        }
    }
}

impl fmt::Display for NodeSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ty != TypeSelector::Any || self.conds.is_empty() {
            self.ty.fmt(f)?;
        }
        for c in &self.conds {
            c.fmt(f)?;
        }
        Ok(())
    }
}

impl fmt::Display for Combinator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Combinator::Descendant => " ",
            Combinator::Child => ">",
            Combinator::Neighbour => "+",
            Combinator::Sibling => "~",
        })
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.compounds.iter().enumerate() {
            if i > 0 {
                self.combinators[i - 1].fmt(f)?;
            }
            n.fmt(f)?;
        }
        if let Some(pe) = self.pseudo_element {
            write!(f, ":{}", pe.name())?;
        }
        Ok(())
    }
}

/// Weight of a piece of CSS text: non-whitespace characters plus one separator.
pub fn text_weight(text: &str) -> usize {
    text.chars().filter(|c| !c.is_whitespace()).count() + 1
}

/// Weight of a selector under canonical serialization.
pub fn selector_text_length(s: &Selector) -> usize {
    text_weight(&s.to_string())
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_selector;
    use super::*;

    fn canon(s: &str) -> String {
        parse_selector(s).unwrap().to_string()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canon("DIV   >  P"), "div>p");
        assert_eq!(canon("#heading  h1"), "#heading h1");
        assert_eq!(canon("a ~ b + c"), "a~b+c");
        assert_eq!(canon("*.x"), ".x");
        assert_eq!(canon("*"), "*");
        assert_eq!(canon("[title='hello']"), "[title=hello]");
        assert_eq!(canon("[title='a b']"), "[title=\"a b\"]");
        assert_eq!(canon("li:nth-child( 2n + 0 )"), "li:nth-child(2n)");
        assert_eq!(canon("li:nth-child(-n+3)"), "li:nth-child(-n+3)");
        assert_eq!(canon("li:nth-child(odd)"), "li:nth-child(odd)");
        assert_eq!(canon("p:first-child"), "p:first-child");
        assert_eq!(canon(":lang(en)"), ":lang(en)");
        assert_eq!(canon("p::first-line"), "p:first-line");
        assert_eq!(canon(":not( * )"), ":not(*)");
        assert_eq!(canon("svg|*"), "svg|*");
        assert_eq!(canon("|a"), "|a");
        assert_eq!(canon("[*|x]"), "[*|x]");
        assert_eq!(canon("[class~=x]"), "[class~=x]");
    }

    #[test]
    fn weights() {
        assert_eq!(selector_text_length(&parse_selector("#orange").unwrap()), 8);
        assert_eq!(selector_text_length(&parse_selector("*").unwrap()), 2);
        assert_eq!(text_weight("color:red"), 10);
    }

    #[test]
    fn anb_minimal() {
        assert_eq!(format_anb(0, 1), "1");
        assert_eq!(format_anb(1, 0), "n");
        assert_eq!(format_anb(-1, 0), "-n");
        assert_eq!(format_anb(2, -1), "2n-1");
        assert_eq!(format_anb(0, -2), "-2");
    }

    #[test]
    fn escaped_idents_round_trip() {
        let s = parse_selector(".a\\:b #x\\.y").unwrap();
        let t = s.to_string();
        assert_eq!(parse_selector(&t).unwrap(), s);
    }
}
