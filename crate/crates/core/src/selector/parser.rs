//! Recursive-descent parser for CSS3 selectors.

use super::ast::*;
use thiserror::Error;

/// Error produced when a selector cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("selector parse error at byte {pos}: {msg} (in {input:?})")]
pub struct ParseError {
    pub input: String,
    pub pos: usize,
    pub msg: String,
}

/// Parse a single selector (no top-level commas).
pub fn parse_selector(input: &str) -> Result<Selector, ParseError> {
    let mut p = Parser::new(input);
    p.skip_ws();
    let sel = p.selector()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(sel)
}

/// Parse a comma separated selector group.
pub fn parse_selector_list(input: &str) -> Result<Vec<Selector>, ParseError> {
    let mut p = Parser::new(input);
    let mut out = Vec::new();
    loop {
        p.skip_ws();
        out.push(p.selector()?);
        p.skip_ws();
        if p.at_end() {
            return Ok(out);
        }
        if !p.eat(',') {
            return Err(p.err("expected ',' between selectors"));
        }
    }
}

/// Split a selector group at top-level commas without parsing the parts.
pub fn split_selector_list(input: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut quote: Option<char> = None;
    let mut start = 0;
    let mut escaped = false;
    for (i, c) in input.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match c {
            '\\' => escaped = true,
            _ if quote == Some(c) => quote = None,
            _ if quote.is_some() => {}
            '"' | '\'' => quote = Some(c),
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(input[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(input[start..].trim());
    parts
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || !c.is_ascii()
}

fn is_name_char(c: char) -> bool {
    is_name_start(c) || c.is_ascii_digit() || c == '-'
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn err(&self, msg: &str) -> ParseError {
        ParseError {
            input: self.src.to_string(),
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek2(&self) -> Option<char> {
        self.rest().chars().nth(1)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) -> bool {
        let start = self.pos;
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.rest().starts_with("/*") => match self.rest()[2..].find("*/") {
                    Some(end) => self.pos += end + 4,
                    None => self.pos = self.src.len(),
                },
                _ => break,
            }
        }
        self.pos > start
    }

    /// Read one possibly escaped character of an identifier.
    fn escape(&mut self) -> Result<char, ParseError> {
        // Caller has consumed the backslash.
        let mut hex = String::new();
        while hex.len() < 6 {
            match self.peek() {
                Some(c) if c.is_ascii_hexdigit() => {
                    hex.push(c);
                    self.bump();
                }
                _ => break,
            }
        }
        if hex.is_empty() {
            return match self.bump() {
                Some('\n') | None => Err(self.err("invalid escape")),
                Some(c) => Ok(c),
            };
        }
        if self.peek().is_some_and(|c| c.is_whitespace()) {
            self.bump();
        }
        let v = u32::from_str_radix(&hex, 16).map_err(|_| self.err("bad hex escape"))?;
        Ok(char::from_u32(v).filter(|&c| c != '\0').unwrap_or('\u{FFFD}'))
    }

    fn ident_opt(&mut self) -> Result<Option<String>, ParseError> {
        let start = self.pos;
        let mut out = String::new();
        if self.peek() == Some('-') {
            out.push('-');
            self.bump();
        }
        match self.peek() {
            Some('\\') => {
                self.bump();
                out.push(self.escape()?);
            }
            Some('-') if out == "-" => {
                out.push('-');
                self.bump();
            }
            Some(c) if is_name_start(c) => {
                out.push(c);
                self.bump();
            }
            _ => {
                self.pos = start;
                return Ok(None);
            }
        }
        loop {
            match self.peek() {
                Some('\\') => {
                    self.bump();
                    out.push(self.escape()?);
                }
                Some(c) if is_name_char(c) => {
                    out.push(c);
                    self.bump();
                }
                _ => break,
            }
        }
        Ok(Some(out))
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.ident_opt()?.ok_or_else(|| self.err("expected identifier"))
    }

    fn string(&mut self) -> Result<String, ParseError> {
        let q = self.bump().ok_or_else(|| self.err("expected string"))?;
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated string")),
                Some(c) if c == q => return Ok(out),
                Some('\\') => {
                    if self.eat('\n') {
                        continue;
                    }
                    out.push(self.escape()?);
                }
                Some(c) => out.push(c),
            }
        }
    }

    fn selector(&mut self) -> Result<Selector, ParseError> {
        let mut compounds = Vec::new();
        let mut combinators = Vec::new();
        let (first, pe) = self.compound()?;
        compounds.push(first);
        let mut pseudo_element = pe;
        loop {
            let save = self.pos;
            let had_ws = self.skip_ws();
            let comb = match self.peek() {
                Some('>') => Some(Combinator::Child),
                Some('+') => Some(Combinator::Neighbour),
                Some('~') => Some(Combinator::Sibling),
                _ => None,
            };
            let comb = match comb {
                Some(c) => {
                    self.bump();
                    self.skip_ws();
                    c
                }
                None => {
                    if !had_ws || self.at_end() || matches!(self.peek(), Some(',') | Some(')')) {
                        self.pos = save;
                        break;
                    }
                    Combinator::Descendant
                }
            };
            if pseudo_element.is_some() {
                return Err(self.err("pseudo-element must be last in a selector"));
            }
            let (next, pe) = self.compound()?;
            combinators.push(comb);
            compounds.push(next);
            pseudo_element = pe;
        }
        Ok(Selector {
            compounds,
            combinators,
            pseudo_element,
        })
    }

    /// Parse `ns|`, `*|`, `|` prefix followed by a name or `*`.
    /// Returns (prefix, name) where prefix is None when absent, Some(None) for `*|`
    /// and Some(Some(ns)) otherwise; name None stands for `*`.
    #[allow(clippy::type_complexity)]
    fn qualified_name(
        &mut self,
        allow_star_name: bool,
    ) -> Result<Option<(Option<Option<String>>, Option<String>)>, ParseError> {
        let start = self.pos;
        let first: Option<Option<String>> = if self.peek() == Some('*') {
            self.bump();
            Some(None)
        } else if self.peek() == Some('|') {
            None
        } else {
            match self.ident_opt()? {
                Some(id) => Some(Some(id)),
                None => return Ok(None),
            }
        };
        if self.peek() == Some('|') && self.peek2() != Some('=') {
            self.bump();
            let prefix = match first {
                None => Some(String::new()),
                Some(None) => None,
                Some(Some(ns)) => Some(ns),
            };
            let name = if self.peek() == Some('*') {
                if !allow_star_name {
                    return Err(self.err("'*' is not a valid attribute name"));
                }
                self.bump();
                None
            } else {
                Some(self.ident()?)
            };
            return Ok(Some((Some(prefix), name)));
        }
        match first {
            None => {
                self.pos = start;
                Ok(None)
            }
            Some(None) if !allow_star_name => Err(self.err("'*' is not a valid attribute name")),
            Some(name) => Ok(Some((None, name))),
        }
    }

    fn type_selector(&mut self) -> Result<Option<TypeSelector>, ParseError> {
        let Some((prefix, name)) = self.qualified_name(true)? else {
            return Ok(None);
        };
        let name = name.map(|n| n.to_ascii_lowercase());
        Ok(Some(match (prefix, name) {
            (None, None) | (Some(None), None) => TypeSelector::Any,
            (None, Some(e)) | (Some(None), Some(e)) => TypeSelector::Element(e),
            (Some(Some(ns)), None) => TypeSelector::AnyInNs(ns),
            (Some(Some(ns)), Some(e)) => TypeSelector::NsElement(ns, e),
        }))
    }

    fn compound(&mut self) -> Result<(NodeSelector, Option<PseudoElement>), ParseError> {
        let start = self.pos;
        let ty = self.type_selector()?;
        let mut node = NodeSelector {
            ty: ty.clone().unwrap_or(TypeSelector::Any),
            conds: Vec::new(),
        };
        let mut pseudo_element = None;
        loop {
            match self.peek() {
                Some('#') | Some('.') | Some('[') => {
                    if pseudo_element.is_some() {
                        return Err(self.err("pseudo-element must be last in a selector"));
                    }
                    let s = self.simple()?;
                    node.conds.push(Condition::Is(s));
                }
                Some(':') => {
                    if pseudo_element.is_some() {
                        return Err(self.err("pseudo-element must be last in a selector"));
                    }
                    match self.pseudo()? {
                        PseudoItem::Cond(c) => node.conds.push(c),
                        PseudoItem::Element(pe) => pseudo_element = Some(pe),
                    }
                }
                _ => break,
            }
        }
        if self.pos == start {
            return Err(self.err("expected a node selector"));
        }
        Ok((node, pseudo_element))
    }

    fn simple(&mut self) -> Result<Simple, ParseError> {
        match self.peek() {
            Some('#') => {
                self.bump();
                let mut name = String::new();
                loop {
                    match self.peek() {
                        Some('\\') => {
                            self.bump();
                            name.push(self.escape()?);
                        }
                        Some(c) if is_name_char(c) => {
                            name.push(c);
                            self.bump();
                        }
                        _ => break,
                    }
                }
                if name.is_empty() {
                    return Err(self.err("expected id name"));
                }
                Ok(Simple::Attr(AttrSel::id(&name)))
            }
            Some('.') => {
                self.bump();
                let name = self.ident()?;
                Ok(Simple::Attr(AttrSel::class(&name)))
            }
            Some('[') => {
                self.bump();
                self.skip_ws();
                let Some((prefix, name)) = self.qualified_name(false)? else {
                    return Err(self.err("expected attribute name"));
                };
                let name = name.expect("attribute names are never '*'");
                let ns = match prefix {
                    None => AttrNs::Null,
                    Some(None) => AttrNs::Any,
                    Some(Some(ns)) if ns.is_empty() => AttrNs::Null,
                    Some(Some(ns)) => AttrNs::Named(ns),
                };
                self.skip_ws();
                let op = match self.peek() {
                    Some(']') => None,
                    Some('=') => Some(AttrOp::Equals),
                    Some(c) => {
                        let op = match c {
                            '~' => AttrOp::Includes,
                            '|' => AttrOp::DashMatch,
                            '^' => AttrOp::Prefix,
                            '$' => AttrOp::Suffix,
                            '*' => AttrOp::Substring,
                            _ => return Err(self.err("expected attribute operator")),
                        };
                        self.bump();
                        if self.peek() != Some('=') {
                            return Err(self.err("expected '='"));
                        }
                        Some(op)
                    }
                    None => return Err(self.err("unterminated attribute selector")),
                };
                let test = match op {
                    None => None,
                    Some(op) => {
                        self.bump();
                        self.skip_ws();
                        let v = match self.peek() {
                            Some('"') | Some('\'') => self.string()?,
                            _ => self.ident()?,
                        };
                        self.skip_ws();
                        Some((op, v))
                    }
                };
                if !self.eat(']') {
                    return Err(self.err("expected ']'"));
                }
                Ok(Simple::Attr(AttrSel {
                    ns,
                    name,
                    test,
                    form: AttrForm::Bracket,
                }))
            }
            _ => Err(self.err("expected simple selector")),
        }
    }

    fn pseudo(&mut self) -> Result<PseudoItem, ParseError> {
        self.bump(); // ':'
        let double = self.eat(':');
        let name = self.ident()?.to_ascii_lowercase();
        let pe = match name.as_str() {
            "first-line" => Some(PseudoElement::FirstLine),
            "first-letter" => Some(PseudoElement::FirstLetter),
            "before" => Some(PseudoElement::Before),
            "after" => Some(PseudoElement::After),
            _ => None,
        };
        if let Some(pe) = pe {
            return Ok(PseudoItem::Element(pe));
        }
        if double {
            return Err(self.err("unknown pseudo-element"));
        }
        if let Some(pc) = PseudoClass::from_name(&name) {
            return Ok(PseudoItem::Cond(Condition::Is(Simple::Pseudo(pc))));
        }
        let first_last = |kind| {
            Ok(PseudoItem::Cond(Condition::Is(Simple::Positional(Positional::Nth {
                kind,
                a: 0,
                b: 1,
                spelling: NthSpelling::FirstOrLast,
            }))))
        };
        match name.as_str() {
            "first-child" => return first_last(NthKind::Child),
            "last-child" => return first_last(NthKind::LastChild),
            "first-of-type" => return first_last(NthKind::OfType),
            "last-of-type" => return first_last(NthKind::LastOfType),
            "only-child" => {
                return Ok(PseudoItem::Cond(Condition::Is(Simple::Positional(
                    Positional::OnlyChild,
                ))))
            }
            "only-of-type" => {
                return Ok(PseudoItem::Cond(Condition::Is(Simple::Positional(
                    Positional::OnlyOfType,
                ))))
            }
            _ => {}
        }
        if !self.eat('(') {
            return Err(self.err(&format!("unknown pseudo-class :{name}")));
        }
        self.skip_ws();
        let item = match name.as_str() {
            "nth-child" | "nth-last-child" | "nth-of-type" | "nth-last-of-type" => {
                let kind = match name.as_str() {
                    "nth-child" => NthKind::Child,
                    "nth-last-child" => NthKind::LastChild,
                    "nth-of-type" => NthKind::OfType,
                    _ => NthKind::LastOfType,
                };
                let (a, b, spelling) = self.an_plus_b()?;
                PseudoItem::Cond(Condition::Is(Simple::Positional(Positional::Nth {
                    kind,
                    a,
                    b,
                    spelling,
                })))
            }
            "lang" => {
                let v = self.ident()?;
                PseudoItem::Cond(Condition::Is(Simple::Attr(AttrSel {
                    ns: AttrNs::Lang,
                    name: "lang".into(),
                    test: Some((AttrOp::DashMatch, v)),
                    form: AttrForm::Bracket,
                })))
            }
            "not" => {
                let neg = self.negation_arg()?;
                PseudoItem::Cond(Condition::Not(neg))
            }
            _ => return Err(self.err(&format!("unknown functional pseudo-class :{name}()"))),
        };
        self.skip_ws();
        if !self.eat(')') {
            return Err(self.err("expected ')'"));
        }
        Ok(item)
    }

    fn negation_arg(&mut self) -> Result<Negated, ParseError> {
        let arg = if let Some(ty) = self.type_selector()? {
            Negated::Type(ty)
        } else if self.peek() == Some(':') {
            match self.pseudo()? {
                PseudoItem::Element(_) => return Err(self.err("pseudo-element inside :not()")),
                PseudoItem::Cond(Condition::Is(s)) => Negated::Simple(s),
                PseudoItem::Cond(Condition::Not(_)) => {
                    return Err(self.err("nested :not() is not allowed"))
                }
            }
        } else {
            Negated::Simple(self.simple()?)
        };
        self.skip_ws();
        if self.peek() != Some(')') {
            return Err(self.err(":not() takes a single simple selector"));
        }
        Ok(arg)
    }

    /// Parse `an+b`, `even`, `odd` or an integer.
    fn an_plus_b(&mut self) -> Result<(i64, i64, NthSpelling), ParseError> {
        let start = self.pos;
        let end = self.rest().find(')').map(|e| self.pos + e).ok_or_else(|| self.err("expected ')'"))?;
        let text: String = self.src[start..end]
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            .to_ascii_lowercase();
        let res = match text.as_str() {
            "even" => (2, 0, NthSpelling::Even),
            "odd" => (2, 1, NthSpelling::Odd),
            _ => {
                let (a, b) = parse_anb(&text).ok_or_else(|| self.err("malformed an+b"))?;
                (a, b, NthSpelling::Formula)
            }
        };
        self.pos = end;
        Ok(res)
    }
}

fn parse_int(s: &str) -> Option<i64> {
    if s.is_empty() || !s.trim_start_matches(['+', '-']).chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if s.matches(['+', '-']).count() > 1 {
        return None;
    }
    s.parse().ok()
}

fn parse_anb(t: &str) -> Option<(i64, i64)> {
    match t.find('n') {
        None => Some((0, parse_int(t)?)),
        Some(i) => {
            let a = match &t[..i] {
                "" | "+" => 1,
                "-" => -1,
                s => parse_int(s)?,
            };
            let rest = &t[i + 1..];
            let b = if rest.is_empty() {
                0
            } else {
                if !rest.starts_with(['+', '-']) {
                    return None;
                }
                parse_int(rest)?
            };
            Some((a, b))
        }
    }
}

enum PseudoItem {
    Cond(Condition),
    Element(PseudoElement),
}
