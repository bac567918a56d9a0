//! Stylesheet model and parser.
//!
//! A stylesheet is a sequence of style rules and opaque passthrough blocks.
//! At-rules such as `@media`, `@font-face` or `@import` are kept verbatim and
//! never take part in merging.

use crate::selector::{parse_selector, split_selector_list, Selector};
use serde::Serialize;
use std::fmt;
use thiserror::Error;

/// A single `property:value` declaration.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Declaration {
    pub property: String,
    pub value: String,
    pub important: bool,
}

impl Declaration {
    pub fn new(property: &str, value: &str, important: bool) -> Self {
        Declaration {
            property: property.to_string(),
            value: value.to_string(),
            important,
        }
    }

    /// Parse `prop:value[!important]`.
    pub fn parse(text: &str) -> Option<Self> {
        parse_declaration(text)
    }
}

impl fmt::Display for Declaration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.property, self.value)?;
        if self.important {
            f.write_str("!important")?;
        }
        Ok(())
    }
}

/// A style rule `selectors { declarations }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rule {
    pub selectors: Vec<Selector>,
    pub decls: Vec<Declaration>,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.selectors.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("{")?;
        for (i, d) in self.decls.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str("}")
    }
}

/// Top-level item of a stylesheet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Item {
    Rule(Rule),
    /// Verbatim text that is not optimized (at-rules, quarantined rules).
    Passthrough(String),
}

/// Parsed stylesheet.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stylesheet {
    pub items: Vec<Item>,
}

impl Stylesheet {
    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.items.iter().filter_map(|i| match i {
            Item::Rule(r) => Some(r),
            Item::Passthrough(_) => None,
        })
    }

    pub fn passthrough_count(&self) -> usize {
        self.items.iter().filter(|i| matches!(i, Item::Passthrough(_))).count()
    }

    /// Split the stylesheet into maximal runs of style rules separated by
    /// passthrough items.
    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        for item in &self.items {
            match item {
                Item::Rule(r) => cur.push(r.clone()),
                Item::Passthrough(t) => {
                    out.push(Segment::Rules(std::mem::take(&mut cur)));
                    out.push(Segment::Passthrough(t.clone()));
                }
            }
        }
        out.push(Segment::Rules(cur));
        out.retain(|s| !matches!(s, Segment::Rules(r) if r.is_empty()));
        out
    }

    pub fn from_segments(segs: &[Segment]) -> Self {
        let mut items = Vec::new();
        for s in segs {
            match s {
                Segment::Rules(rs) => items.extend(rs.iter().cloned().map(Item::Rule)),
                Segment::Passthrough(t) => items.push(Item::Passthrough(t.clone())),
            }
        }
        Stylesheet { items }
    }
}

/// A run of style rules or a single passthrough block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Segment {
    Rules(Vec<Rule>),
    Passthrough(String),
}

impl fmt::Display for Stylesheet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            match item {
                Item::Rule(r) if r.selectors.is_empty() || r.decls.is_empty() => {}
                Item::Rule(r) => write!(f, "{r}")?,
                Item::Passthrough(t) => f.write_str(t)?,
            }
        }
        Ok(())
    }
}

/// Stylesheet syntax error.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("CSS parse error at line {line}, column {col}: {msg}")]
pub struct CssError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// Parser options.
#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Keep rules that fail to parse as passthrough blocks instead of failing.
    pub lenient: bool,
}

/// Parse a stylesheet in strict mode.
pub fn parse_stylesheet(text: &str) -> Result<Stylesheet, CssError> {
    parse_stylesheet_with(text, ParseOptions::default())
}

/// Parse a stylesheet with explicit options.
pub fn parse_stylesheet_with(text: &str, opts: ParseOptions) -> Result<Stylesheet, CssError> {
    let mut sc = Scanner { src: text, pos: 0 };
    let mut items = Vec::new();
    loop {
        sc.skip_ws_and_comments();
        if sc.at_end() {
            break;
        }
        let start = sc.pos;
        if sc.peek() == Some('@') {
            let end = sc.scan_at_rule().map_err(|m| sc.error_at(start, &m))?;
            items.push(Item::Passthrough(compact(&text[start..end])));
            continue;
        }
        if sc.peek() == Some('}') {
            return Err(sc.error_at(start, "unexpected '}'"));
        }
        let brace = sc.scan_until_top_level('{').ok_or_else(|| sc.error_at(start, "expected '{'"))?;
        let prelude = &text[start..brace];
        sc.pos = brace + 1;
        let body_start = sc.pos;
        let close = sc
            .scan_block_end()
            .ok_or_else(|| sc.error_at(start, "unterminated block"))?;
        let body = &text[body_start..close];
        sc.pos = close + 1;
        match parse_rule(prelude, body) {
            Ok(rule) => items.push(Item::Rule(rule)),
            Err(msg) if opts.lenient => {
                log::warn!("quarantining unparsable rule: {msg}");
                items.push(Item::Passthrough(compact(&text[start..sc.pos])));
            }
            Err(msg) => return Err(sc.error_at(start, &msg)),
        }
    }
    Ok(Stylesheet { items })
}

fn parse_rule(prelude: &str, body: &str) -> Result<Rule, String> {
    let prelude = strip_comments(prelude);
    let mut selectors = Vec::new();
    for part in split_selector_list(&prelude) {
        selectors.push(parse_selector(part).map_err(|e| e.to_string())?);
    }
    let body = strip_comments(body);
    if body.contains('{') {
        return Err("nested blocks are not supported".into());
    }
    let mut decls = Vec::new();
    for part in split_top_level(&body, ';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        decls.push(parse_declaration(part).ok_or_else(|| format!("malformed declaration {part:?}"))?);
    }
    Ok(Rule { selectors, decls })
}

fn parse_declaration(part: &str) -> Option<Declaration> {
    let colon = part.find(':')?;
    let name = part[..colon].trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
        return None;
    }
    let property = if name.starts_with("--") {
        name.to_string()
    } else {
        name.to_ascii_lowercase()
    };
    let mut value = collapse_ws(part[colon + 1..].trim());
    let mut important = false;
    if let Some(bang) = find_top_level(&value, '!') {
        let flag: String = value[bang + 1..].chars().filter(|c| !c.is_whitespace()).collect();
        if flag.eq_ignore_ascii_case("important") {
            important = true;
            value = value[..bang].trim_end().to_string();
        }
    }
    if value.is_empty() && !property.starts_with("--") {
        return None;
    }
    Some(Declaration {
        property,
        value,
        important,
    })
}

/// Collapse whitespace runs outside strings to single spaces.
fn collapse_ws(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut quote: Option<char> = None;
    let mut escaped = false;
    let mut pending_space = false;
    for c in s.chars() {
        if quote.is_some() {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if Some(c) == quote {
                quote = None;
            }
            continue;
        }
        if c.is_whitespace() {
            pending_space = true;
            continue;
        }
        if pending_space && !out.is_empty() {
            out.push(' ');
        }
        pending_space = false;
        if c == '"' || c == '\'' {
            quote = Some(c);
        }
        out.push(c);
    }
    out
}

/// Remove comments and collapse whitespace of a passthrough block.
fn compact(s: &str) -> String {
    collapse_ws(&strip_comments(s))
}

fn strip_comments(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut quote: Option<char> = None;
    let mut escaped = false;
    let mut it = s.char_indices().peekable();
    while let Some((i, c)) = it.next() {
        if let Some(q) = quote {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == q {
                quote = None;
            }
            continue;
        }
        if c == '/' && s[i..].starts_with("/*") {
            match s[i + 2..].find("*/") {
                Some(e) => {
                    let stop = i + 2 + e + 2;
                    while it.peek().is_some_and(|(j, _)| *j < stop) {
                        it.next();
                    }
                    out.push(' ');
                }
                None => break,
            }
            continue;
        }
        if c == '"' || c == '\'' {
            quote = Some(c);
        }
        out.push(c);
    }
    out
}

fn find_top_level(s: &str, target: char) -> Option<usize> {
    let mut depth = 0i32;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
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
            _ if c == target && depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = s;
    while let Some(i) = find_top_level(rest, sep) {
        out.push(&rest[..i]);
        rest = &rest[i + sep.len_utf8()..];
    }
    out.push(rest);
    out
}

struct Scanner<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn error_at(&self, pos: usize, msg: &str) -> CssError {
        let before = &self.src[..pos.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        CssError {
            line,
            col,
            msg: msg.to_string(),
        }
    }

    fn skip_ws_and_comments(&mut self) {
        loop {
            let rest = &self.src[self.pos..];
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with("<!--") || trimmed.starts_with("-->") {
                self.pos += if trimmed.starts_with("<!--") { 4 } else { 3 };
                continue;
            }
            if trimmed.starts_with("/*") {
                match trimmed[2..].find("*/") {
                    Some(e) => self.pos += e + 4,
                    None => self.pos = self.src.len(),
                }
                continue;
            }
            break;
        }
    }

    /// Position of the first `target` at nesting depth zero, skipping strings and comments.
    fn scan_until_top_level(&self, target: char) -> Option<usize> {
        let mut depth = 0i32;
        let mut quote: Option<char> = None;
        let mut escaped = false;
        let mut it = self.src[self.pos..].char_indices();
        while let Some((off, c)) = it.next() {
            let i = self.pos + off;
            if escaped {
                escaped = false;
                continue;
            }
            match c {
                '\\' => escaped = true,
                _ if quote == Some(c) => quote = None,
                _ if quote.is_some() => {}
                '"' | '\'' => quote = Some(c),
                '/' if self.src[i..].starts_with("/*") => {
                    let e = self.src[i + 2..].find("*/")?;
                    let stop = i + 2 + e + 2;
                    for (o, _) in it.by_ref() {
                        if self.pos + o + 1 >= stop {
                            break;
                        }
                    }
                }
                '(' | '[' => depth += 1,
                ')' | ']' => depth -= 1,
                _ if c == target && depth == 0 => return Some(i),
                _ => {}
            }
        }
        None
    }

    /// With `pos` just after an opening brace, find the matching close brace.
    fn scan_block_end(&self) -> Option<usize> {
        let mut depth = 0i32;
        let mut quote: Option<char> = None;
        let mut escaped = false;
        let mut it = self.src[self.pos..].char_indices();
        while let Some((off, c)) = it.next() {
            let i = self.pos + off;
            if escaped {
                escaped = false;
                continue;
            }
            match c {
                '\\' => escaped = true,
                _ if quote == Some(c) => quote = None,
                _ if quote.is_some() => {}
                '"' | '\'' => quote = Some(c),
                '/' if self.src[i..].starts_with("/*") => {
                    let e = self.src[i + 2..].find("*/")?;
                    let stop = i + 2 + e + 2;
                    for (o, _) in it.by_ref() {
                        if self.pos + o + 1 >= stop {
                            break;
                        }
                    }
                }
                '{' => depth += 1,
                '}' if depth == 0 => return Some(i),
                '}' => depth -= 1,
                _ => {}
            }
        }
        None
    }

    /// Scan an at-rule starting at `pos`; returns the end offset (exclusive).
    fn scan_at_rule(&mut self) -> Result<usize, String> {
        let semi = self.scan_until_top_level(';');
        let brace = self.scan_until_top_level('{');
        match (semi, brace) {
            (Some(s), b) if b.is_none_or(|b| s < b) => {
                self.pos = s + 1;
                Ok(self.pos)
            }
            (_, Some(b)) => {
                self.pos = b + 1;
                let close = self.scan_block_end().ok_or("unterminated at-rule block")?;
                self.pos = close + 1;
                Ok(self.pos)
            }
            _ => Err("unterminated at-rule".into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_simple_example() {
        let css = ".fruit { color: red; font-size: 12px }\n\
                   /* comment */ #apple { color: blue; }\n\
                   a, b > c { margin : 0 auto !important }";
        let ss = parse_stylesheet(css).unwrap();
        let rules: Vec<_> = ss.rules().collect();
        assert_eq!(rules.len(), 3);
        assert_eq!(rules[0].decls[1].to_string(), "font-size:12px");
        assert_eq!(rules[2].selectors.len(), 2);
        assert!(rules[2].decls[0].important);
        assert_eq!(
            ss.to_string(),
            ".fruit{color:red;font-size:12px}#apple{color:blue}a,b>c{margin:0 auto!important}"
        );
    }

    #[test]
    fn empty_and_media() {
        assert!(parse_stylesheet("").unwrap().items.is_empty());
        let ss = parse_stylesheet("@media x { .a{color:red} }").unwrap();
        assert_eq!(ss.items.len(), 1);
        assert_eq!(ss.rules().count(), 0);
        let ss = parse_stylesheet("@import url(\"a;b.css\");.a{b:c}").unwrap();
        assert_eq!(ss.items.len(), 2);
    }

    #[test]
    fn strings_and_urls() {
        let ss = parse_stylesheet(".a{content:\"x;}y\";background:url(a;b.png)}").unwrap();
        let r = ss.rules().next().unwrap();
        assert_eq!(r.decls.len(), 2);
        assert_eq!(r.decls[0].value, "\"x;}y\"");
    }

    #[test]
    fn errors_and_lenient() {
        assert!(parse_stylesheet(".a{color:red").is_err());
        assert!(parse_stylesheet("a:frob{color:red}").is_err());
        let ss = parse_stylesheet_with("a:frob{color:red}.b{c:d}", ParseOptions { lenient: true }).unwrap();
        assert_eq!(ss.items.len(), 2);
        assert!(matches!(ss.items[0], Item::Passthrough(_)));
        let e = parse_stylesheet("\n\n  }").unwrap_err();
        assert_eq!((e.line, e.col), (3, 3));
    }

    #[test]
    fn segments_split_on_passthrough() {
        let ss = parse_stylesheet(".a{b:c}@media x{.a{b:d}}.b{b:c}.c{b:c}").unwrap();
        let segs = ss.segments();
        assert_eq!(segs.len(), 3);
        assert_eq!(Stylesheet::from_segments(&segs), ss);
    }
}
