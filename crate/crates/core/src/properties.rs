//! Relations between CSS property names induced by shorthands.
//!
//! `affects(p, q)` holds when a declaration of `p` can change the computed
//! value of `q`: equal names, a shorthand and one of its longhands, a
//! dash-separated prefix (`background` and `background-color`), the `font`
//! shorthand resetting `line-height`, and `all`. Vendor prefixes are ignored so
//! that `-webkit-transition` and `transition` are treated as related. Custom
//! properties are only related to themselves.

/// Shorthands whose longhands are not reachable by the dash-prefix rule.
const SHORTHANDS: &[(&str, &[&str])] = &[
    ("font", &["line-height"]),
    (
        "border-width",
        &["border-top-width", "border-right-width", "border-bottom-width", "border-left-width"],
    ),
    (
        "border-style",
        &["border-top-style", "border-right-style", "border-bottom-style", "border-left-style"],
    ),
    (
        "border-color",
        &["border-top-color", "border-right-color", "border-bottom-color", "border-left-color"],
    ),
    (
        "border-radius",
        &[
            "border-top-left-radius",
            "border-top-right-radius",
            "border-bottom-right-radius",
            "border-bottom-left-radius",
        ],
    ),
    ("border-image", &["border-image-source", "border-image-slice", "border-image-width", "border-image-outset", "border-image-repeat"]),
    ("flex-flow", &["flex-direction", "flex-wrap"]),
    ("columns", &["column-width", "column-count"]),
    ("column-rule", &["column-rule-width", "column-rule-style", "column-rule-color"]),
    ("gap", &["row-gap", "column-gap", "grid-row-gap", "grid-column-gap"]),
    ("grid-gap", &["grid-row-gap", "grid-column-gap", "row-gap", "column-gap"]),
    ("inset", &["top", "right", "bottom", "left"]),
    ("place-content", &["align-content", "justify-content"]),
    ("place-items", &["align-items", "justify-items"]),
    ("place-self", &["align-self", "justify-self"]),
    (
        "grid",
        &[
            "grid-template-rows",
            "grid-template-columns",
            "grid-template-areas",
            "grid-auto-rows",
            "grid-auto-columns",
            "grid-auto-flow",
        ],
    ),
    ("grid-template", &["grid-template-rows", "grid-template-columns", "grid-template-areas"]),
    ("grid-area", &["grid-row-start", "grid-row-end", "grid-column-start", "grid-column-end"]),
    ("grid-row", &["grid-row-start", "grid-row-end"]),
    ("grid-column", &["grid-column-start", "grid-column-end"]),
    ("text-emphasis", &["text-emphasis-style", "text-emphasis-color"]),
    ("overflow", &["overflow-x", "overflow-y"]),
];

fn strip_vendor(name: &str) -> &str {
    for p in ["-webkit-", "-moz-", "-ms-", "-o-"] {
        if let Some(rest) = name.strip_prefix(p) {
            return rest;
        }
    }
    name
}

fn is_custom(name: &str) -> bool {
    name.starts_with("--")
}

/// True when a declaration of `p` may change the value of property `q`.
pub fn affects(p: &str, q: &str) -> bool {
    if p == q {
        return true;
    }
    if is_custom(p) || is_custom(q) {
        return false;
    }
    let (p, q) = (strip_vendor(p), strip_vendor(q));
    if p == q || p == "all" {
        return true;
    }
    if q.len() > p.len() && q.starts_with(p) && q.as_bytes()[p.len()] == b'-' {
        return true;
    }
    SHORTHANDS
        .iter()
        .any(|(s, longs)| *s == p && longs.iter().any(|l| *l == q || affects(l, q)))
}

/// Symmetric closure of [`affects`].
pub fn related_property_names(p: &str, q: &str) -> bool {
    affects(p, q) || affects(q, p)
}
