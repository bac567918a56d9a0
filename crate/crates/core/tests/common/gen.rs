//! Random small stylesheets with overlapping selectors and related properties.

use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;

const SELECTORS: &[&str] = &[
    ".a", ".b", ".c", "#x", "#y", "p", "div p", ".a > p", "p + .b", "li:first-child", ".a.b", "[title]",
];

const DECLS: &[&str] = &[
    "color:red",
    "color:blue",
    "color:green",
    "margin:0",
    "margin-top:1px",
    "padding:0",
    "font-size:large",
    "border:0",
];

/// A stylesheet of 2 to 4 rules whose graph has between 3 and `max_nodes`
/// nodes.
pub fn small_sheet<R: Rng>(rng: &mut R, max_nodes: usize) -> String {
    loop {
        let n_rules = rng.gen_range(2..=4);
        let mut css = String::new();
        let mut sels = BTreeSet::new();
        let mut decls = BTreeSet::new();
        for _ in 0..n_rules {
            let ns = rng.gen_range(1..=2);
            let nd = rng.gen_range(1..=3);
            let s: Vec<&str> = SELECTORS.choose_multiple(rng, ns).copied().collect();
            let d: Vec<&str> = DECLS.choose_multiple(rng, nd).copied().collect();
            sels.extend(s.iter().copied());
            decls.extend(d.iter().copied());
            css.push_str(&format!("{}{{{}}}", s.join(","), d.join(";")));
        }
        let nodes = sels.len() + decls.len();
        if (3..=max_nodes).contains(&nodes) {
            return css;
        }
    }
}
