//! CSS graphs, coverings and merging opportunities.
//!
//! A run of style rules is modelled as a bipartite graph between selector
//! nodes and declaration nodes, with an edge `(s, p)` whenever some rule
//! applies `p` through `s`. The rules themselves form a covering of that
//! graph. The edge order records which pairs of edges must keep their
//! relative last occurrences for the cascade to stay unchanged.

use crate::emptiness::IntersectionChecker;
use crate::properties::related_property_names;
use crate::selector::{specificity, text_weight, Selector, Specificity};
use crate::stylesheet::{Declaration, Rule};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

/// `(selector node, declaration node)`.
pub type Edge = (usize, usize);

/// Node-weighted, edge-ordered bipartite graph of a rule run.
#[derive(Clone, Debug, Default)]
pub struct CssGraph {
    pub selectors: Vec<Selector>,
    pub sel_text: Vec<String>,
    pub props: Vec<Declaration>,
    pub prop_text: Vec<String>,
    pub edges: BTreeSet<Edge>,
    /// `(e, e')` means the last occurrence of `e` must precede that of `e'`.
    pub order: BTreeSet<(Edge, Edge)>,
}

/// A rule over graph nodes; declaration order is significant.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CRule {
    pub sels: Vec<usize>,
    pub props: Vec<usize>,
}

impl CRule {
    pub fn new(sels: Vec<usize>, props: Vec<usize>) -> Self {
        CRule { sels, props }
    }

    pub fn is_empty(&self) -> bool {
        self.sels.is_empty() || self.props.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.sels
            .iter()
            .flat_map(move |&s| self.props.iter().map(move |&p| (s, p)))
    }

    pub fn contains_edge(&self, (s, p): Edge) -> bool {
        self.sels.contains(&s) && self.props.contains(&p)
    }
}

/// A sequence of rules over the nodes of a graph.
pub type Covering = Vec<CRule>;

/// Rule `rule` inserted after the first `pos` rules of a covering.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct MergingOpportunity {
    pub rule: CRule,
    pub pos: usize,
}

impl CssGraph {
    /// Build the graph of `rules` together with the covering they form.
    ///
    /// Selector and declaration nodes are identified by canonical text and
    /// numbered by first appearance. A selector repeated within a rule is
    /// kept once; a repeated declaration keeps only its last occurrence,
    /// which is the one that takes effect.
    pub fn build(rules: &[Rule]) -> (CssGraph, Covering) {
        let mut g = CssGraph::default();
        let mut sel_ids: HashMap<String, usize> = HashMap::new();
        let mut prop_ids: HashMap<String, usize> = HashMap::new();
        let mut cover = Vec::new();
        for r in rules {
            let mut sels = Vec::new();
            for s in &r.selectors {
                let text = s.to_string();
                let id = *sel_ids.entry(text.clone()).or_insert_with(|| {
                    g.selectors.push(s.clone());
                    g.sel_text.push(text);
                    g.selectors.len() - 1
                });
                if !sels.contains(&id) {
                    sels.push(id);
                }
            }
            let mut props: Vec<usize> = Vec::new();
            for d in &r.decls {
                let text = d.to_string();
                let id = *prop_ids.entry(text.clone()).or_insert_with(|| {
                    g.props.push(d.clone());
                    g.prop_text.push(text);
                    g.props.len() - 1
                });
                props.retain(|&p| p != id);
                props.push(id);
            }
            let rule = CRule::new(sels, props);
            if !rule.is_empty() {
                g.edges.extend(rule.edges());
                cover.push(rule);
            }
        }
        (g, cover)
    }

    pub fn sel_weight(&self, s: usize) -> usize {
        text_weight(&self.sel_text[s])
    }

    pub fn prop_weight(&self, p: usize) -> usize {
        text_weight(&self.prop_text[p])
    }

    pub fn rule_weight(&self, r: &CRule) -> usize {
        if r.is_empty() {
            return 0;
        }
        r.sels.iter().map(|&s| self.sel_weight(s)).sum::<usize>()
            + r.props.iter().map(|&p| self.prop_weight(p)).sum::<usize>()
    }

    pub fn total_weight(&self, c: &[CRule]) -> usize {
        c.iter().map(|r| self.rule_weight(r)).sum()
    }

    /// Extended specificity of an edge: the selector's specificity with the
    /// declaration's `!important` flag as most significant component.
    pub fn edge_specificity(&self, (s, p): Edge) -> Specificity {
        specificity(&self.selectors[s], self.props[p].important)
    }

    pub fn edge_label(&self, (s, p): Edge) -> String {
        format!("({}, {})", self.sel_text[s], self.prop_text[p])
    }

    pub fn to_rule(&self, r: &CRule) -> Rule {
        Rule {
            selectors: r.sels.iter().map(|&s| self.selectors[s].clone()).collect(),
            decls: r.props.iter().map(|&p| self.props[p].clone()).collect(),
        }
    }

    pub fn to_rules(&self, c: &[CRule]) -> Vec<Rule> {
        c.iter().filter(|r| !r.is_empty()).map(|r| self.to_rule(r)).collect()
    }

    /// Canonical text of a covering.
    pub fn serialize(&self, c: &[CRule]) -> String {
        let mut out = String::new();
        for r in self.to_rules(c) {
            write!(out, "{r}").expect("writing to a string");
        }
        out
    }

    /// Declarations adjacent to selector `s`, in node order.
    pub fn neighbours_of_sel(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.range((s, 0)..(s + 1, 0)).map(|&(_, p)| p)
    }

    /// Nodes incident to some ordered edge, as `(selectors, declarations)`.
    pub fn ordered_nodes(&self) -> (BTreeSet<usize>, BTreeSet<usize>) {
        let mut sels = BTreeSet::new();
        let mut props = BTreeSet::new();
        for &(e, f) in &self.order {
            for (s, p) in [e, f] {
                sels.insert(s);
                props.insert(p);
            }
        }
        (sels, props)
    }

    pub fn dump(&self) -> GraphDump {
        GraphDump {
            version: 1,
            selectors: self
                .sel_text
                .iter()
                .enumerate()
                .map(|(i, t)| NodeDump {
                    id: i,
                    text: t.clone(),
                    weight: self.sel_weight(i),
                })
                .collect(),
            properties: self
                .prop_text
                .iter()
                .enumerate()
                .map(|(i, t)| NodeDump {
                    id: i,
                    text: t.clone(),
                    weight: self.prop_weight(i),
                })
                .collect(),
            edges: self.edges.iter().copied().collect(),
            order: self.order.iter().copied().collect(),
        }
    }
}

/// JSON form of a graph for debugging.
#[derive(Clone, Debug, Serialize)]
pub struct GraphDump {
    pub version: u32,
    pub selectors: Vec<NodeDump>,
    pub properties: Vec<NodeDump>,
    pub edges: Vec<Edge>,
    pub order: Vec<(Edge, Edge)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeDump {
    pub id: usize,
    pub text: String,
    pub weight: usize,
}

/// Index (1-based) of the last rule of `c` containing each edge.
pub fn index_map(c: &[CRule]) -> HashMap<Edge, usize> {
    let mut m = HashMap::new();
    for (i, r) in c.iter().enumerate() {
        for e in r.edges() {
            m.insert(e, i + 1);
        }
    }
    m
}

/// Index (1-based) of the last rule of `c` containing `e`, or 0 if none does.
pub fn edge_index(c: &[CRule], e: Edge) -> usize {
    c.iter().rposition(|r| r.contains_edge(e)).map_or(0, |i| i + 1)
}

/// Compute the edge order of a graph from its original covering.
///
/// Two edges `(s, p)` and `(s', p')` with `p != p'` are ordered when they
/// have the same extended specificity, the property names are related,
/// the selectors may match a common node, `(s, p)` last occurs before
/// `(s', p')`, and `(s', p)` does not last occur after `(s', p')`. When it
/// does, the same-selector pair already forces the outcome and the
/// cross-selector constraint is dropped. Occurrences are compared by rule
/// index and then by declaration position, so two declarations of one rule
/// are ordered as written.
pub fn extract_edge_order(g: &CssGraph, c: &[CRule], checker: &IntersectionChecker) -> BTreeSet<(Edge, Edge)> {
    let occ = occurrence_map(c);
    let mut groups: BTreeMap<Specificity, Vec<Edge>> = BTreeMap::new();
    for &e in &g.edges {
        groups.entry(g.edge_specificity(e)).or_default().push(e);
    }
    let mut candidates = Vec::new();
    for group in groups.values() {
        for &e in group {
            for &f in group {
                let ((s, p), (s2, p2)) = (e, f);
                if p == p2 || occ[&e] >= occ[&f] {
                    continue;
                }
                if !related_property_names(&g.props[p].property, &g.props[p2].property) {
                    continue;
                }
                if occ.get(&(s2, p)).is_some_and(|o| *o > occ[&f]) {
                    continue;
                }
                candidates.push((e, f, s.min(s2), s.max(s2)));
            }
        }
    }
    let pairs: BTreeSet<(usize, usize)> = candidates.iter().map(|&(_, _, a, b)| (a, b)).collect();
    let pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
    let verdicts: HashMap<(usize, usize), bool> = pairs
        .par_iter()
        .map(|&(a, b)| ((a, b), checker.may_intersect(&g.selectors[a], &g.selectors[b])))
        .collect();
    candidates
        .into_iter()
        .filter(|&(_, _, a, b)| verdicts[&(a, b)])
        .map(|(e, f, _, _)| (e, f))
        .collect()
}

/// Position of the last occurrence of each edge: the 1-based rule index and
/// the declaration's position within that rule.
fn occurrence_map(c: &[CRule]) -> HashMap<Edge, (usize, usize)> {
    let mut m = HashMap::new();
    for (i, r) in c.iter().enumerate() {
        for &s in &r.sels {
            for (k, &p) in r.props.iter().enumerate() {
                m.insert((s, p), (i + 1, k));
            }
        }
    }
    m
}

/// The first ordered pair whose constraint `c` breaks, if any.
pub fn validity_violation(g: &CssGraph, c: &[CRule]) -> Option<(Edge, Edge)> {
    if let Some(e) = g.edges.iter().find(|e| !c.iter().any(|r| r.contains_edge(**e))) {
        return Some((*e, *e));
    }
    let occ = occurrence_map(c);
    g.order.iter().copied().find(|(e, f)| occ[e] > occ[f])
}

/// Does `c` cover exactly the edges of `g` and respect its edge order?
pub fn is_valid_covering(g: &CssGraph, c: &[CRule]) -> bool {
    c.iter().all(|r| r.edges().all(|e| g.edges.contains(&e))) && validity_violation(g, c).is_none()
}

/// Remove every node of a rule that is not incident to an edge whose last
/// occurrence is that rule, then drop empty rules.
pub fn trim(c: &[CRule]) -> Covering {
    let idx = index_map(c);
    let mut out = Vec::with_capacity(c.len());
    for (i, r) in c.iter().enumerate() {
        let live = |e: Edge| idx.get(&e) == Some(&(i + 1));
        let sels: Vec<usize> = r
            .sels
            .iter()
            .copied()
            .filter(|&s| r.props.iter().any(|&p| live((s, p))))
            .collect();
        let props: Vec<usize> = r
            .props
            .iter()
            .copied()
            .filter(|&p| r.sels.iter().any(|&s| live((s, p))))
            .collect();
        let rule = CRule::new(sels, props);
        if !rule.is_empty() {
            out.push(rule);
        }
    }
    out
}

/// Insert the opportunity's rule after `pos` rules and trim.
pub fn apply_opportunity(c: &[CRule], o: &MergingOpportunity) -> Covering {
    let mut v = c.to_vec();
    v.insert(o.pos.min(c.len()), o.rule.clone());
    trim(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emptiness::EmptinessConfig;
    use crate::stylesheet::parse_stylesheet;

    const SIMPLE: &str = "#apple{color:blue;font-size:small}\
        .fruit,#broccoli{color:red;font-size:large}\
        #orange{color:blue}\
        #tomato{color:red;font-size:large;background-color:lightblue}";

    fn graph(css: &str) -> (CssGraph, Covering) {
        let ss = parse_stylesheet(css).unwrap();
        let rules: Vec<Rule> = ss.rules().cloned().collect();
        let (mut g, c) = CssGraph::build(&rules);
        g.order = extract_edge_order(&g, &c, &IntersectionChecker::new(EmptinessConfig::default()));
        (g, c)
    }

    fn sel(g: &CssGraph, t: &str) -> usize {
        g.sel_text.iter().position(|x| x == t).unwrap()
    }

    fn prop(g: &CssGraph, t: &str) -> usize {
        g.prop_text.iter().position(|x| x == t).unwrap()
    }

    fn rule(g: &CssGraph, sels: &[&str], props: &[&str]) -> CRule {
        CRule::new(
            sels.iter().map(|s| sel(g, s)).collect(),
            props.iter().map(|p| prop(g, p)).collect(),
        )
    }

    fn variant() -> String {
        SIMPLE.replace("#orange{", ".vegetable,#orange{")
    }

    #[test]
    fn builds_variant_graph() {
        let (g, c) = graph(&variant());
        assert_eq!(g.selectors.len(), 6);
        assert_eq!(g.props.len(), 5);
        assert_eq!(g.edges.len(), 11);
        assert_eq!(c.len(), 4);
        assert_eq!(g.sel_weight(sel(&g, "#orange")), 8);
        assert_eq!(g.total_weight(&c), text_weight(&variant()) - 1);
    }

    #[test]
    fn single_rule_and_duplicates() {
        let (g, c) = graph("a{b:c}");
        assert_eq!((g.selectors.len(), g.props.len(), g.edges.len()), (1, 1, 1));
        assert_eq!(edge_index(&c, (0, 0)), 1);
        let (g2, c2) = graph("a{b:c}a{b:c}");
        assert_eq!(g2.edges, g.edges);
        assert_eq!(c2.len(), 2);
        let (g3, c3) = graph("a,a{b:c;d:e;b:c}");
        assert_eq!(g3.serialize(&c3), "a{d:e;b:c}");
    }

    #[test]
    fn variant_edge_index_and_order() {
        let (g, c) = graph(&variant());
        let e1 = (sel(&g, ".fruit"), prop(&g, "color:red"));
        let e2 = (sel(&g, ".vegetable"), prop(&g, "color:blue"));
        assert_eq!(edge_index(&c, e1), 2);
        assert_eq!(edge_index(&c, e2), 3);
        assert_eq!(g.order, BTreeSet::from([(e1, e2)]));
        assert!(is_valid_covering(&g, &c));
        let mut swapped = c.clone();
        swapped.swap(1, 2);
        assert!(!is_valid_covering(&g, &swapped));
        assert_eq!(validity_violation(&g, &swapped), Some((e1, e2)));
    }

    #[test]
    fn fallback_ordering_refinement() {
        let (g, _) = graph(".a{color:red;color:rgba(255,0,0,0.5)}.b{color:red;color:rgba(255,0,0,0.5)}");
        let (a, b) = (sel(&g, ".a"), sel(&g, ".b"));
        let (red, rgba) = (prop(&g, "color:red"), prop(&g, "color:rgba(255,0,0,0.5)"));
        assert!(!g.order.contains(&((a, rgba), (b, red))));
        assert!(g.order.contains(&((b, red), (b, rgba))));
        assert!(g.order.contains(&((a, red), (a, rgba))));
    }

    #[test]
    fn disjoint_ids_have_no_order() {
        let (g, _) = graph("#a{color:red}#b{color:blue}");
        assert!(g.order.is_empty());
        let (g, _) = graph("p{color:red!important}p{color:blue}");
        assert!(g.order.is_empty());
        let (g, _) = graph("p{margin:0}p{margin-left:1px}");
        assert_eq!(g.order.len(), 1);
    }

    #[test]
    fn trims_bigger_file() {
        let (g, c) = graph(SIMPLE);
        let r1 = rule(&g, &[".fruit", "#broccoli", "#tomato"], &["color:red", "font-size:large"]);
        let mut bigger = c.clone();
        bigger.push(r1.clone());
        let fruit_red = (sel(&g, ".fruit"), prop(&g, "color:red"));
        assert_eq!(edge_index(&bigger, fruit_red), 5);
        let trimmed = trim(&bigger);
        assert_eq!(
            g.serialize(&trimmed),
            "#apple{color:blue;font-size:small}#orange{color:blue}#tomato{background-color:lightblue}\
             .fruit,#broccoli,#tomato{color:red;font-size:large}"
        );
        assert_eq!(trim(&trimmed), trimmed);
        assert!(is_valid_covering(&g, &trimmed));
        let applied = apply_opportunity(&c, &MergingOpportunity { rule: r1, pos: 4 });
        assert_eq!(applied, trimmed);
        assert!(g.total_weight(&applied) < g.total_weight(&c));

        let blue = rule(&g, &["#apple", "#orange"], &["color:blue"]);
        let next = apply_opportunity(&applied, &MergingOpportunity { rule: blue, pos: 2 });
        assert_eq!(
            g.serialize(&next),
            "#apple{font-size:small}#apple,#orange{color:blue}#tomato{background-color:lightblue}\
             .fruit,#broccoli,#tomato{color:red;font-size:large}"
        );
        assert!(g.total_weight(&next) < g.total_weight(&applied));
    }

    #[test]
    fn reinserting_a_rule_keeps_weight() {
        let (g, c) = graph(SIMPLE);
        for (i, r) in c.iter().enumerate() {
            let o = MergingOpportunity { rule: r.clone(), pos: i + 1 };
            assert_eq!(g.total_weight(&apply_opportunity(&c, &o)), g.total_weight(&c));
        }
    }

    #[test]
    fn empty_covering() {
        let (g, c) = graph("");
        assert!(c.is_empty());
        assert!(is_valid_covering(&g, &c));
        assert_eq!(g.total_weight(&c), 0);
        assert_eq!(trim(&c), c);
    }

    #[test]
    fn dump_is_json() {
        let (g, _) = graph(&variant());
        let v = serde_json::to_value(g.dump()).unwrap();
        assert_eq!(v["edges"].as_array().unwrap().len(), 11);
        assert_eq!(v["order"].as_array().unwrap().len(), 1);
    }
}
