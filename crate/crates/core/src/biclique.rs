//! Maximal bicliques of a CSS graph and their orderability.
//!
//! A biclique `(X, Y)` becomes a rule once its declarations are put in a
//! sequence. Whether a suitable sequence exists depends on where the rule is
//! inserted: the edges whose last occurrence would move into the new rule
//! must respect the transitive closure of the edge order.

use crate::graph::{index_map, CRule, CssGraph, Edge};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

/// A complete bipartite subgraph; both sides sorted and non-empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Biclique {
    pub sels: Vec<usize>,
    pub props: Vec<usize>,
}

impl Biclique {
    pub fn new(mut sels: Vec<usize>, mut props: Vec<usize>) -> Self {
        sels.sort_unstable();
        sels.dedup();
        props.sort_unstable();
        props.dedup();
        Biclique { sels, props }
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.sels
            .iter()
            .flat_map(move |&s| self.props.iter().map(move |&p| (s, p)))
    }

    pub fn is_valid_in(&self, g: &CssGraph) -> bool {
        !self.sels.is_empty() && !self.props.is_empty() && self.edges().all(|e| g.edges.contains(&e))
    }

    pub fn contains(&self, other: &Biclique) -> bool {
        is_subset(&other.sels, &self.sels) && is_subset(&other.props, &self.props)
    }

    pub fn num_nodes(&self) -> usize {
        self.sels.len() + self.props.len()
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// All inclusion-maximal bicliques of `g`, sorted.
///
/// Maximal bicliques are the pairs `(X, Y)` with `Y` the common neighbours
/// of `X` and `X` the common neighbours of `Y`. Every such `Y` is an
/// intersection of selector neighbourhoods, so the intents are generated by
/// closing the neighbourhoods under pairwise intersection, which takes time
/// polynomial in the size of the graph and of the output.
pub fn enumerate_maximal_bicliques(g: &CssGraph) -> Vec<Biclique> {
    let nbrs: Vec<Vec<usize>> = (0..g.selectors.len()).map(|s| g.neighbours_of_sel(s).collect()).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut work: Vec<Vec<usize>> = Vec::new();
    for n in &nbrs {
        if !n.is_empty() && seen.insert(n.clone()) {
            work.push(n.clone());
        }
    }
    while let Some(intent) = work.pop() {
        for n in &nbrs {
            let j = intersect_sorted(&intent, n);
            if !j.is_empty() && j.len() < intent.len() && seen.insert(j.clone()) {
                work.push(j);
            }
        }
    }
    let mut out: Vec<Biclique> = seen
        .into_iter()
        .map(|intent| {
            let ext = (0..nbrs.len()).filter(|&s| is_subset(&intent, &nbrs[s])).collect();
            Biclique::new(ext, intent)
        })
        .collect();
    out.sort();
    out
}

/// A property order violation: declarations forming a cycle.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("biclique is not orderable: declarations {cycle:?} form a cycle")]
pub struct NotOrderable {
    pub cycle: Vec<usize>,
}

/// Orderability queries for a fixed graph and covering.
pub struct OrderContext<'a> {
    pub g: &'a CssGraph,
    /// Number of rules in the covering.
    pub m: usize,
    index: HashMap<Edge, usize>,
    closure: &'a OrderClosure,
}

/// Transitive closure of a graph's edge order.
#[derive(Clone, Debug, Default)]
pub struct OrderClosure {
    succ: HashMap<Edge, BTreeSet<Edge>>,
}

impl OrderClosure {
    pub fn new(g: &CssGraph) -> Self {
        let mut direct: BTreeMap<Edge, Vec<Edge>> = BTreeMap::new();
        let mut indeg: BTreeMap<Edge, usize> = BTreeMap::new();
        for &(e, f) in &g.order {
            direct.entry(e).or_default().push(f);
            *indeg.entry(f).or_default() += 1;
            indeg.entry(e).or_default();
        }
        let mut topo = Vec::with_capacity(indeg.len());
        let mut ready: Vec<Edge> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&e, _)| e).collect();
        while let Some(e) = ready.pop() {
            topo.push(e);
            for f in direct.get(&e).into_iter().flatten() {
                let d = indeg.get_mut(f).expect("every target has an in-degree");
                *d -= 1;
                if *d == 0 {
                    ready.push(*f);
                }
            }
        }
        let mut succ: HashMap<Edge, BTreeSet<Edge>> = HashMap::new();
        if topo.len() < indeg.len() {
            // The order of a parsed stylesheet follows occurrence positions and
            // is acyclic; a hand-built cyclic order is closed by iteration.
            log::warn!("edge order is cyclic; computing its closure by fixpoint");
            for (&e, fs) in &direct {
                succ.insert(e, fs.iter().copied().collect());
            }
            loop {
                let mut changed = false;
                let keys: Vec<Edge> = succ.keys().copied().collect();
                for e in keys {
                    let mut add = BTreeSet::new();
                    for f in &succ[&e] {
                        if let Some(r) = succ.get(f) {
                            add.extend(r.iter().copied());
                        }
                    }
                    let s = succ.get_mut(&e).expect("key exists");
                    let before = s.len();
                    s.extend(add);
                    changed |= s.len() != before;
                }
                if !changed {
                    break;
                }
            }
            return OrderClosure { succ };
        }
        for &e in topo.iter().rev() {
            let mut r = BTreeSet::new();
            for f in direct.get(&e).into_iter().flatten() {
                r.insert(*f);
                if let Some(rf) = succ.get(f) {
                    r.extend(rf.iter().copied());
                }
            }
            succ.insert(e, r);
        }
        OrderClosure { succ }
    }

    pub fn reaches(&self, e: Edge, f: Edge) -> bool {
        self.succ.get(&e).is_some_and(|s| s.contains(&f))
    }

    pub fn successors(&self, e: Edge) -> impl Iterator<Item = &Edge> {
        self.succ.get(&e).into_iter().flatten()
    }
}

impl<'a> OrderContext<'a> {
    pub fn new(g: &'a CssGraph, c: &[CRule], closure: &'a OrderClosure) -> Self {
        OrderContext {
            g,
            m: c.len(),
            index: index_map(c),
            closure,
        }
    }

    /// Index of the last rule containing `e` in the covering (0 if absent).
    pub fn index(&self, e: Edge) -> usize {
        self.index.get(&e).copied().unwrap_or(0)
    }

    /// Edges of `b` whose last occurrence is at or before position `j`.
    pub fn edges_last(&self, b: &Biclique, j: usize) -> HashSet<Edge> {
        b.edges().filter(|&e| self.index(e) <= j).collect()
    }

    /// The required declaration order of `b` at position `j`: `(p1, p2)`
    /// whenever edges `(s1, p1)` and `(s2, p2)` of `b` with last occurrence
    /// at most `j` are related by the closure of the edge order.
    pub fn prop_order(&self, b: &Biclique, j: usize) -> BTreeSet<(usize, usize)> {
        let last = self.edges_last(b, j);
        let mut rel = BTreeSet::new();
        for &e in &last {
            for f in self.closure.successors(e) {
                if last.contains(f) {
                    rel.insert((e.1, f.1));
                }
            }
        }
        rel
    }

    /// A cycle of the required declaration order, if there is one.
    pub fn cycle(&self, b: &Biclique, j: usize) -> Option<Vec<usize>> {
        find_cycle(&b.props, &self.prop_order(b, j))
    }

    pub fn is_orderable(&self, b: &Biclique, j: usize) -> bool {
        self.cycle(b, j).is_none()
    }

    /// Declarations of `b` in an order that respects the required order at
    /// `j`, breaking ties by first appearance in the stylesheet.
    pub fn order_properties(&self, b: &Biclique, j: usize) -> Result<Vec<usize>, NotOrderable> {
        let rel = self.prop_order(b, j);
        if let Some(cycle) = find_cycle(&b.props, &rel) {
            return Err(NotOrderable { cycle });
        }
        let mut indeg: BTreeMap<usize, usize> = b.props.iter().map(|&p| (p, 0)).collect();
        for &(_, q) in &rel {
            *indeg.get_mut(&q).expect("relation is over the biclique") += 1;
        }
        let mut ready: BTreeSet<usize> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&p, _)| p).collect();
        let mut out = Vec::with_capacity(b.props.len());
        while let Some(p) = ready.pop_first() {
            out.push(p);
            for &(_, q) in rel.range((p, 0)..(p + 1, 0)) {
                let d = indeg.get_mut(&q).expect("relation is over the biclique");
                *d -= 1;
                if *d == 0 {
                    ready.insert(q);
                }
            }
        }
        Ok(out)
    }

    /// Smallest position at which `b` is not orderable, if any. Orderability
    /// is monotone in the position, so binary search suffices.
    pub fn first_unorderable(&self, b: &Biclique) -> Option<usize> {
        if self.is_orderable(b, self.m) {
            return None;
        }
        let (mut lo, mut hi) = (0, self.m);
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if self.is_orderable(b, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hi)
    }
}

fn find_cycle(nodes: &[usize], rel: &BTreeSet<(usize, usize)>) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut mark: HashMap<usize, Mark> = nodes.iter().map(|&p| (p, Mark::New)).collect();
    for &start in nodes {
        if mark[&start] != Mark::New {
            continue;
        }
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(start, succs(rel, start))];
        let mut path = vec![start];
        mark.insert(start, Mark::Active);
        while let Some((node, next)) = stack.last_mut() {
            match next.pop() {
                Some(q) => match mark[&q] {
                    Mark::Active => {
                        let at = path.iter().position(|&x| x == q).expect("active nodes are on the path");
                        return Some(path[at..].to_vec());
                    }
                    Mark::New => {
                        mark.insert(q, Mark::Active);
                        path.push(q);
                        stack.push((q, succs(rel, q)));
                    }
                    Mark::Done => {}
                },
                None => {
                    mark.insert(*node, Mark::Done);
                    path.pop();
                    stack.pop();
                }
            }
        }
    }
    None
}

fn succs(rel: &BTreeSet<(usize, usize)>, p: usize) -> Vec<usize> {
    rel.range((p, 0)..(p + 1, 0)).map(|&(_, q)| q).collect()
}

/// How unorderable maximal bicliques are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum EnumerationMode {
    /// Drop every maximal biclique that is unorderable at some position.
    #[default]
    Fast,
    /// Keep them, forbid them from their first unorderable position on, and
    /// add their maximal sub-bicliques that are orderable there.
    Full,
}

/// Bicliques available to the search and the positions forbidding them.
#[derive(Clone, Debug, Default, Serialize)]
pub struct OrderableEnumeration {
    pub bicliques: Vec<Biclique>,
    /// `position -> indices` of bicliques first unorderable at that position.
    pub forbidden_first: BTreeMap<usize, Vec<usize>>,
}

impl OrderableEnumeration {
    /// Position from which biclique `i` is forbidden.
    pub fn first_forbidden(&self, i: usize) -> Option<usize> {
        self.forbidden_first
            .iter()
            .find(|(_, v)| v.contains(&i))
            .map(|(&j, _)| j)
    }

    /// All bicliques forbidden at position `j`.
    pub fn forbidden_at(&self, j: usize) -> BTreeSet<usize> {
        self.forbidden_first
            .range(..=j)
            .flat_map(|(_, v)| v.iter().copied())
            .collect()
    }
}

/// Largest number of order-constrained nodes for which the sub-biclique
/// search is attempted.
pub const MAX_SUB_CANDIDATES: usize = 16;

/// Maximal sub-bicliques of `b` that are orderable at `j`.
///
/// Only nodes incident to ordered edges influence orderability, so the
/// search removes growing subsets of those nodes and keeps the orderable
/// results not contained in an earlier one.
pub fn orderable_subs(ctx: &OrderContext, b: &Biclique, j: usize) -> Vec<Biclique> {
    let (osels, oprops) = ctx.g.ordered_nodes();
    let cands: Vec<(bool, usize)> = b
        .sels
        .iter()
        .filter(|s| osels.contains(s))
        .map(|&s| (true, s))
        .chain(b.props.iter().filter(|p| oprops.contains(p)).map(|&p| (false, p)))
        .collect();
    if cands.len() > MAX_SUB_CANDIDATES {
        log::warn!(
            "skipping sub-biclique search over {} constrained nodes; the biclique is only used where orderable",
            cands.len()
        );
        return Vec::new();
    }
    let mut found: Vec<Biclique> = Vec::new();
    let n = cands.len();
    let mut masks: Vec<u32> = (1..(1u32 << n)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    for mask in masks {
        let removed = |kind: bool, x: usize| {
            cands
                .iter()
                .enumerate()
                .any(|(i, &(k, y))| mask & (1 << i) != 0 && k == kind && y == x)
        };
        let sub = Biclique::new(
            b.sels.iter().copied().filter(|&s| !removed(true, s)).collect(),
            b.props.iter().copied().filter(|&p| !removed(false, p)).collect(),
        );
        if sub.sels.is_empty() || sub.props.is_empty() || found.iter().any(|f| f.contains(&sub)) {
            continue;
        }
        if ctx.is_orderable(&sub, j) {
            found.push(sub);
        }
    }
    found
}

/// Build the biclique enumeration used by the Max-SAT search.
pub fn build_enumeration(ctx: &OrderContext, maximal: &[Biclique], mode: EnumerationMode) -> OrderableEnumeration {
    match mode {
        EnumerationMode::Fast => OrderableEnumeration {
            bicliques: maximal
                .iter()
                .filter(|b| ctx.is_orderable(b, ctx.m))
                .cloned()
                .collect(),
            forbidden_first: BTreeMap::new(),
        },
        EnumerationMode::Full => {
            let mut first: BTreeMap<Biclique, Option<usize>> = BTreeMap::new();
            let mut work: Vec<Biclique> = maximal.to_vec();
            while let Some(b) = work.pop() {
                if first.contains_key(&b) {
                    continue;
                }
                let bad = ctx.first_unorderable(&b);
                if let Some(j) = bad {
                    work.extend(orderable_subs(ctx, &b, j));
                }
                first.insert(b, bad);
            }
            let horizon = |f: Option<usize>| f.unwrap_or(usize::MAX);
            let kept: Vec<(Biclique, Option<usize>)> = first
                .iter()
                .filter(|(b, f)| {
                    !first
                        .iter()
                        .any(|(b2, f2)| b2 != *b && b2.contains(b) && horizon(*f2) >= horizon(**f))
                })
                .map(|(b, f)| (b.clone(), *f))
                .collect();
            let mut e = OrderableEnumeration::default();
            for (i, (b, f)) in kept.into_iter().enumerate() {
                if let Some(j) = f {
                    e.forbidden_first.entry(j).or_default().push(i);
                }
                e.bicliques.push(b);
            }
            e
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emptiness::{EmptinessConfig, IntersectionChecker};
    use crate::graph::{extract_edge_order, Covering};
    use crate::stylesheet::{parse_stylesheet, Rule};

    fn graph(css: &str) -> (CssGraph, Covering) {
        let rules: Vec<Rule> = parse_stylesheet(css).unwrap().rules().cloned().collect();
        let (mut g, c) = CssGraph::build(&rules);
        g.order = extract_edge_order(&g, &c, &IntersectionChecker::new(EmptinessConfig::default()));
        (g, c)
    }

    const ORDER: &str = ".a{color:blue;color:green}.b{color:green;color:blue}";

    #[test]
    fn cssorder_orderability() {
        let (g, c) = graph(ORDER);
        let closure = OrderClosure::new(&g);
        let ctx = OrderContext::new(&g, &c, &closure);
        let b = Biclique::new(vec![0, 1], vec![0, 1]);
        assert!(enumerate_maximal_bicliques(&g).contains(&b));
        assert!(ctx.is_orderable(&b, 0));
        assert!(ctx.is_orderable(&b, 1));
        let mut cycle = ctx.cycle(&b, 2).unwrap();
        cycle.sort();
        assert_eq!(cycle, vec![0, 1]);
        assert_eq!(ctx.order_properties(&b, 1).unwrap(), vec![0, 1]);
        assert!(ctx.order_properties(&b, 2).is_err());
        assert_eq!(ctx.first_unorderable(&b), Some(2));
    }

    #[test]
    fn cssorder_full_enumeration() {
        let (g, c) = graph(ORDER);
        let closure = OrderClosure::new(&g);
        let ctx = OrderContext::new(&g, &c, &closure);
        let maximal = enumerate_maximal_bicliques(&g);
        let full = build_enumeration(&ctx, &maximal, EnumerationMode::Full);
        let b = Biclique::new(vec![0, 1], vec![0, 1]);
        let bi = full.bicliques.iter().position(|x| *x == b).unwrap();
        assert_eq!(full.first_forbidden(bi), Some(2));
        for (i, x) in full.bicliques.iter().enumerate() {
            assert!(x.is_valid_in(&g));
            if i != bi {
                assert!(ctx.is_orderable(x, 2), "{x:?}");
            }
        }
        assert!(full.bicliques.len() > 1);
        let fast = build_enumeration(&ctx, &maximal, EnumerationMode::Fast);
        assert!(fast.forbidden_first.is_empty());
        assert!(fast.bicliques.iter().all(|x| full.bicliques.contains(x)));
        assert!(!fast.bicliques.contains(&b));
    }

    #[test]
    fn single_rule_and_singletons() {
        let (g, c) = graph("a,b{x:1;y:2}");
        let closure = OrderClosure::new(&g);
        let ctx = OrderContext::new(&g, &c, &closure);
        let bs = enumerate_maximal_bicliques(&g);
        assert_eq!(bs, vec![Biclique::new(vec![0, 1], vec![0, 1])]);
        assert_eq!(ctx.order_properties(&bs[0], 1).unwrap(), vec![0, 1]);
        let single = Biclique::new(vec![0], vec![1]);
        assert!((0..=1).all(|j| ctx.is_orderable(&single, j)));
        let e = build_enumeration(&ctx, &bs, EnumerationMode::Full);
        assert_eq!(e.bicliques, bs);
        assert!(e.forbidden_first.is_empty());
    }

    fn brute_force_maximal(g: &CssGraph) -> BTreeSet<Biclique> {
        let ns = g.selectors.len();
        let np = g.props.len();
        let mut out = BTreeSet::new();
        for xm in 1u32..(1 << ns) {
            for ym in 1u32..(1 << np) {
                let xs: Vec<usize> = (0..ns).filter(|i| xm & (1 << i) != 0).collect();
                let ys: Vec<usize> = (0..np).filter(|i| ym & (1 << i) != 0).collect();
                let ok = |xs: &[usize], ys: &[usize]| xs.iter().all(|&s| ys.iter().all(|&p| g.edges.contains(&(s, p))));
                if !ok(&xs, &ys) {
                    continue;
                }
                let grow_x = (0..ns).any(|s| xm & (1 << s) == 0 && ok(&[s], &ys));
                let grow_y = (0..np).any(|p| ym & (1 << p) == 0 && ok(&xs, &[p]));
                if !grow_x && !grow_y {
                    out.insert(Biclique::new(xs, ys));
                }
            }
        }
        out
    }

    #[test]
    fn maximal_bicliques_match_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let ns = rng.gen_range(1..=5);
            let np = rng.gen_range(1..=5);
            let mut css = String::new();
            for s in 0..ns {
                let props: Vec<String> = (0..np)
                    .filter(|_| rng.gen_bool(0.5))
                    .map(|p| format!("p{p}:v"))
                    .collect();
                if !props.is_empty() {
                    css.push_str(&format!(".s{s}{{{}}}", props.join(";")));
                }
            }
            let (g, _) = graph(&css);
            let got: BTreeSet<Biclique> = enumerate_maximal_bicliques(&g).into_iter().collect();
            assert_eq!(got, brute_force_maximal(&g), "{css}");
        }
    }
}
