//! Encoding of "find the best merging opportunity" as weighted partial Max-SAT.
//!
//! An opportunity is a sub-biclique of one enumerated biclique plus an
//! insertion position. The position is the bounded integer `inpos` in
//! `[0, m]`, the biclique is chosen by the bounded integer `bc` (biclique
//! `i` is selected by `bc = i`, counting from zero), and shared exclusion
//! variables drop nodes from the chosen biclique. Soft formulas charge the
//! weight of the new rule and of every node of the covering that survives
//! trimming, so the optimum cost is the weight of the resulting covering.

use super::cnf::{BoolExpr, BoundedInt, FormulaSet, Lit};
use super::wcnf::MaxSatModel;
use crate::biclique::{Biclique, OrderContext, OrderableEnumeration};
use crate::graph::{CRule, CssGraph, Edge, MergingOpportunity};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

/// Which biclique nodes get exclusion variables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum ExclusionMode {
    /// Every node may be dropped; the search is exact.
    #[default]
    AllNodes,
    /// Only nodes incident to ordered edges may be dropped. Smaller
    /// formulas, but the cheapest sub-biclique is not always reachable.
    OrderedNodes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EncodeOptions {
    pub exclusion: ExclusionMode,
    /// Restrict each biclique to positions between the second and the last
    /// rule containing one of its edges. Positions outside that window never
    /// reduce the weight.
    pub position_bounds: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            exclusion: ExclusionMode::AllNodes,
            position_bounds: true,
        }
    }
}

/// A node of the graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Node {
    Sel(usize),
    Prop(usize),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("no biclique is available, so there is no merging opportunity")]
    EmptyEnumeration,
}

/// The Max-SAT formulation of one search.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub formulas: FormulaSet,
    pub inpos: BoundedInt,
    pub bc: BoundedInt,
    /// Shared exclusion variables, sized by the largest numbering.
    pub excl: Vec<Lit>,
    /// Per biclique, the exclusion slot of each node that may be dropped.
    pub rho: Vec<BTreeMap<Node, usize>>,
    pub bicliques: Vec<Biclique>,
    /// Number of rules in the covering.
    pub m: usize,
    has_edge: HashMap<Edge, BoolExpr>,
}

impl Encoding {
    /// The formula "the chosen rule contains edge `e`".
    pub fn has_edge(&self, e: Edge) -> BoolExpr {
        self.has_edge.get(&e).cloned().unwrap_or_else(BoolExpr::f)
    }

    /// Restrict the choice of biclique to the given indices.
    pub fn restrict_bicliques(&mut self, allowed: &BTreeSet<usize>) {
        let f = BoolExpr::or(allowed.iter().map(|&i| self.bc.eq(i as u64)));
        self.formulas.hard.push(f);
    }

    fn not_excluded(&self, i: usize, n: Node) -> BoolExpr {
        match self.rho[i].get(&n) {
            Some(&k) => BoolExpr::var(-self.excl[k]),
            None => BoolExpr::t(),
        }
    }
}

/// Index (1-based) of the rules containing some edge of `b`.
fn rules_touching(c: &[CRule], b: &Biclique) -> Vec<usize> {
    c.iter()
        .enumerate()
        .filter(|(_, r)| {
            r.sels.iter().any(|s| b.sels.binary_search(s).is_ok())
                && r.props.iter().any(|p| b.props.binary_search(p).is_ok())
        })
        .map(|(i, _)| i + 1)
        .collect()
}

/// Build the Max-SAT formulation for covering `c` of `g`.
pub fn encode(
    g: &CssGraph,
    c: &[CRule],
    ctx: &OrderContext,
    en: &OrderableEnumeration,
    opts: EncodeOptions,
) -> Result<Encoding, EncodeError> {
    let k = en.bicliques.len();
    if k == 0 {
        return Err(EncodeError::EmptyEnumeration);
    }
    let m = c.len();
    let mut fs = FormulaSet::default();
    let inpos = fs.bounded_int("inpos", m as u64);
    let bc = fs.bounded_int("bc", (k - 1) as u64);

    let (osels, oprops) = g.ordered_nodes();
    let droppable = |n: Node| match opts.exclusion {
        ExclusionMode::AllNodes => true,
        ExclusionMode::OrderedNodes => match n {
            Node::Sel(s) => osels.contains(&s),
            Node::Prop(p) => oprops.contains(&p),
        },
    };
    let rho: Vec<BTreeMap<Node, usize>> = en
        .bicliques
        .iter()
        .map(|b| {
            b.sels
                .iter()
                .map(|&s| Node::Sel(s))
                .chain(b.props.iter().map(|&p| Node::Prop(p)))
                .filter(|&n| droppable(n))
                .enumerate()
                .map(|(slot, n)| (n, slot))
                .collect()
        })
        .collect();
    let width = rho.iter().map(|r| r.len()).max().unwrap_or(0);
    let excl: Vec<Lit> = (0..width).map(|i| fs.fresh(format!("x{}", i + 1))).collect();

    let mut enc = Encoding {
        formulas: fs,
        inpos,
        bc,
        excl,
        rho,
        bicliques: en.bicliques.clone(),
        m,
        has_edge: HashMap::new(),
    };

    let mut terms: HashMap<Edge, Vec<BoolExpr>> = HashMap::new();
    for (i, b) in en.bicliques.iter().enumerate() {
        for (s, p) in b.edges() {
            let t = BoolExpr::and([
                enc.bc.eq(i as u64),
                enc.not_excluded(i, Node::Sel(s)),
                enc.not_excluded(i, Node::Prop(p)),
            ]);
            terms.entry((s, p)).or_default().push(t);
        }
    }
    enc.has_edge = terms.into_iter().map(|(e, v)| (e, BoolExpr::or(v))).collect();

    // Bicliques cannot be used from their first unorderable position on.
    for (&j, list) in &en.forbidden_first {
        let f = BoolExpr::implies(
            enc.inpos.ge(j as u64),
            BoolExpr::and(list.iter().map(|&i| BoolExpr::not(enc.bc.eq(i as u64)))),
        );
        enc.formulas.hard.push(f);
    }

    // An ordered pair stays respected if its second edge occurs after the
    // insertion point or moves into the new rule as well.
    for &(e1, e2) in &g.order {
        let h1 = enc.has_edge(e1);
        if h1 == BoolExpr::f() {
            continue;
        }
        let f = BoolExpr::implies(
            h1,
            BoolExpr::or([enc.inpos.lt(ctx.index(e2) as u64), enc.has_edge(e2)]),
        );
        enc.formulas.hard.push(f);
    }

    if opts.position_bounds {
        for (i, b) in en.bicliques.iter().enumerate() {
            let touching = rules_touching(c, b);
            let sel = enc.bc.eq(i as u64);
            let f = match (touching.get(1), touching.last()) {
                (Some(&lo), Some(&hi)) => BoolExpr::implies(
                    sel,
                    BoolExpr::and([enc.inpos.ge(lo as u64), enc.inpos.le(hi as u64)]),
                ),
                _ => BoolExpr::not(sel),
            };
            enc.formulas.hard.push(f);
        }
    }

    // Weight of the new rule: each kept node of the chosen biclique.
    for (i, b) in en.bicliques.iter().enumerate() {
        let nodes = b
            .sels
            .iter()
            .map(|&s| (Node::Sel(s), g.sel_weight(s)))
            .chain(b.props.iter().map(|&p| (Node::Prop(p), g.prop_weight(p))));
        for (n, w) in nodes {
            let dropped = match enc.rho[i].get(&n) {
                Some(&k) => BoolExpr::var(enc.excl[k]),
                None => BoolExpr::f(),
            };
            let f = BoolExpr::implies(enc.bc.eq(i as u64), dropped);
            enc.formulas.soft.push((f, w as u64));
        }
    }

    // Weight of the rest: a node of rule i is removed when the rule is
    // before the insertion point and every edge whose last occurrence it
    // carries moves into the new rule.
    let idx = |e: Edge| ctx.index(e);
    for (i0, r) in c.iter().enumerate() {
        let i = i0 + 1;
        let before = enc.inpos.ge(i as u64);
        for &s in &r.sels {
            let crucial: Vec<Edge> = r.props.iter().map(|&p| (s, p)).filter(|&e| idx(e) == i).collect();
            if crucial.is_empty() {
                continue;
            }
            let f = BoolExpr::and(std::iter::once(before.clone()).chain(crucial.iter().map(|&e| enc.has_edge(e))));
            enc.formulas.soft.push((f, g.sel_weight(s) as u64));
        }
        for &p in &r.props {
            let crucial: Vec<Edge> = r.sels.iter().map(|&s| (s, p)).filter(|&e| idx(e) == i).collect();
            if crucial.is_empty() {
                continue;
            }
            let f = BoolExpr::and(std::iter::once(before.clone()).chain(crucial.iter().map(|&e| enc.has_edge(e))));
            enc.formulas.soft.push((f, g.prop_weight(p) as u64));
        }
    }
    Ok(enc)
}

/// Chosen biclique, kept nodes and position of a model.
pub fn decode_choice(model: &MaxSatModel, enc: &Encoding) -> (usize, Biclique, usize) {
    let val = |v: u32| model.value(v);
    let j = (enc.inpos.value(&val) as usize).min(enc.m);
    let i = (enc.bc.value(&val) as usize).min(enc.bicliques.len() - 1);
    let b = &enc.bicliques[i];
    let kept = |n: Node| enc.rho[i].get(&n).is_none_or(|&k| !model.value(enc.excl[k] as u32));
    let sub = Biclique {
        sels: b.sels.iter().copied().filter(|&s| kept(Node::Sel(s))).collect(),
        props: b.props.iter().copied().filter(|&p| kept(Node::Prop(p))).collect(),
    };
    (i, sub, j)
}

/// The merging opportunity described by a model, with its declarations
/// ordered for the chosen position. `None` when the model selects no edge.
pub fn decode(model: &MaxSatModel, enc: &Encoding, ctx: &OrderContext) -> Option<MergingOpportunity> {
    let (_, sub, j) = decode_choice(model, enc);
    if sub.sels.is_empty() || sub.props.is_empty() {
        return None;
    }
    match ctx.order_properties(&sub, j) {
        Ok(props) => Some(MergingOpportunity {
            rule: CRule::new(sub.sels, props),
            pos: j,
        }),
        Err(e) => {
            log::error!("model selects a biclique that cannot be ordered at {j}: {e}");
            None
        }
    }
}

/// An assignment of the semantic variables describing opportunity `o`:
/// the first biclique containing its nodes whose choice satisfies every
/// hard formula. `None` when no biclique qualifies.
pub fn assignment_for(enc: &Encoding, o: &MergingOpportunity) -> Option<HashMap<u32, bool>> {
    let sub = Biclique::new(o.rule.sels.clone(), o.rule.props.clone());
    for (i, b) in enc.bicliques.iter().enumerate() {
        if !b.contains(&sub) {
            continue;
        }
        let mut vals: HashMap<u32, bool> = HashMap::new();
        let mut set_int = |x: &BoundedInt, v: u64| {
            for (k, &bit) in x.bits.iter().enumerate() {
                vals.insert(bit as u32, v >> k & 1 == 1);
            }
        };
        set_int(&enc.inpos, o.pos as u64);
        set_int(&enc.bc, i as u64);
        let mut ok = true;
        for &l in &enc.excl {
            vals.insert(l as u32, false);
        }
        for (&n, &k) in &enc.rho[i] {
            let kept = match n {
                Node::Sel(s) => sub.sels.contains(&s),
                Node::Prop(p) => sub.props.contains(&p),
            };
            vals.insert(enc.excl[k] as u32, !kept);
        }
        // Nodes without an exclusion variable cannot be dropped.
        for s in &b.sels {
            ok &= sub.sels.contains(s) || enc.rho[i].contains_key(&Node::Sel(*s));
        }
        for p in &b.props {
            ok &= sub.props.contains(p) || enc.rho[i].contains_key(&Node::Prop(*p));
        }
        let val = |v: u32| vals.get(&v).copied().unwrap_or(false);
        if ok && enc.formulas.hard_holds(&val) {
            return Some(vals);
        }
    }
    None
}
