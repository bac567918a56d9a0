//! Finding an optimal merging opportunity with weighted partial Max-SAT.

pub mod brute;
pub mod cnf;
pub mod encode;
pub mod wcnf;

pub use brute::brute_force_best_opportunity;
pub use cnf::{BoolExpr, BoundedInt, FormulaSet, Lit};
pub use encode::{assignment_for, decode, decode_choice, encode, EncodeError, EncodeOptions, Encoding, ExclusionMode, Node};
pub use wcnf::{
    parse_solver_output, solve_wcnf, MaxSatConfig, MaxSatError, MaxSatModel, MaxSatOutcome, WcnfInstance,
};

use crate::biclique::{build_enumeration, Biclique, EnumerationMode, OrderClosure, OrderContext};
use crate::graph::{apply_opportunity, is_valid_covering, CRule, CssGraph, MergingOpportunity};
use serde::Serialize;
use std::collections::BTreeSet;
use std::sync::mpsc;
use std::time::{Duration, Instant};

/// Settings for one opportunity search.
#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub mode: EnumerationMode,
    pub encode: EncodeOptions,
    pub solver: MaxSatConfig,
    pub workers: usize,
    pub partitions_per_worker: usize,
    /// Iteration of the greedy loop; selects which partitions are searched.
    pub iteration: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            mode: EnumerationMode::Fast,
            encode: EncodeOptions::default(),
            solver: MaxSatConfig::default(),
            workers: 1,
            partitions_per_worker: 1,
            iteration: 0,
        }
    }
}

/// Nodes per partition used by [`suggest_partitions`].
pub const NODES_PER_PARTITION: usize = 750;

/// Workers and partitions per worker for a covering with `nodes` node
/// occurrences: enough partitions for at most [`NODES_PER_PARTITION`]
/// nodes each, one worker when two partitions suffice, otherwise up to
/// `cpus` workers which are then split further.
pub fn suggest_partitions(nodes: usize, cpus: usize) -> (usize, usize) {
    let parts = nodes.div_ceil(NODES_PER_PARTITION).max(1);
    if parts <= 2 {
        return (1, parts);
    }
    let workers = parts.min(cpus.max(1));
    (workers, parts.div_ceil(workers))
}

/// An opportunity found by the search.
#[derive(Clone, Debug, Serialize)]
pub struct Found {
    pub opportunity: MergingOpportunity,
    /// Weight of the covering after applying the opportunity.
    pub weight: usize,
    /// Objective value of the model the opportunity was decoded from.
    pub solver_cost: u64,
}

/// Result of one search with statistics.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SearchOutcome {
    pub found: Option<Found>,
    pub bicliques: usize,
    pub forbidden: usize,
    pub variables: u32,
    pub hard_clauses: usize,
    pub soft_clauses: usize,
    pub partitions_searched: usize,
}

/// Move an opportunity to the smallest position giving the same weight.
pub fn canonical_position(g: &CssGraph, c: &[CRule], ctx: &OrderContext, found: MergingOpportunity) -> MergingOpportunity {
    let target = g.total_weight(&apply_opportunity(c, &found));
    let sub = Biclique::new(found.rule.sels.clone(), found.rule.props.clone());
    for j in 0..found.pos {
        let Ok(props) = ctx.order_properties(&sub, j) else { continue };
        let o = MergingOpportunity {
            rule: CRule::new(found.rule.sels.clone(), props),
            pos: j,
        };
        let mut inserted = c.to_vec();
        inserted.insert(j, o.rule.clone());
        if is_valid_covering(g, &inserted) && g.total_weight(&apply_opportunity(c, &o)) == target {
            return o;
        }
    }
    found
}

/// Search for the opportunity whose application gives the lightest
/// covering. Only opportunities that reduce the weight are reported.
pub fn find_best_opportunity(
    g: &CssGraph,
    c: &[CRule],
    closure: &OrderClosure,
    maximal: &[Biclique],
    opts: &SearchOptions,
) -> Result<SearchOutcome, MaxSatError> {
    let ctx = OrderContext::new(g, c, closure);
    let en = build_enumeration(&ctx, maximal, opts.mode);
    let mut out = SearchOutcome {
        bicliques: en.bicliques.len(),
        forbidden: en.forbidden_first.values().map(Vec::len).sum(),
        ..Default::default()
    };
    let enc = match encode(g, c, &ctx, &en, opts.encode) {
        Ok(e) => e,
        Err(EncodeError::EmptyEnumeration) => return Ok(out),
    };
    let k = en.bicliques.len();
    let total = (opts.workers.max(1) * opts.partitions_per_worker.max(1)).min(k);
    let mut jobs: Vec<(String, WcnfInstance)> = Vec::new();
    if total <= 1 {
        jobs.push(("merge".into(), enc.formulas.to_wcnf()));
    } else {
        let ppw = opts.partitions_per_worker.max(1);
        for w in 0..opts.workers.max(1) {
            let part = w * ppw + opts.iteration % ppw;
            let allowed: BTreeSet<usize> = (0..k).filter(|i| i % total == part).collect();
            if allowed.is_empty() {
                continue;
            }
            let mut e = enc.clone();
            e.restrict_bicliques(&allowed);
            jobs.push((format!("merge-p{part}"), e.formulas.to_wcnf()));
        }
    }
    if let Some((_, w)) = jobs.first() {
        out.variables = w.num_vars;
        out.hard_clauses = w.hard.len();
        out.soft_clauses = w.soft.len();
    }
    out.partitions_searched = jobs.len();

    let results = run_jobs(jobs, &opts.solver)?;
    let current = g.total_weight(c);
    let mut best: Option<Found> = None;
    for model in results {
        let Some(o) = decode(&model, &enc, &ctx) else { continue };
        let mut inserted = c.to_vec();
        inserted.insert(o.pos, o.rule.clone());
        if !is_valid_covering(g, &inserted) {
            log::error!("decoded opportunity breaks the edge order; discarding it");
            continue;
        }
        let o = canonical_position(g, c, &ctx, o);
        let weight = g.total_weight(&apply_opportunity(c, &o));
        let solver_cost = model.cost.unwrap_or_else(|| enc.formulas.cost(&|v| model.value(v)));
        if weight < current && best.as_ref().is_none_or(|b| (weight, o.pos) < (b.weight, b.opportunity.pos)) {
            best = Some(Found {
                opportunity: o,
                weight,
                solver_cost,
            });
        }
    }
    out.found = best;
    Ok(out)
}

/// Solve the instances concurrently. After the first answer arrives at time
/// `t`, the others get until `1.1 t`; optimal models of all finished jobs are
/// returned. Fails only when every job fails.
fn run_jobs(jobs: Vec<(String, WcnfInstance)>, cfg: &MaxSatConfig) -> Result<Vec<MaxSatModel>, MaxSatError> {
    if jobs.len() == 1 {
        let (label, w) = &jobs[0];
        return Ok(match solve_wcnf(w, cfg, label)? {
            MaxSatOutcome::Optimum(m) => vec![m],
            MaxSatOutcome::Unsat => Vec::new(),
        });
    }
    let n = jobs.len();
    let (tx, rx) = mpsc::channel();
    let start = Instant::now();
    for (label, w) in jobs {
        let tx = tx.clone();
        let cfg = cfg.clone();
        std::thread::spawn(move || {
            let _ = tx.send(solve_wcnf(&w, &cfg, &label));
        });
    }
    drop(tx);
    let mut models = Vec::new();
    let mut errors = Vec::new();
    let mut received = 0;
    let mut deadline: Option<Instant> = None;
    while received < n {
        let r = match deadline {
            None => rx.recv().map_err(|_| ()),
            Some(d) => {
                let left = d.saturating_duration_since(Instant::now());
                if left.is_zero() {
                    break;
                }
                rx.recv_timeout(left).map_err(|_| ())
            }
        };
        let Ok(r) = r else { break };
        received += 1;
        match r {
            Ok(MaxSatOutcome::Optimum(m)) => {
                models.push(m);
                if deadline.is_none() {
                    let t = start.elapsed();
                    deadline = Some(Instant::now() + t / 10 + Duration::from_millis(1));
                }
            }
            Ok(MaxSatOutcome::Unsat) => {}
            Err(e) => {
                log::warn!("partition failed: {e}");
                errors.push(e);
            }
        }
    }
    if models.is_empty() && errors.len() == received && received > 0 {
        return Err(errors.swap_remove(0));
    }
    Ok(models)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biclique::enumerate_maximal_bicliques;
    use crate::emptiness::{EmptinessConfig, IntersectionChecker};
    use crate::graph::{extract_edge_order, trim, Covering};
    use crate::stylesheet::{parse_stylesheet, Rule};

    const SIMPLE: &str = "#apple{color:blue;font-size:small}\
        .fruit,#broccoli{color:red;font-size:large}\
        #orange{color:blue}\
        #tomato{color:red;font-size:large;background-color:lightblue}";

    fn graph(css: &str) -> (CssGraph, Covering) {
        let rules: Vec<Rule> = parse_stylesheet(css).unwrap().rules().cloned().collect();
        let (mut g, c) = CssGraph::build(&rules);
        g.order = extract_edge_order(&g, &c, &IntersectionChecker::new(EmptinessConfig::default()));
        (g, c)
    }

    #[test]
    fn encoding_sizes() {
        assert_eq!(BoundedInt::width(4), 3);
        assert_eq!(BoundedInt::width(0), 0);
        let (g, c) = graph(SIMPLE);
        let closure = OrderClosure::new(&g);
        let ctx = OrderContext::new(&g, &c, &closure);
        let maximal = enumerate_maximal_bicliques(&g);
        let en = build_enumeration(&ctx, &maximal, EnumerationMode::Full);
        let enc = encode(&g, &c, &ctx, &en, EncodeOptions::default()).unwrap();
        assert_eq!(enc.inpos.bits.len(), 3);
        assert_eq!(enc.bc.max as usize, en.bicliques.len() - 1);
        let w = enc.formulas.to_wcnf();
        assert_eq!(w.soft.len(), enc.formulas.soft.len());
    }

    #[test]
    fn walk_through_first_step() {
        let (g, c) = graph(SIMPLE);
        let closure = OrderClosure::new(&g);
        let maximal = enumerate_maximal_bicliques(&g);
        let out = find_best_opportunity(&g, &c, &closure, &maximal, &SearchOptions::default()).unwrap();
        let f = out.found.unwrap();
        assert_eq!(g.serialize(std::slice::from_ref(&f.opportunity.rule)), ".fruit,#broccoli,#tomato{color:red;font-size:large}");
        assert_eq!(f.opportunity.pos, 4);
        assert_eq!(f.solver_cost as usize, f.weight);
        let ctx = OrderContext::new(&g, &c, &closure);
        let (bo, bw) = brute_force_best_opportunity(&g, &c, &ctx, &maximal).unwrap();
        assert_eq!(bw, f.weight);
        assert_eq!(bo, f.opportunity);
    }

    #[test]
    fn single_rule_has_no_opportunity() {
        let (g, c) = graph("a{b:c;d:e}");
        let closure = OrderClosure::new(&g);
        let maximal = enumerate_maximal_bicliques(&g);
        let out = find_best_opportunity(&g, &c, &closure, &maximal, &SearchOptions::default()).unwrap();
        assert!(out.found.is_none());
        let ctx = OrderContext::new(&g, &c, &closure);
        assert!(brute_force_best_opportunity(&g, &c, &ctx, &maximal).is_none());
    }

    #[test]
    fn forbidden_bicliques_are_excluded() {
        let css = ".a{color:blue;color:green}.b{color:green;color:blue}";
        let (g, c) = graph(css);
        let closure = OrderClosure::new(&g);
        let ctx = OrderContext::new(&g, &c, &closure);
        let maximal = enumerate_maximal_bicliques(&g);
        let en = build_enumeration(&ctx, &maximal, EnumerationMode::Full);
        let opts = EncodeOptions {
            position_bounds: false,
            ..Default::default()
        };
        let enc = encode(&g, &c, &ctx, &en, opts).unwrap();
        let big = Biclique::new(vec![0, 1], vec![0, 1]);
        let bi = en.bicliques.iter().position(|b| *b == big).unwrap();
        // Pin the choice to the unorderable biclique at the end of the file.
        let mut fs = enc.formulas.clone();
        fs.hard.push(enc.bc.eq(bi as u64));
        fs.hard.push(enc.inpos.eq(2));
        let w = fs.to_wcnf();
        assert_eq!(solve_wcnf(&w, &MaxSatConfig::default(), "t").unwrap(), MaxSatOutcome::Unsat);
        let mut fs = enc.formulas.clone();
        fs.hard.push(enc.bc.eq(bi as u64));
        fs.hard.push(enc.inpos.eq(1));
        assert!(matches!(
            solve_wcnf(&fs.to_wcnf(), &MaxSatConfig::default(), "t").unwrap(),
            MaxSatOutcome::Optimum(_)
        ));
    }

    #[test]
    fn partitioned_search_finds_an_opportunity() {
        let (g, c) = graph(SIMPLE);
        let closure = OrderClosure::new(&g);
        let maximal = enumerate_maximal_bicliques(&g);
        let opts = SearchOptions {
            workers: 2,
            partitions_per_worker: 1,
            ..Default::default()
        };
        let out = find_best_opportunity(&g, &c, &closure, &maximal, &opts).unwrap();
        assert_eq!(out.partitions_searched, 2);
        let f = out.found.unwrap();
        let after = apply_opportunity(&c, &f.opportunity);
        assert!(is_valid_covering(&g, &after));
        assert_eq!(trim(&after), after);
    }

    #[test]
    fn partition_heuristic() {
        assert_eq!(suggest_partitions(100, 8), (1, 1));
        assert_eq!(suggest_partitions(1400, 8), (1, 2));
        assert_eq!(suggest_partitions(3000, 8), (4, 1));
        assert_eq!(suggest_partitions(30000, 8), (8, 5));
    }
}
