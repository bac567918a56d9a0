//! Backward reachability search for automaton non-emptiness.
//!
//! The search walks from the final state towards the initial one, reading the
//! nodes of a candidate run from last to first. Nodes on the current tree level
//! are kept with their sibling relations; when a child transition leaves the
//! level, its positional constraints are checked (natively when a small
//! witness exists, otherwise with the external solver). Identifier uniqueness
//! is checked once the initial state is reached.

use super::attrs::{attr_groups, is_id_key, positional_parts, pseudo_consistent, requires, AttrKey, KeyConstraints};
use super::ila::{Cmp, Formula, Problem, Term};
use super::positional::{matches_anb, nomatch};
use super::solver::{solve, SolverConfig, SolverError};
use super::types::{compute_type_summary, TypeSummary};
use super::words::{attr_solutions, solve_attr_set, AttrTest};
use crate::automata::{CssAutomaton, Dir, Transition};
use crate::dom::in_progression;
use crate::selector::{NthKind, PseudoClass, Positional};
use std::collections::{BTreeMap, HashMap, HashSet};

/// Limits for the backward search.
#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub solver: SolverConfig,
    /// Maximum number of search items expanded before giving up.
    pub max_expansions: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            solver: SolverConfig::default(),
            max_expansions: 200_000,
        }
    }
}

/// A node read by the run on the current level, with its relation to the
/// node on its right (`None` for the rightmost node).
type LevelEntry = (usize, Option<Dir>);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Item {
    state: usize,
    /// Loop transitions already taken on this state.
    used: Vec<usize>,
    target: bool,
    /// Nodes of the current level, rightmost first.
    level: Vec<LevelEntry>,
    /// Identifier constraints collected so far, sorted.
    ids: Vec<(AttrKey, Vec<AttrTest>)>,
    started: bool,
}

struct Search<'a> {
    a: &'a CssAutomaton,
    ts: TypeSummary,
    cfg: &'a SearchConfig,
    local_ok: Vec<bool>,
    groups: Vec<Option<Vec<KeyConstraints>>>,
    level_cache: HashMap<Vec<LevelEntry>, bool>,
    failed: HashSet<Item>,
    expansions: usize,
    solver_error: Option<SolverError>,
}

fn has_positional(t: &Transition) -> bool {
    !positional_parts(&t.sel).is_empty()
}

impl<'a> Search<'a> {
    fn new(a: &'a CssAutomaton, cfg: &'a SearchConfig) -> Self {
        let ts = compute_type_summary(a);
        let groups: Vec<_> = a
            .transitions
            .iter()
            .enumerate()
            .map(|(i, t)| attr_groups(&t.sel, &i.to_string()))
            .collect();
        let local_ok = a
            .transitions
            .iter()
            .zip(&groups)
            .map(|(t, g)| {
                pseudo_consistent(&t.sel)
                    && !ts.allowed(&t.sel).is_empty()
                    && g.as_ref()
                        .is_some_and(|g| g.iter().all(|k| solve_attr_set(&k.tests, &[]).is_some()))
            })
            .collect();
        Search {
            a,
            ts,
            cfg,
            local_ok,
            groups,
            level_cache: HashMap::new(),
            failed: HashSet::new(),
            expansions: 0,
            solver_error: None,
        }
    }

    /// Can the transition's node be the root with nothing else on its level?
    fn root_ok(&self, ti: usize) -> bool {
        let sel = &self.a.transitions[ti].sel;
        !super::attrs::forbids(sel, PseudoClass::Root) && positional_parts(sel).iter().all(|(pos, _)| !pos)
    }

    fn ids_ok(&self, ids: &[(AttrKey, Vec<AttrTest>)]) -> bool {
        let mut by_key: BTreeMap<&AttrKey, Vec<&Vec<AttrTest>>> = BTreeMap::new();
        for (k, s) in ids {
            by_key.entry(k).or_default().push(s);
        }
        by_key.values().all(|sets| {
            let options: Vec<Vec<String>> = sets.iter().map(|s| attr_solutions(s, sets.len())).collect();
            perfect_matching(&options)
        })
    }

    /// Satisfiability of the positional constraints of a level whose leftmost
    /// node is the first child of its parent.
    fn level_ok(&mut self, level: &[LevelEntry]) -> bool {
        if !level.iter().any(|&(ti, _)| has_positional(&self.a.transitions[ti])) {
            return true;
        }
        if let Some(&r) = self.level_cache.get(level) {
            return r;
        }
        let counting = level.iter().any(|&(ti, _)| super::types::counts_types(&self.a.transitions[ti].sel));
        let r = (!counting && self.level_native(level)) || self.level_solver(level);
        self.level_cache.insert(level.to_vec(), r);
        r
    }

    /// Try small sibling gaps and trailing sibling counts directly.
    fn level_native(&self, level: &[LevelEntry]) -> bool {
        let left_to_right: Vec<LevelEntry> = level.iter().rev().copied().collect();
        let gaps: Vec<usize> = (0..left_to_right.len())
            .filter(|&j| left_to_right[j].1 == Some(Dir::Sibling))
            .collect();
        const G: usize = 8;
        let combos = (G as u64).saturating_pow(gaps.len() as u32 + 1);
        if combos > 300_000 {
            return false;
        }
        let mut odo = vec![0usize; gaps.len() + 1];
        loop {
            let mut xs = Vec::with_capacity(left_to_right.len());
            let mut x = 1i64;
            let mut g = 0;
            for (j, &(_, rel)) in left_to_right.iter().enumerate() {
                xs.push(x);
                if j + 1 < left_to_right.len() {
                    x += 1;
                    if rel == Some(Dir::Sibling) {
                        x += odo[g] as i64;
                        g += 1;
                    }
                }
            }
            let total = x + odo[gaps.len()] as i64;
            let ok = left_to_right.iter().zip(&xs).all(|(&(ti, _), &x)| {
                positional_parts(&self.a.transitions[ti].sel).iter().all(|&(pos, p)| {
                    let from_end = total - x + 1;
                    let holds = match p {
                        Positional::OnlyChild => x == 1 && from_end == 1,
                        Positional::Nth { kind: NthKind::Child, a, b, .. } => in_progression(x, *a, *b),
                        Positional::Nth { kind: NthKind::LastChild, a, b, .. } => in_progression(from_end, *a, *b),
                        _ => unreachable!("of-type conditions take the solver path"),
                    };
                    holds == pos
                })
            });
            if ok {
                return true;
            }
            let mut k = 0;
            loop {
                if k == odo.len() {
                    return false;
                }
                odo[k] += 1;
                if odo[k] < G {
                    break;
                }
                odo[k] = 0;
                k += 1;
            }
        }
    }

    fn level_solver(&mut self, level: &[LevelEntry]) -> bool {
        let p = self.level_problem(level);
        match solve(&p, &self.cfg.solver, "level") {
            Ok(r) => r.is_sat(),
            Err(e) => {
                log::warn!("level check failed: {e}; assuming satisfiable");
                self.solver_error = Some(e);
                true
            }
        }
    }

    fn level_problem(&self, level: &[LevelEntry]) -> Problem {
        let nodes: Vec<LevelEntry> = level.iter().rev().copied().collect();
        let types = &self.ts.types;
        let counting = self.ts.counts_types;
        let mut p = Problem::new();
        let total = p.int_in("total", Some(1), None);
        let tot: Vec<Term> = if counting {
            (0..types.len()).map(|ty| p.int_in(&format!("tot_{ty}"), Some(0), None)).collect()
        } else {
            Vec::new()
        };
        if counting {
            p.assert(Formula::eq(total.clone(), Term::sum(tot.clone())));
        }
        let is_type = |j: usize, ty: usize| Formula::eq(Term::var(format!("t_{j}")), Term::Const(ty as i64));
        for (j, &(ti, rel)) in nodes.iter().enumerate() {
            let sel = &self.a.transitions[ti].sel;
            let x = p.int_in(&format!("x_{j}"), Some(1), None);
            p.assert(Formula::cmp(Cmp::Ge, total.clone(), x.clone()));
            if counting {
                let t = p.int_in(&format!("t_{j}"), Some(0), Some(types.len() as i64 - 1));
                let allowed = self.ts.allowed(sel);
                p.assert(Formula::or(
                    allowed.iter().map(|&ty| Formula::eq(t.clone(), Term::Const(ty as i64))).collect(),
                ));
                let cb: Vec<Term> = (0..types.len())
                    .map(|ty| p.int_in(&format!("cb_{j}_{ty}"), Some(0), None))
                    .collect();
                p.assert(Formula::eq(x.clone(), Term::sum(cb.clone()).plus(1)));
                let ot = p.int_in(&format!("ot_{j}"), Some(1), None);
                let lt = p.int_in(&format!("lt_{j}"), Some(1), None);
                for ty in 0..types.len() {
                    p.assert(Formula::implies(
                        is_type(j, ty),
                        Formula::and(vec![
                            Formula::eq(ot.clone(), cb[ty].clone().plus(1)),
                            Formula::eq(lt.clone(), tot[ty].clone().sub(cb[ty].clone())),
                        ]),
                    ));
                    p.assert(Formula::implies(
                        is_type(j, ty),
                        Formula::cmp(Cmp::Ge, tot[ty].clone(), cb[ty].clone().plus(1)),
                    ));
                    p.assert(Formula::cmp(Cmp::Ge, tot[ty].clone(), cb[ty].clone()));
                }
            }
            if j == 0 {
                p.assert(Formula::eq(x.clone(), Term::Const(1)));
            }
            if j + 1 < nodes.len() {
                let nx = p.int_in(&format!("x_{}", j + 1), Some(1), None);
                let sibling = rel == Some(Dir::Sibling);
                if counting {
                    let mut shifts = Vec::new();
                    for ty in 0..types.len() {
                        let cb = Term::var(format!("cb_{j}_{ty}"));
                        let ncb = p.int_in(&format!("cb_{}_{ty}", j + 1), Some(0), None);
                        let s = if sibling {
                            let s = p.int_in(&format!("s_{j}_{ty}"), Some(0), None);
                            shifts.push(s.clone());
                            s
                        } else {
                            Term::Const(0)
                        };
                        p.assert(Formula::implies(
                            is_type(j, ty),
                            Formula::eq(ncb.clone(), cb.clone().add(s.clone()).plus(1)),
                        ));
                        p.assert(Formula::implies(
                            Formula::not(is_type(j, ty)),
                            Formula::eq(ncb, cb.add(s)),
                        ));
                    }
                    p.assert(Formula::eq(nx, x.clone().add(Term::sum(shifts)).plus(1)));
                } else if sibling {
                    p.assert(Formula::cmp(Cmp::Gt, nx, x.clone()));
                } else {
                    p.assert(Formula::eq(nx, x.clone().plus(1)));
                }
            }
            for (ci, &(pos, cond)) in positional_parts(sel).iter().enumerate() {
                let tag = format!("c_{j}_{ci}");
                let from_end = total.clone().sub(x.clone()).plus(1);
                let one = |t: Term| Formula::eq(t, Term::Const(1));
                let (f, is_nth) = match cond {
                    Positional::OnlyChild => (Formula::and(vec![one(x.clone()), one(from_end)]), None),
                    Positional::OnlyOfType => (
                        Formula::and(vec![one(Term::var(format!("ot_{j}"))), one(Term::var(format!("lt_{j}")))]),
                        None,
                    ),
                    Positional::Nth { kind, a, b, .. } => {
                        let v = match kind {
                            NthKind::Child => x.clone(),
                            NthKind::LastChild => from_end,
                            NthKind::OfType => Term::var(format!("ot_{j}")),
                            NthKind::LastOfType => Term::var(format!("lt_{j}")),
                        };
                        (Formula::True, Some((v, *a, *b)))
                    }
                };
                let g = match (is_nth, pos) {
                    (Some((v, a, b)), true) => matches_anb(&mut p, &tag, v, a, b),
                    (Some((v, a, b)), false) => nomatch(&mut p, &tag, v, a, b),
                    (None, true) => f,
                    (None, false) => Formula::not(f),
                };
                p.assert(g);
            }
        }
        debug_assert_eq!(p.check_declarations(), Ok(()));
        p
    }

    fn run(&mut self) -> Result<bool, SolverError> {
        let start = Item {
            state: self.a.fin,
            used: Vec::new(),
            target: false,
            level: Vec::new(),
            ids: Vec::new(),
            started: false,
        };
        let found = self.dfs(start)?;
        match self.solver_error.take() {
            Some(e) => Err(e),
            None => Ok(found),
        }
    }

    fn dfs(&mut self, item: Item) -> Result<bool, SolverError> {
        if self.failed.contains(&item) {
            return Ok(false);
        }
        self.expansions += 1;
        if self.expansions > self.cfg.max_expansions {
            return Err(SolverError::Budget);
        }
        let mut incoming: Vec<usize> = (0..self.a.transitions.len())
            .filter(|&ti| self.a.transitions[ti].to == item.state)
            .collect();
        // Leave self-loops until the direct routes have been explored.
        incoming.sort_by_key(|&ti| self.a.transitions[ti].from == self.a.transitions[ti].to);
        for ti in incoming {
            if let Some(next) = self.step(&item, ti) {
                if self.accepts(&next) {
                    return Ok(true);
                }
                if next.continuing_ok && self.dfs(next.item)? {
                    return Ok(true);
                }
            }
        }
        self.failed.insert(item);
        Ok(false)
    }

    fn accepts(&self, s: &Stepped) -> bool {
        s.item.state == self.a.init && s.root_candidate && self.ids_ok(&s.item.ids)
    }

    fn step(&mut self, item: &Item, ti: usize) -> Option<Stepped> {
        let t = &self.a.transitions[ti];
        if !self.local_ok[ti] || (t.dir == Dir::Last) == item.started {
            return None;
        }
        let is_loop = t.from == t.to;
        if is_loop && item.used.contains(&ti) {
            return None;
        }
        let needs_target = requires(&t.sel, PseudoClass::Target);
        if needs_target && item.target {
            return None;
        }
        let needs_root = requires(&t.sel, PseudoClass::Root);
        let mut level = item.level.clone();
        match t.dir {
            Dir::Last => level = vec![(ti, None)],
            Dir::Child => {
                if requires(&t.sel, PseudoClass::Empty) || !self.level_ok(&level) {
                    return None;
                }
                level = vec![(ti, None)];
            }
            Dir::Neighbour | Dir::Sibling => {
                if needs_root {
                    return None;
                }
                level.push((ti, Some(t.dir)));
            }
        }
        let mut ids = item.ids.clone();
        if let Some(groups) = &self.groups[ti] {
            for g in groups.iter().filter(|g| is_id_key(&g.key)) {
                ids.push((g.key.clone(), g.tests.clone()));
            }
        }
        ids.sort();
        let used = if is_loop {
            let mut u = item.used.clone();
            u.push(ti);
            u.sort();
            u
        } else {
            Vec::new()
        };
        let root_candidate = level.len() == 1 && self.root_ok(ti);
        Some(Stepped {
            item: Item {
                state: t.from,
                used,
                target: item.target || needs_target,
                level,
                ids,
                started: true,
            },
            root_candidate,
            continuing_ok: !needs_root,
        })
    }
}

struct Stepped {
    item: Item,
    /// The node just read may be the root.
    root_candidate: bool,
    /// The node just read may be a non-root node.
    continuing_ok: bool,
}

/// True when every row can be assigned a distinct word from its options.
fn perfect_matching(options: &[Vec<String>]) -> bool {
    let mut owner: HashMap<&str, usize> = HashMap::new();
    fn augment<'a>(
        r: usize,
        options: &'a [Vec<String>],
        owner: &mut HashMap<&'a str, usize>,
        seen: &mut HashSet<&'a str>,
    ) -> bool {
        for w in &options[r] {
            if seen.insert(w.as_str()) {
                let free = match owner.get(w.as_str()).copied() {
                    None => true,
                    Some(o) => augment(o, options, owner, seen),
                };
                if free {
                    owner.insert(w.as_str(), r);
                    return true;
                }
            }
        }
        false
    }
    (0..options.len()).all(|r| augment(r, options, &mut owner, &mut HashSet::new()))
}

/// Decide non-emptiness by backward search.
pub fn check_nonempty_optimized(a: &CssAutomaton, cfg: &SearchConfig) -> Result<bool, SolverError> {
    if a.trivially_empty() {
        return Ok(false);
    }
    Search::new(a, cfg).run()
}
