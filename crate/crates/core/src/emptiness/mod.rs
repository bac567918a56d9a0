//! Non-emptiness of CSS automata and selector intersection checks.
//!
//! Two backends decide whether an automaton accepts some node of some
//! document: a single QF_LIA encoding handed to an external solver, and a
//! backward reachability search that only consults the solver for sibling
//! position constraints it cannot settle itself.

pub mod attrs;
pub mod encode;
pub mod ila;
pub mod optimized;
pub mod positional;
pub mod solver;
pub mod types;
pub mod words;

pub use encode::{attr_bounds, encode_nonemptiness, AttrBounds};
pub use ila::{emit_smtlib, Formula, Problem, Term};
pub use optimized::{check_nonempty_optimized, SearchConfig};
pub use positional::nomatch;
pub use solver::{SolveResult, SolverConfig, SolverError};
pub use types::{compute_type_summary, TypeSummary};
pub use words::{compute_attr_bound, solve_attr_set, AttrTest, ConstraintSet, ConstraintWordAutomaton};

use crate::automata::{compile, intersect, intersect_node_selectors, is_trivially_empty, CssAutomaton};
use crate::selector::Selector;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::Mutex;

/// Which decision procedure to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Backend {
    #[default]
    Optimized,
    Full,
    /// Run both procedures; a disagreement is logged and treated as non-empty.
    Both,
}

#[derive(Clone, Debug, Default)]
pub struct EmptinessConfig {
    pub backend: Backend,
    pub search: SearchConfig,
}

impl EmptinessConfig {
    pub fn solver(&self) -> &SolverConfig {
        &self.search.solver
    }
}

/// Decide non-emptiness with the full encoding.
pub fn check_nonempty_full(a: &CssAutomaton, solver: &SolverConfig) -> Result<bool, SolverError> {
    if a.trivially_empty() {
        return Ok(false);
    }
    let p = encode_nonemptiness(a, &compute_type_summary(a), &attr_bounds(a));
    Ok(solver::solve(&p, solver, "full")?.is_sat())
}

/// Decide non-emptiness with the configured backend.
pub fn check_nonempty(a: &CssAutomaton, cfg: &EmptinessConfig) -> Result<bool, SolverError> {
    match cfg.backend {
        Backend::Optimized => check_nonempty_optimized(a, &cfg.search),
        Backend::Full => check_nonempty_full(a, cfg.solver()),
        Backend::Both => {
            let fast = check_nonempty_optimized(a, &cfg.search)?;
            let full = check_nonempty_full(a, cfg.solver())?;
            if fast != full {
                log::error!("emptiness backends disagree (optimized: {fast}, full: {full})");
            }
            Ok(fast || full)
        }
    }
}

/// Outcome of an intersection query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Empty,
    NonEmpty,
    /// The decision procedure failed; callers must assume an intersection.
    Unknown,
}

impl Verdict {
    pub fn may_intersect(self) -> bool {
        self != Verdict::Empty
    }
}

/// Counters describing the work done by an [`IntersectionChecker`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CheckerStats {
    pub queries: usize,
    pub cache_hits: usize,
    pub prefiltered: usize,
    pub decided: usize,
    pub empty: usize,
    pub failures: usize,
}

/// Cached, thread-safe selector intersection checks.
#[derive(Debug, Default)]
pub struct IntersectionChecker {
    pub cfg: EmptinessConfig,
    cache: Mutex<HashMap<(Selector, Selector), Verdict>>,
    stats: Mutex<CheckerStats>,
}

/// Cheap syntactic verdicts; `None` when the full check is needed.
pub fn prefilter(s1: &Selector, s2: &Selector) -> Option<Verdict> {
    if s1.pseudo_element != s2.pseudo_element {
        return Some(Verdict::Empty);
    }
    if s1 == s2 {
        return Some(Verdict::NonEmpty);
    }
    if is_trivially_empty(&intersect_node_selectors(s1.subject(), s2.subject())) {
        return Some(Verdict::Empty);
    }
    let id = |s: &Selector| {
        s.subject().conds.iter().find_map(|c| match c {
            crate::selector::Condition::Is(crate::selector::Simple::Attr(a)) => a.required_id().map(str::to_string),
            _ => None,
        })
    };
    match (id(s1), id(s2)) {
        (Some(a), Some(b)) if a != b => Some(Verdict::Empty),
        _ => None,
    }
}

impl IntersectionChecker {
    pub fn new(cfg: EmptinessConfig) -> Self {
        IntersectionChecker {
            cfg,
            ..Default::default()
        }
    }

    pub fn stats(&self) -> CheckerStats {
        *self.stats.lock().expect("stats lock")
    }

    fn bump(&self, f: impl FnOnce(&mut CheckerStats)) {
        f(&mut self.stats.lock().expect("stats lock"));
    }

    /// Can some node of some document be matched by both selectors?
    pub fn verdict(&self, s1: &Selector, s2: &Selector) -> Verdict {
        self.bump(|s| s.queries += 1);
        let key = if s1 <= s2 {
            (s1.clone(), s2.clone())
        } else {
            (s2.clone(), s1.clone())
        };
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            self.bump(|s| s.cache_hits += 1);
            return *v;
        }
        let v = match prefilter(s1, s2) {
            Some(v) => {
                self.bump(|s| s.prefiltered += 1);
                v
            }
            None => {
                let a = intersect(&compile(s1), &compile(s2));
                if a.trivially_empty() {
                    self.bump(|s| s.prefiltered += 1);
                    Verdict::Empty
                } else {
                    self.bump(|s| s.decided += 1);
                    match check_nonempty(&a, &self.cfg) {
                        Ok(true) => Verdict::NonEmpty,
                        Ok(false) => Verdict::Empty,
                        Err(e) => {
                            log::warn!("intersection of {s1} and {s2} undecided ({e}); assuming it is non-empty");
                            self.bump(|s| s.failures += 1);
                            Verdict::Unknown
                        }
                    }
                }
            }
        };
        if v == Verdict::Empty {
            self.bump(|s| s.empty += 1);
        }
        self.cache.lock().expect("cache lock").insert(key, v);
        v
    }

    pub fn may_intersect(&self, s1: &Selector, s2: &Selector) -> bool {
        self.verdict(s1, s2).may_intersect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selector::parse_selector;

    fn sel(s: &str) -> Selector {
        parse_selector(s).unwrap()
    }

    #[test]
    fn prefilter_cases() {
        assert_eq!(prefilter(&sel("#a"), &sel("#b")), Some(Verdict::Empty));
        assert_eq!(prefilter(&sel("p::before"), &sel("p")), Some(Verdict::Empty));
        assert_eq!(prefilter(&sel(".a"), &sel(".a")), Some(Verdict::NonEmpty));
        assert_eq!(prefilter(&sel("div"), &sel("span")), Some(Verdict::Empty));
        assert_eq!(prefilter(&sel(".a"), &sel(".b")), None);
    }

    #[test]
    fn checker_caches_symmetric_queries() {
        let c = IntersectionChecker::new(EmptinessConfig::default());
        assert!(c.may_intersect(&sel(".a"), &sel(".b")));
        assert!(c.may_intersect(&sel(".b"), &sel(".a")));
        assert_eq!(c.stats().cache_hits, 1);
        assert!(c.may_intersect(&sel("div > .a"), &sel(":root > .b > .a:nth-child(1)")));
        assert!(!c.may_intersect(&sel(":root > .a"), &sel(":root > * > .a")));
    }

    #[test]
    fn failures_are_conservative() {
        let cfg = EmptinessConfig {
            backend: Backend::Full,
            search: SearchConfig {
                solver: SolverConfig {
                    path: "/nonexistent".into(),
                    ..Default::default()
                },
                ..Default::default()
            },
        };
        let c = IntersectionChecker::new(cfg);
        assert_eq!(c.verdict(&sel(".a"), &sel(".b")), Verdict::Unknown);
        assert!(c.may_intersect(&sel(".a"), &sel(".b")));
        assert_eq!(c.stats().failures, 1);
    }

    #[test]
    fn backends_agree_on_small_cases() {
        let cases = [
            ("*", true),
            ("#x#y", false),
            (":root ~ .a", false),
            ("p:only-child:nth-child(2)", false),
            (":not(:root):not(:nth-child(2n+2)):not(:nth-child(5n+3))", true),
            ("p:nth-of-type(2):first-child", false),
            ("a:nth-last-child(3) ~ b:last-child", true),
        ];
        for (s, want) in cases {
            let a = compile(&sel(s));
            assert_eq!(check_nonempty_full(&a, &SolverConfig::default()).unwrap(), want, "full {s}");
            assert_eq!(
                check_nonempty_optimized(&a, &SearchConfig::default()).unwrap(),
                want,
                "optimized {s}"
            );
        }
    }
}
