//! The greedy minifier: repeatedly apply the best merging opportunity.

pub mod validate;

pub use validate::{graph_check, validate_equivalence, Counterexample, Validation, ValidationBounds};

use crate::biclique::{enumerate_maximal_bicliques, Biclique, EnumerationMode, OrderClosure};
use crate::emptiness::{Backend, CheckerStats, EmptinessConfig, IntersectionChecker};
use crate::graph::{apply_opportunity, extract_edge_order, is_valid_covering, trim, Covering, CssGraph, GraphDump};
use crate::maxsat::{find_best_opportunity, suggest_partitions, EncodeOptions, MaxSatConfig, MaxSatError, SearchOptions};
use crate::stylesheet::{parse_stylesheet_with, CssError, ParseOptions, Segment, Stylesheet};
use serde::Serialize;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Version of the JSON report layout.
pub const REPORT_VERSION: u32 = 1;

/// Settings of a minifier run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub timeout: Duration,
    pub max_iterations: usize,
    /// Threads for emptiness queries and concurrent Max-SAT partitions.
    pub workers: usize,
    /// Partitions per worker; chosen from the covering size when `None`.
    pub partitions_per_worker: Option<usize>,
    pub mode: EnumerationMode,
    pub encode: EncodeOptions,
    pub emptiness: EmptinessConfig,
    pub maxsat: MaxSatConfig,
    pub validate: Option<ValidationBounds>,
    /// One worker and one partition, no timings in the report.
    pub deterministic: bool,
    pub parse: ParseOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            timeout: Duration::from_secs(300),
            max_iterations: 100,
            workers: 1,
            partitions_per_worker: None,
            mode: EnumerationMode::Fast,
            encode: EncodeOptions::default(),
            emptiness: EmptinessConfig::default(),
            maxsat: MaxSatConfig::default(),
            validate: None,
            deterministic: false,
            parse: ParseOptions::default(),
        }
    }
}

impl RunConfig {
    /// The configuration actually used, with the deterministic overrides.
    pub fn effective(&self) -> RunConfig {
        let mut c = self.clone();
        c.workers = c.workers.max(1);
        if c.deterministic {
            c.workers = 1;
            c.partitions_per_worker = Some(1);
        }
        c
    }
}

/// Configuration echoed in the report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigSummary {
    pub timeout_s: f64,
    pub max_iterations: usize,
    pub workers: usize,
    pub partitions_per_worker: Option<usize>,
    pub mode: EnumerationMode,
    pub encode: EncodeOptions,
    pub backend: Backend,
    pub validate: Option<ValidationBounds>,
    pub deterministic: bool,
}

/// One applied merging opportunity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationReport {
    pub iteration: usize,
    pub segment: usize,
    /// Text of the inserted rule.
    pub rule: String,
    /// Number of rules of the segment before the insertion point.
    pub position: usize,
    pub selectors: usize,
    pub declarations: usize,
    pub weight_before: usize,
    pub weight_after: usize,
    pub bytes_before: usize,
    pub bytes_after: usize,
    pub bicliques: usize,
    pub forbidden: usize,
    pub variables: u32,
    pub hard_clauses: usize,
    pub soft_clauses: usize,
    pub partitions: usize,
    pub wall_ms: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StopReason {
    NoOpportunity,
    Timeout,
    MaxIterations,
}

/// Summary of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub version: u32,
    pub config: ConfigSummary,
    /// Length of the input text.
    pub bytes_input: usize,
    /// Length after removing whitespace and comments.
    pub bytes_baseline: usize,
    pub bytes_output: usize,
    pub saving_bytes: usize,
    /// Saving relative to the baseline, in percent.
    pub saving_percent: f64,
    pub rule_segments: usize,
    pub edge_order_pairs: usize,
    pub iterations: Vec<IterationReport>,
    pub stop: StopReason,
    pub solver_errors: Vec<String>,
    pub emptiness: CheckerStats,
    pub validation: Option<Validation>,
    pub wall_ms: Option<u64>,
}

/// Minified text, report and graph dumps of a run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub css: String,
    pub report: RunReport,
    /// Graph of each rule segment with its edge order.
    pub graphs: Vec<GraphDump>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Parse(#[from] CssError),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

struct SegmentState {
    /// Index into the segment list.
    slot: usize,
    g: CssGraph,
    c: Covering,
    closure: OrderClosure,
    maximal: Vec<Biclique>,
}

fn render(segs: &[Segment]) -> String {
    Stylesheet::from_segments(segs).to_string()
}

fn nodes(c: &Covering) -> usize {
    c.iter().map(|r| r.sels.len() + r.props.len()).sum()
}

/// Minify `text`.
pub fn run(text: &str, cfg: &RunConfig) -> Result<RunOutput, RunError> {
    let cfg = cfg.effective();
    let start = Instant::now();
    let timed = |d: Duration| (!cfg.deterministic).then_some(d.as_millis() as u64);
    let sheet = parse_stylesheet_with(text, cfg.parse)?;
    let baseline = sheet.to_string();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let checker = IntersectionChecker::new(cfg.emptiness.clone());

    let mut segs = sheet.segments();
    let mut states = Vec::new();
    for (slot, s) in segs.iter().enumerate() {
        let Segment::Rules(rules) = s else { continue };
        let (mut g, c) = CssGraph::build(rules);
        g.order = pool.install(|| extract_edge_order(&g, &c, &checker));
        let c = trim(&c);
        let closure = OrderClosure::new(&g);
        let maximal = enumerate_maximal_bicliques(&g);
        states.push(SegmentState {
            slot,
            g,
            c,
            closure,
            maximal,
        });
    }
    for st in &states {
        segs[st.slot] = Segment::Rules(st.g.to_rules(&st.c));
    }
    let graphs: Vec<GraphDump> = states.iter().map(|st| st.g.dump()).collect();

    let mut iterations = Vec::new();
    let mut solver_errors = Vec::new();
    let mut stop = StopReason::NoOpportunity;
    let mut bytes = render(&segs).len();
    'segments: for st in &mut states {
        loop {
            if iterations.len() >= cfg.max_iterations {
                stop = StopReason::MaxIterations;
                break 'segments;
            }
            let Some(remaining) = cfg.timeout.checked_sub(start.elapsed()).filter(|d| !d.is_zero()) else {
                stop = StopReason::Timeout;
                break 'segments;
            };
            let (workers, ppw) = match cfg.partitions_per_worker {
                Some(p) => (cfg.workers, p.max(1)),
                None => suggest_partitions(nodes(&st.c), cfg.workers),
            };
            let mut solver = cfg.maxsat.clone();
            solver.timeout = solver.timeout.min(remaining);
            let opts = SearchOptions {
                mode: cfg.mode,
                encode: cfg.encode,
                solver,
                workers,
                partitions_per_worker: ppw,
                iteration: iterations.len(),
            };
            let t0 = Instant::now();
            let out = match find_best_opportunity(&st.g, &st.c, &st.closure, &st.maximal, &opts) {
                Ok(out) => out,
                Err(MaxSatError::Timeout(_)) if start.elapsed() >= cfg.timeout => {
                    stop = StopReason::Timeout;
                    break 'segments;
                }
                Err(e) => {
                    log::warn!("segment {}: {e}; leaving it as it is", st.slot);
                    solver_errors.push(format!("segment {}: {e}", st.slot));
                    break;
                }
            };
            let Some(found) = out.found else { break };
            let next = apply_opportunity(&st.c, &found.opportunity);
            debug_assert!(is_valid_covering(&st.g, &next));
            let mut candidate = segs.clone();
            candidate[st.slot] = Segment::Rules(st.g.to_rules(&next));
            let next_bytes = render(&candidate).len();
            if next_bytes >= bytes {
                log::info!("segment {}: best opportunity does not shorten the text", st.slot);
                break;
            }
            iterations.push(IterationReport {
                iteration: iterations.len() + 1,
                segment: st.slot,
                rule: st.g.serialize(std::slice::from_ref(&found.opportunity.rule)),
                position: found.opportunity.pos,
                selectors: found.opportunity.rule.sels.len(),
                declarations: found.opportunity.rule.props.len(),
                weight_before: st.g.total_weight(&st.c),
                weight_after: found.weight,
                bytes_before: bytes,
                bytes_after: next_bytes,
                bicliques: out.bicliques,
                forbidden: out.forbidden,
                variables: out.variables,
                hard_clauses: out.hard_clauses,
                soft_clauses: out.soft_clauses,
                partitions: out.partitions_searched,
                wall_ms: timed(t0.elapsed()),
            });
            log::info!("iteration {}: {} -> {} bytes", iterations.len(), bytes, next_bytes);
            st.c = next;
            segs = candidate;
            bytes = next_bytes;
        }
    }

    let css = render(&segs);
    let validation = match &cfg.validate {
        Some(b) => {
            let out = parse_stylesheet_with(&css, cfg.parse)?;
            Some(pool.install(|| validate_equivalence(&sheet, &out, b, &checker)))
        }
        None => None,
    };
    let saving = baseline.len().saturating_sub(css.len());
    let report = RunReport {
        version: REPORT_VERSION,
        config: ConfigSummary {
            timeout_s: cfg.timeout.as_secs_f64(),
            max_iterations: cfg.max_iterations,
            workers: cfg.workers,
            partitions_per_worker: cfg.partitions_per_worker,
            mode: cfg.mode,
            encode: cfg.encode,
            backend: cfg.emptiness.backend,
            validate: cfg.validate,
            deterministic: cfg.deterministic,
        },
        bytes_input: text.len(),
        bytes_baseline: baseline.len(),
        bytes_output: css.len(),
        saving_bytes: saving,
        saving_percent: if baseline.is_empty() {
            0.0
        } else {
            100.0 * saving as f64 / baseline.len() as f64
        },
        rule_segments: states.len(),
        edge_order_pairs: states.iter().map(|s| s.g.order.len()).sum(),
        iterations,
        stop,
        solver_errors,
        emptiness: checker.stats(),
        validation,
        wall_ms: timed(start.elapsed()),
    };
    Ok(RunOutput { css, report, graphs })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIMPLE: &str = "#apple { color:blue; font-size:small }\n\
        .fruit, #broccoli { color:red; font-size:large }\n\
        #orange { color:blue }\n\
        #tomato { color:red; font-size:large; background-color:lightblue }\n";

    fn deterministic() -> RunConfig {
        RunConfig {
            deterministic: true,
            validate: Some(ValidationBounds::default()),
            ..Default::default()
        }
    }

    #[test]
    fn walk_through() {
        let out = run(SIMPLE, &deterministic()).unwrap();
        assert_eq!(
            out.css,
            "#apple{font-size:small}#apple,#orange{color:blue}#tomato{background-color:lightblue}\
             .fruit,#broccoli,#tomato{color:red;font-size:large}"
        );
        let it = &out.report.iterations;
        assert_eq!(it.len(), 2);
        assert_eq!(it[0].rule, ".fruit,#broccoli,#tomato{color:red;font-size:large}");
        assert_eq!(it[0].position, 4);
        assert_eq!(it[1].rule, "#apple,#orange{color:blue}");
        assert_eq!(out.report.stop, StopReason::NoOpportunity);
        assert!(out.report.validation.as_ref().unwrap().pass);
        assert!(it.windows(2).all(|w| w[1].bytes_before == w[0].bytes_after));
        assert!(it.iter().all(|i| i.bytes_after < i.bytes_before));
    }

    #[test]
    fn minimal_file_is_unchanged() {
        let css = "a{color:red}b{margin:0}@media print{a{color:blue}}";
        let out = run(css, &deterministic()).unwrap();
        assert_eq!(out.css, css);
        assert!(out.report.iterations.is_empty());
        assert_eq!(out.report.rule_segments, 1);
    }

    #[test]
    fn deterministic_reports_repeat() {
        let a = run(SIMPLE, &deterministic()).unwrap();
        let b = run(SIMPLE, &deterministic()).unwrap();
        assert_eq!(a.css, b.css);
        assert_eq!(
            serde_json::to_string(&a.report).unwrap(),
            serde_json::to_string(&b.report).unwrap()
        );
        assert!(a.report.wall_ms.is_none());
    }

    #[test]
    fn iteration_budget() {
        let cfg = RunConfig {
            max_iterations: 1,
            ..deterministic()
        };
        let out = run(SIMPLE, &cfg).unwrap();
        assert_eq!(out.report.iterations.len(), 1);
        assert_eq!(out.report.stop, StopReason::MaxIterations);
        assert!(out.report.validation.unwrap().pass);
    }

    #[test]
    fn parse_errors_are_reported() {
        assert!(matches!(run("a{color:red", &RunConfig::default()), Err(RunError::Parse(_))));
    }

    #[test]
    fn missing_solver_is_recorded() {
        let mut cfg = deterministic();
        cfg.maxsat.command = "/nonexistent/maxsat".into();
        let out = run(SIMPLE, &cfg).unwrap();
        assert_eq!(out.report.solver_errors.len(), 1);
        assert!(out.report.iterations.is_empty());
        assert!(out.report.validation.unwrap().pass);
    }
}
