//! External SMT solver client: one process per query.

use super::ila::{emit_smtlib, parse_model, Model, Problem};
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;
use thiserror::Error;
use wait_timeout::ChildExt;

/// Solver binary, per-query timeout and optional query dump directory.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub path: PathBuf,
    pub timeout: Duration,
    /// When set, every query is written there as `<label>-<hash>.smt2`.
    pub emit_dir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            path: std::env::var_os("RULEMERGE_Z3")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("z3")),
            timeout: Duration::from_secs(20),
            emit_dir: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Model),
    Unsat,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("could not run solver: {0}")]
    Spawn(String),
    #[error("solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("solver answered unknown")]
    Unknown,
    #[error("unexpected solver output: {0}")]
    BadOutput(String),
    #[error("search budget exhausted")]
    Budget,
}

static QUERIES: AtomicUsize = AtomicUsize::new(0);

/// Number of solver processes started so far in this process.
pub fn query_count() -> usize {
    QUERIES.load(Ordering::Relaxed)
}

fn dump(cfg: &SolverConfig, label: &str, text: &str) {
    let Some(dir) = &cfg.emit_dir else { return };
    let mut h = DefaultHasher::new();
    text.hash(&mut h);
    let path = dir.join(format!("{label}-{:016x}.smt2", h.finish()));
    if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, text)) {
        log::warn!("could not write {}: {e}", path.display());
    }
}

/// Decide a problem with the external solver.
pub fn solve(p: &Problem, cfg: &SolverConfig, label: &str) -> Result<SolveResult, SolverError> {
    if p.is_trivially_false() {
        return Ok(SolveResult::Unsat);
    }
    let text = emit_smtlib(p);
    dump(cfg, label, &text);
    QUERIES.fetch_add(1, Ordering::Relaxed);
    let mut child = Command::new(&cfg.path)
        .arg("-in")
        .arg("-smt2")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| SolverError::Spawn(format!("{}: {e}", cfg.path.display())))?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let mut stdout = child.stdout.take().expect("piped stdout");
    let writer = std::thread::spawn(move || {
        let _ = stdin.write_all(text.as_bytes());
    });
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let status = child
        .wait_timeout(cfg.timeout)
        .map_err(|e| SolverError::Spawn(e.to_string()))?;
    if status.is_none() {
        let _ = child.kill();
        let _ = child.wait();
        let _ = writer.join();
        let _ = reader.join();
        return Err(SolverError::Timeout(cfg.timeout));
    }
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    let first = out.lines().next().unwrap_or("").trim();
    match first {
        "sat" => Ok(SolveResult::Sat(parse_model(&out))),
        "unsat" => Ok(SolveResult::Unsat),
        "unknown" => Err(SolverError::Unknown),
        _ => Err(SolverError::BadOutput(out.chars().take(200).collect())),
    }
}
