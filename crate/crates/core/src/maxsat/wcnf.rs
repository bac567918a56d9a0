//! Weighted CNF in the extended DIMACS format and the external solver client.

use super::cnf::Lit;
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::io::Read;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::Duration;
use thiserror::Error;
use wait_timeout::ChildExt;

/// Weighted partial CNF instance.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WcnfInstance {
    pub num_vars: u32,
    pub hard: Vec<Vec<Lit>>,
    pub soft: Vec<(u64, Vec<Lit>)>,
    /// Names of the semantic variables.
    pub names: BTreeMap<u32, String>,
}

impl WcnfInstance {
    /// Weight marking hard clauses: one more than the total soft weight.
    pub fn top(&self) -> u64 {
        self.soft.iter().map(|(w, _)| w).sum::<u64>() + 1
    }

    pub fn hard_satisfied(&self, val: &dyn Fn(u32) -> bool) -> bool {
        self.hard.iter().all(|c| clause_holds(c, val))
    }

    pub fn cost(&self, val: &dyn Fn(u32) -> bool) -> u64 {
        self.soft.iter().filter(|(_, c)| !clause_holds(c, val)).map(|(w, _)| w).sum()
    }

    /// Extended DIMACS text.
    pub fn to_dimacs(&self) -> String {
        let top = self.top();
        let mut out = String::new();
        writeln!(
            out,
            "p wcnf {} {} {}",
            self.num_vars,
            self.hard.len() + self.soft.len(),
            top
        )
        .expect("writing to a string");
        let mut clause = |w: u64, c: &[Lit]| {
            write!(out, "{w}").expect("writing to a string");
            for l in c {
                write!(out, " {l}").expect("writing to a string");
            }
            out.push_str(" 0\n");
        };
        for c in &self.hard {
            clause(top, c);
        }
        for (w, c) in &self.soft {
            clause(*w, c);
        }
        out
    }

    /// Parse extended DIMACS text; clauses weighted `top` are hard.
    pub fn parse_dimacs(text: &str) -> Result<Self, MaxSatError> {
        let mut inst = WcnfInstance::default();
        let mut top = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("p wcnf") {
                let f: Vec<u64> = rest
                    .split_whitespace()
                    .map(|x| x.parse().map_err(|_| bad(line)))
                    .collect::<Result<_, _>>()?;
                if f.len() != 3 {
                    return Err(bad(line));
                }
                inst.num_vars = f[0] as u32;
                top = Some(f[2]);
                continue;
            }
            let top = top.ok_or_else(|| bad(line))?;
            let mut it = line.split_whitespace();
            let w: u64 = it.next().and_then(|x| x.parse().ok()).ok_or_else(|| bad(line))?;
            let lits: Vec<Lit> = it.map(|x| x.parse().map_err(|_| bad(line))).collect::<Result<_, _>>()?;
            let (last, body) = lits.split_last().ok_or_else(|| bad(line))?;
            if *last != 0 {
                return Err(bad(line));
            }
            if w >= top {
                inst.hard.push(body.to_vec());
            } else {
                inst.soft.push((w, body.to_vec()));
            }
        }
        Ok(inst)
    }
}

fn bad(line: &str) -> MaxSatError {
    MaxSatError::BadOutput(line.chars().take(120).collect())
}

fn clause_holds(c: &[Lit], val: &dyn Fn(u32) -> bool) -> bool {
    c.iter().any(|&l| val(l.unsigned_abs()) == (l > 0))
}

/// Satisfying assignment reported by a solver.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MaxSatModel {
    pub values: HashMap<u32, bool>,
    /// Cost reported on the `o` line, if any.
    pub cost: Option<u64>,
}

impl MaxSatModel {
    pub fn value(&self, v: u32) -> bool {
        self.values.get(&v).copied().unwrap_or(false)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MaxSatOutcome {
    Optimum(MaxSatModel),
    Unsat,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MaxSatError {
    #[error("could not run Max-SAT solver: {0}")]
    Spawn(String),
    #[error("Max-SAT solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("malformed Max-SAT solver output: {0}")]
    BadOutput(String),
}

/// Parse solver output with `s`, `o` and `v` lines. Both the literal list
/// and the bit-string forms of `v` lines are accepted.
pub fn parse_solver_output(text: &str) -> Result<MaxSatOutcome, MaxSatError> {
    let mut status = None;
    let mut model = MaxSatModel::default();
    for line in text.lines() {
        let line = line.trim();
        let mut it = line.split_whitespace();
        match it.next() {
            Some("s") => status = Some(it.collect::<Vec<_>>().join(" ")),
            Some("o") => model.cost = it.next().and_then(|x| x.parse().ok()),
            Some("v") => {
                let toks: Vec<&str> = it.collect();
                if toks.len() == 1 && toks[0].len() > 1 && toks[0].chars().all(|c| c == '0' || c == '1') {
                    for (i, ch) in toks[0].chars().enumerate() {
                        model.values.insert(i as u32 + 1, ch == '1');
                    }
                    continue;
                }
                for t in toks {
                    let l: i64 = t.parse().map_err(|_| bad(line))?;
                    if l != 0 {
                        model.values.insert(l.unsigned_abs() as u32, l > 0);
                    }
                }
            }
            _ => {}
        }
    }
    match status.as_deref() {
        Some("OPTIMUM FOUND") => Ok(MaxSatOutcome::Optimum(model)),
        Some("UNSATISFIABLE") => Ok(MaxSatOutcome::Unsat),
        Some(other) => Err(MaxSatError::BadOutput(format!("status {other}"))),
        None => Err(MaxSatError::BadOutput(text.chars().take(200).collect())),
    }
}

/// External Max-SAT solver invocation.
#[derive(Clone, Debug)]
pub struct MaxSatConfig {
    pub command: PathBuf,
    /// Arguments placed before the instance file name.
    pub args: Vec<String>,
    pub timeout: Duration,
    /// When set, every instance is written there as `<label>-<hash>.wcnf`.
    pub emit_dir: Option<PathBuf>,
}

impl Default for MaxSatConfig {
    fn default() -> Self {
        let command = std::env::var_os("RULEMERGE_MAXSAT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("rc2.py"));
        // rc2 prints the model only when run with -vv.
        let is_rc2 = command
            .file_name()
            .is_some_and(|n| n.to_string_lossy().starts_with("rc2"));
        MaxSatConfig {
            command,
            args: if is_rc2 { vec!["-vv".into()] } else { Vec::new() },
            timeout: Duration::from_secs(60),
            emit_dir: None,
        }
    }
}

/// Solve an instance with the configured solver.
pub fn solve_wcnf(w: &WcnfInstance, cfg: &MaxSatConfig, label: &str) -> Result<MaxSatOutcome, MaxSatError> {
    if w.hard.iter().any(|c| c.is_empty()) {
        return Ok(MaxSatOutcome::Unsat);
    }
    let text = w.to_dimacs();
    let mut h = DefaultHasher::new();
    text.hash(&mut h);
    let name = format!("{label}-{:016x}.wcnf", h.finish());
    if let Some(dir) = &cfg.emit_dir {
        let path = dir.join(&name);
        if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, &text)) {
            log::warn!("could not write {}: {e}", path.display());
        }
    }
    let file = tempfile::Builder::new()
        .suffix(".wcnf")
        .tempfile()
        .map_err(|e| MaxSatError::Spawn(e.to_string()))?;
    std::fs::write(file.path(), &text).map_err(|e| MaxSatError::Spawn(e.to_string()))?;
    let mut child = Command::new(&cfg.command)
        .args(&cfg.args)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| MaxSatError::Spawn(format!("{}: {e}", cfg.command.display())))?;
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let status = child
        .wait_timeout(cfg.timeout)
        .map_err(|e| MaxSatError::Spawn(e.to_string()))?;
    if status.is_none() {
        let _ = child.kill();
        let _ = child.wait();
        let _ = reader.join();
        return Err(MaxSatError::Timeout(cfg.timeout));
    }
    let out = reader.join().unwrap_or_default();
    parse_solver_output(&out)
}
