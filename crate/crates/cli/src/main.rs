//! `minify`: semantics-preserving CSS rule merging.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rulemerge::biclique::EnumerationMode;
use rulemerge::emptiness::Backend;
use rulemerge::minifier::{run, RunConfig, RunError, ValidationBounds};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

const EXIT_PARSE: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(version, about = "Shrink CSS files by merging rules without changing their meaning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minify one stylesheet.
    Minify(MinifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fast,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Opt,
    Full,
    Both,
}

#[derive(clap::Args)]
struct MinifyArgs {
    /// Input stylesheet.
    input: PathBuf,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Overall time budget in seconds.
    #[arg(long, default_value_t = 300.0)]
    timeout: f64,
    /// Maximum number of merges.
    #[arg(long, default_value_t = 100)]
    max_iterations: usize,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    workers: Option<usize>,
    /// Max-SAT partitions per worker; chosen from the file size by default.
    #[arg(long)]
    partitions: Option<usize>,
    /// Biclique enumeration: maximal orderable bicliques only, or also
    /// orderable sub-bicliques of unorderable ones.
    #[arg(long, value_enum, default_value = "fast")]
    mode: ModeArg,
    /// Selector intersection procedure.
    #[arg(long, value_enum, default_value = "opt")]
    backend: BackendArg,
    /// Write every SMT-LIB query to this directory.
    #[arg(long, value_name = "DIR")]
    emit_smt: Option<PathBuf>,
    /// Write every Max-SAT instance to this directory.
    #[arg(long, value_name = "DIR")]
    emit_wcnf: Option<PathBuf>,
    /// Write the CSS graphs with their edge orders as JSON.
    #[arg(long, value_name = "FILE")]
    emit_graph: Option<PathBuf>,
    /// Check the result against the input on documents up to this depth
    /// and branching, e.g. `2,2`.
    #[arg(long, value_name = "DEPTH,BRANCH", value_parser = parse_bounds)]
    validate: Option<ValidationBounds>,
    /// Single worker and partition, no timings in the report.
    #[arg(long)]
    deterministic: bool,
    /// Write the JSON run report to this file.
    #[arg(long, value_name = "FILE.json")]
    report: Option<PathBuf>,
    /// Keep unparseable rules verbatim instead of failing.
    #[arg(long)]
    lenient: bool,
    /// Max-SAT solver command (extended DIMACS in, s/o/v lines out).
    #[arg(long, value_name = "PATH")]
    maxsat: Option<PathBuf>,
    /// SMT solver command for the full intersection procedure.
    #[arg(long, value_name = "PATH")]
    smt: Option<PathBuf>,
}

fn parse_bounds(s: &str) -> Result<ValidationBounds, String> {
    let (d, b) = s.split_once(',').ok_or("expected DEPTH,BRANCH")?;
    let d: usize = d.trim().parse().map_err(|e| format!("depth: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("branch: {e}"))?;
    if d == 0 {
        return Err("depth must be positive".into());
    }
    Ok(ValidationBounds::new(d, b))
}

fn config(a: &MinifyArgs) -> Result<RunConfig> {
    if !a.timeout.is_finite() || a.timeout <= 0.0 {
        bail!("--timeout must be positive");
    }
    let mut cfg = RunConfig {
        timeout: Duration::from_secs_f64(a.timeout),
        max_iterations: a.max_iterations,
        workers: a
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
        partitions_per_worker: a.partitions,
        mode: match a.mode {
            ModeArg::Fast => EnumerationMode::Fast,
            ModeArg::Full => EnumerationMode::Full,
        },
        validate: a.validate,
        deterministic: a.deterministic,
        ..Default::default()
    };
    cfg.parse.lenient = a.lenient;
    cfg.emptiness.backend = match a.backend {
        BackendArg::Opt => Backend::Optimized,
        BackendArg::Full => Backend::Full,
        BackendArg::Both => Backend::Both,
    };
    cfg.emptiness.search.solver.emit_dir = a.emit_smt.clone();
    if let Some(p) = &a.smt {
        cfg.emptiness.search.solver.path = p.clone();
    }
    cfg.maxsat.emit_dir = a.emit_wcnf.clone();
    if let Some(p) = &a.maxsat {
        let is_rc2 = p.file_name().is_some_and(|n| n.to_string_lossy().starts_with("rc2"));
        cfg.maxsat.command = p.clone();
        cfg.maxsat.args = if is_rc2 { vec!["-vv".into()] } else { Vec::new() };
    }
    Ok(cfg)
}

fn minify(a: &MinifyArgs) -> Result<u8> {
    let cfg = config(a)?;
    let text = match std::fs::read_to_string(&a.input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", a.input.display());
            return Ok(EXIT_PARSE);
        }
    };
    let out = match run(&text, &cfg) {
        Ok(o) => o,
        Err(RunError::Parse(e)) => {
            eprintln!("error: {}: {e}", a.input.display());
            return Ok(EXIT_PARSE);
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(p) = &a.emit_graph {
        std::fs::write(p, serde_json::to_string_pretty(&out.graphs)?)
            .with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &a.report {
        std::fs::write(p, serde_json::to_string_pretty(&out.report)?)
            .with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(v) = &out.report.validation {
        if !v.pass {
            eprintln!("error: the minified stylesheet is not equivalent to the input");
            if let Some(g) = &v.graph_failure {
                eprintln!("graph check: {g}");
            }
            if let Some(cx) = &v.counterexample {
                eprintln!("counterexample: {cx}");
            }
            return Ok(EXIT_VALIDATION);
        }
    }
    match &a.output {
        Some(p) => std::fs::write(p, &out.css).with_context(|| format!("writing {}", p.display()))?,
        None => println!("{}", out.css),
    }
    let r = &out.report;
    eprintln!(
        "{} -> {} bytes ({:.2}% saved) in {} merges; stopped: {:?}",
        r.bytes_baseline,
        r.bytes_output,
        r.saving_percent,
        r.iterations.len(),
        r.stop
    );
    if !r.solver_errors.is_empty() {
        for e in &r.solver_errors {
            eprintln!("solver error: {e}");
        }
        return Ok(EXIT_SOLVER);
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Minify(a) => minify(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_PARSE)
        }
    }
}
