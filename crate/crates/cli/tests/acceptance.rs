//! Acceptance suite: one pass/fail line per criterion.

#[path = "../../core/tests/common/gen.rs"]
mod gen;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rulemerge::automata::{compile, intersect, run_accepts};
use rulemerge::biclique::{enumerate_maximal_bicliques, Biclique, EnumerationMode, OrderClosure, OrderContext};
use rulemerge::dom::{enumerate_trees, in_progression, matches, tight_labels, Bounds};
use rulemerge::emptiness::ila::Model;
use rulemerge::emptiness::{
    check_nonempty_full, check_nonempty_optimized, nomatch, Backend, EmptinessConfig, IntersectionChecker, Problem,
    SearchConfig, SolverConfig, Term, Verdict,
};
use rulemerge::graph::{extract_edge_order, is_valid_covering, trim, CRule, Covering, CssGraph};
use rulemerge::maxsat::{brute_force_best_opportunity, find_best_opportunity, SearchOptions};
use rulemerge::minifier::{run, validate_equivalence, RunConfig, ValidationBounds};
use rulemerge::selector::{parse_selector, Selector};
use rulemerge::stylesheet::{parse_stylesheet, Rule};
use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

type Check = fn() -> Result<String, String>;

const SIMPLE: &str = "#apple { color:blue; font-size:small }
.fruit, #broccoli { color:red; font-size:large }
#orange { color:blue }
#tomato { color:red; font-size:large;
          background-color:lightblue }
";

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus_files() -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "css"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).expect("readable corpus file"))
        })
        .collect()
}

fn graph(css: &str, checker: &IntersectionChecker) -> (CssGraph, Covering) {
    let rules: Vec<Rule> = parse_stylesheet(css).unwrap().rules().cloned().collect();
    let (mut g, c) = CssGraph::build(&rules);
    g.order = extract_edge_order(&g, &c, checker);
    (g, c)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(start.elapsed() < limit, || {
        format!("took {:.1}s, limit {}s", start.elapsed().as_secs_f64(), limit.as_secs())
    })
}

/// Selector productions and a test on canonical selector text.
type Production = (&'static str, fn(&str) -> bool);

const PRODUCTIONS: &[Production] = &[
    ("type", |s| s.starts_with(|c: char| c.is_ascii_alphabetic())),
    ("universal", |s| s.contains('*')),
    ("namespace", |s| s.contains('|') && !s.contains("|=")),
    ("id", |s| s.contains('#')),
    ("class", |s| s.contains('.')),
    ("attribute presence", |s| {
        s.split('[').skip(1).any(|a| a.split(']').next().is_some_and(|x| !x.contains('=')))
    }),
    ("attribute =", |s| s.split('[').skip(1).any(|a| a.split(']').next().is_some_and(|x| x.contains('=') && !x.contains(['~', '|', '^', '$', '*'])))),
    ("attribute ~=", |s| s.contains("~=")),
    ("attribute |=", |s| s.contains("|=")),
    ("attribute ^=", |s| s.contains("^=")),
    ("attribute $=", |s| s.contains("$=")),
    ("attribute *=", |s| s.contains("*=")),
    ("descendant", |s| s.contains(' ')),
    ("child", |s| s.contains('>')),
    ("neighbour", |s| s.contains('+') && !s.contains("n+")),
    ("sibling", |s| s.replace("~=", "").contains('~')),
    ("negation", |s| s.contains(":not(")),
    (":root", |s| s.contains(":root")),
    (":empty", |s| s.contains(":empty")),
    (":first-child", |s| s.contains(":first-child")),
    (":last-child", |s| s.contains(":last-child")),
    (":only-child", |s| s.contains(":only-child")),
    (":nth-child", |s| s.contains(":nth-child(")),
    (":nth-last-child", |s| s.contains(":nth-last-child(")),
    (":first-of-type", |s| s.contains(":first-of-type")),
    (":last-of-type", |s| s.contains(":last-of-type")),
    (":only-of-type", |s| s.contains(":only-of-type")),
    (":nth-of-type", |s| s.contains(":nth-of-type(")),
    (":nth-last-of-type", |s| s.contains(":nth-last-of-type(")),
    (":lang", |s| s.contains(":lang(")),
    (":link", |s| s.contains(":link")),
    (":visited", |s| s.contains(":visited")),
    (":hover", |s| s.contains(":hover")),
    (":active", |s| s.contains(":active")),
    (":focus", |s| s.contains(":focus")),
    (":target", |s| s.contains(":target")),
    (":enabled", |s| s.contains(":enabled")),
    (":disabled", |s| s.contains(":disabled")),
    (":checked", |s| s.contains(":checked")),
    ("pseudo-element", |s| {
        [":before", ":after", ":first-line", ":first-letter"].iter().any(|p| s.contains(p))
    }),
];

fn criterion_1() -> Result<String, String> {
    let start = Instant::now();
    let mut seen = HashSet::new();
    let mut sels: Vec<Selector> = Vec::new();
    for (_, text) in corpus_files() {
        for r in parse_stylesheet(&text).map_err(|e| e.to_string())?.rules() {
            for s in &r.selectors {
                if seen.insert(s.to_string()) {
                    sels.push(s.clone());
                }
            }
        }
    }
    ensure(sels.len() >= 50, || format!("only {} corpus selectors", sels.len()))?;
    let texts: Vec<String> = sels.iter().map(|s| s.to_string()).collect();
    let missing: Vec<&str> = PRODUCTIONS
        .iter()
        .filter(|(_, f)| !texts.iter().any(|t| f(t)))
        .map(|(n, _)| *n)
        .collect();
    ensure(missing.is_empty(), || format!("productions not covered: {missing:?}"))?;
    let results: Vec<(usize, usize, Option<String>)> = sels
        .par_iter()
        .map(|s| {
            let a = compile(s);
            let bounds = Bounds::new(3, 3, tight_labels(&[s])).with_max_nodes(4);
            let (mut checks, mut bad, mut first) = (0, 0, None);
            for t in enumerate_trees(&bounds) {
                for n in 0..t.len() {
                    checks += 1;
                    if run_accepts(&a, &t, n) != matches(&t, n, s) {
                        bad += 1;
                        first.get_or_insert_with(|| format!("{s} at node {n} of\n{}", t.dump()));
                    }
                }
            }
            (checks, bad, first)
        })
        .collect();
    let checks: usize = results.iter().map(|r| r.0).sum();
    let bad: usize = results.iter().map(|r| r.1).sum();
    if let Some(w) = results.iter().find_map(|r| r.2.clone()) {
        return Err(format!("{bad} disagreements, first: {w}"));
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!(
        "{} corpus selectors, {} productions, {checks} (tree, node) checks, 0 disagreements",
        sels.len(),
        PRODUCTIONS.len()
    ))
}

fn criterion_2() -> Result<String, String> {
    let start = Instant::now();
    let sel = |s: &str| parse_selector(s).unwrap();
    let g1 = sel(".commercial--masterclasses .lineitem:nth-child(4)");
    let cases = [
        (g1.clone(), sel(".commercial--soulmates:nth-child(n+3)"), true),
        (g1, sel(".commercial--soulmates:nth-child(2n+3)"), false),
        (sel("#x"), sel("#y"), false),
    ];
    let mut n = 0;
    for backend in [Backend::Optimized, Backend::Full] {
        let checker = IntersectionChecker::new(EmptinessConfig {
            backend,
            ..Default::default()
        });
        for (a, b, want) in &cases {
            let v = checker.verdict(a, b);
            let expected = if *want { Verdict::NonEmpty } else { Verdict::Empty };
            ensure(v == expected, || format!("{backend:?}: {a} and {b} gave {v:?}"))?;
            n += 1;
        }
        let hard = compile(&sel(":not(:root):not(:nth-child(2n+2)):not(:nth-child(5n+3))"));
        let cfg = EmptinessConfig {
            backend,
            ..Default::default()
        };
        let ok = rulemerge::emptiness::check_nonempty(&hard, &cfg).map_err(|e| e.to_string())?;
        ensure(ok, || format!("{backend:?}: positional instance reported empty"))?;
        n += 1;
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("{n} verdicts exact on both backends"))
}

const SUITE: &[&str] = &[
    "*", ".a", "#x", "#y", "p", "div p", "div > p", "p + .a", "p ~ .b", ":root", ":root > *", ":first-child",
    ":nth-child(2n+1)", ":nth-child(3)", ":nth-last-child(2)", ":only-child", "p:first-of-type", "p:nth-of-type(2)",
    ":empty", ":not(:empty)", "[lang|=en]", "[href^=http]", ":not([href])", ".a:not(.b)", "li:nth-child(n+3)",
];

fn criterion_3() -> Result<String, String> {
    let sels: Vec<Selector> = SUITE.iter().map(|s| parse_selector(s).unwrap()).collect();
    let mut pairs = Vec::new();
    for i in 0..sels.len() {
        for j in i..sels.len() {
            pairs.push((i, j));
        }
    }
    ensure(pairs.len() >= 200, || format!("only {} pairs", pairs.len()))?;
    let (search, solver) = (SearchConfig::default(), SolverConfig::default());
    let outcomes: Vec<Result<bool, String>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let a = intersect(&compile(&sels[i]), &compile(&sels[j]));
            let fast = check_nonempty_optimized(&a, &search).map_err(|e| format!("{} & {}: {e}", sels[i], sels[j]))?;
            let full = check_nonempty_full(&a, &solver).map_err(|e| format!("{} & {}: {e}", sels[i], sels[j]))?;
            if fast != full {
                return Err(format!("{} & {}: optimized {fast}, full {full}", sels[i], sels[j]));
            }
            Ok(fast)
        })
        .collect();
    let mut nonempty = 0;
    for o in outcomes {
        nonempty += usize::from(o?);
    }
    Ok(format!("{} pairs, 100% agreement ({nonempty} non-empty)", pairs.len()))
}

/// `nomatch(x, a, b)` evaluated by trying the integer witnesses that can
/// satisfy its disjuncts.
fn nomatch_holds(x: i64, a: i64, b: i64) -> bool {
    let mut p = Problem::new();
    let f = nomatch(&mut p, "t", Term::var("x"), a, b);
    let mut m = Model::default();
    m.ints.insert("x".into(), x);
    let aux_ok = |m: &Model| p.assertions.iter().all(|c| c.eval(m) == Some(true));
    if a.abs() <= 1 {
        return f.eval(&m) == Some(true);
    }
    for r in 1..a.abs() {
        let base = (x - b - r * a.signum()).div_euclid(a);
        for k in [base - 1, base, base + 1] {
            m.ints.insert("t_k".into(), k);
            m.ints.insert("t_r".into(), r);
            if aux_ok(&m) && f.eval(&m) == Some(true) {
                return true;
            }
        }
    }
    m.ints.insert("t_k".into(), 0);
    m.ints.insert("t_r".into(), 1);
    f.eval(&m) == Some(true)
}

fn criterion_4() -> Result<String, String> {
    let mut n = 0;
    for a in -10..=10i64 {
        for b in -10..=10i64 {
            for x in 0..=200i64 {
                let brute = !(0..=400).any(|k| a * k + b == x);
                ensure(brute == !in_progression(x, a, b), || format!("matcher at x={x} a={a} b={b}"))?;
                ensure(nomatch_holds(x, a, b) == brute, || format!("formula at x={x} a={a} b={b}"))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} grid points, 0 failures"))
}

fn criterion_5() -> Result<String, String> {
    let checker = IntersectionChecker::new(EmptinessConfig::default());
    let bigger = format!("{SIMPLE}.fruit, #broccoli, #tomato {{ color:red; font-size:large }}\n");
    let trimmed_expected = "#apple { color:blue; font-size:small }
#orange { color:blue }
#tomato { background-color:lightblue }
.fruit, #broccoli, #tomato { color:red; font-size:large }";
    let (g, c) = graph(&bigger, &checker);
    let got = g.serialize(&trim(&c));
    let want = parse_stylesheet(trimmed_expected).unwrap().to_string();
    ensure(got == want, || format!("trimmed to {got}, expected {want}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for k in 0..100 {
        let css = gen::small_sheet(&mut rng, 16);
        let (g, mut c) = graph(&css, &checker);
        // Insert a few random rules built from existing edges.
        for _ in 0..rng.gen_range(0..3) {
            let edges: Vec<_> = g.edges.iter().copied().collect();
            let (s, p) = edges[rng.gen_range(0..edges.len())];
            let pos = rng.gen_range(0..=c.len());
            c.insert(pos, CRule::new(vec![s], vec![p]));
        }
        let t = trim(&c);
        ensure(trim(&t) == t, || format!("covering {k} not idempotent: {css}"))?;
        let before: BTreeSet<_> = c.iter().flat_map(|r| r.edges()).collect();
        let after: BTreeSet<_> = t.iter().flat_map(|r| r.edges()).collect();
        ensure(before == after, || format!("covering {k} lost edges: {css}"))?;
    }
    Ok("trim golden exact; 100 random coverings idempotent and edge-preserving".into())
}

fn criterion_6() -> Result<String, String> {
    let checker = IntersectionChecker::new(EmptinessConfig::default());
    let variant = SIMPLE.replace("#orange {", ".vegetable, #orange {");
    let (g, _) = graph(&variant, &checker);
    let got: Vec<String> = g
        .order
        .iter()
        .map(|&(e, f)| format!("{} < {}", g.edge_label(e), g.edge_label(f)))
        .collect();
    let want = vec!["(.fruit, color:red) < (.vegetable, color:blue)".to_string()];
    ensure(got == want, || format!("order {got:?}"))?;

    let (g, _) = graph(
        ".a { color:red; color:rgba(255,0,0,0.5) } .b { color:red; color:rgba(255,0,0,0.5) }",
        &checker,
    );
    let s = |t: &str| g.sel_text.iter().position(|x| x == t).unwrap();
    let p = |t: &str| g.prop_text.iter().position(|x| x == t).unwrap();
    let bad = ((s(".a"), p("color:rgba(255,0,0,0.5)")), (s(".b"), p("color:red")));
    let good = ((s(".b"), p("color:red")), (s(".b"), p("color:rgba(255,0,0,0.5)")));
    ensure(!g.order.contains(&bad), || "the fallback pair is still ordered".into())?;
    ensure(g.order.contains(&good), || "the same-selector pair is missing".into())?;
    Ok(format!("variant order exact; fallback refinement holds ({} pairs)", g.order.len()))
}

fn criterion_7() -> Result<String, String> {
    let checker = IntersectionChecker::new(EmptinessConfig::default());
    let (g, c) = graph(".a { color:blue; color:green } .b { color:green; color:blue }", &checker);
    let closure = OrderClosure::new(&g);
    let ctx = OrderContext::new(&g, &c, &closure);
    let b = Biclique::new(vec![0, 1], vec![0, 1]);
    ensure(enumerate_maximal_bicliques(&g).contains(&b), || "biclique not maximal".into())?;
    for j in [0, 1] {
        ensure(ctx.is_orderable(&b, j), || format!("unorderable at {j}"))?;
    }
    ensure(!ctx.is_orderable(&b, 2), || "orderable at 2".into())?;
    let cycle = ctx.cycle(&b, 2).ok_or("no cycle witness")?;
    let names: BTreeSet<&str> = cycle.iter().map(|&p| g.prop_text[p].as_str()).collect();
    ensure(names == BTreeSet::from(["color:blue", "color:green"]), || format!("cycle {names:?}"))?;
    Ok("orderable at 0 and 1, cycle color:blue/color:green at 2".into())
}

fn criterion_8() -> Result<String, String> {
    let start = Instant::now();
    let checker = IntersectionChecker::new(EmptinessConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let opts = SearchOptions {
        mode: EnumerationMode::Full,
        ..Default::default()
    };
    let mut improving = 0;
    for k in 0..30 {
        let css = gen::small_sheet(&mut rng, 12);
        let (g, c) = graph(&css, &checker);
        let c = trim(&c);
        let closure = OrderClosure::new(&g);
        let ctx = OrderContext::new(&g, &c, &closure);
        let maximal = enumerate_maximal_bicliques(&g);
        let current = g.total_weight(&c);
        let brute = brute_force_best_opportunity(&g, &c, &ctx, &maximal).map_or(current, |(_, w)| w);
        let out = find_best_opportunity(&g, &c, &closure, &maximal, &opts).map_err(|e| e.to_string())?;
        let solver = out.found.as_ref().map_or(current, |f| f.weight);
        ensure(solver == brute, || format!("sheet {k}: solver {solver}, brute force {brute}: {css}"))?;
        improving += usize::from(brute < current);
    }
    within(start, Duration::from_secs(600))?;
    Ok(format!("30 sheets, exact weight equality ({improving} with an improving merge)"))
}

fn criterion_9() -> Result<String, String> {
    let cfg = RunConfig {
        deterministic: true,
        ..Default::default()
    };
    let out = run(SIMPLE, &cfg).map_err(|e| e.to_string())?;
    let steps: Vec<(String, usize)> = out.report.iterations.iter().map(|i| (i.rule.clone(), i.position)).collect();
    let want_steps = vec![
        (".fruit,#broccoli,#tomato{color:red;font-size:large}".to_string(), 4),
        ("#apple,#orange{color:blue}".to_string(), 2),
    ];
    ensure(steps == want_steps, || format!("merge sequence {steps:?}"))?;
    let want = "#apple{font-size:small}#apple,#orange{color:blue}#tomato{background-color:lightblue}\
                .fruit,#broccoli,#tomato{color:red;font-size:large}";
    ensure(out.css == want, || format!("final file {}", out.css))?;
    Ok(format!("two merges, final file byte-exact ({} bytes)", out.css.len()))
}

fn criterion_10() -> Result<String, String> {
    let mut lines = Vec::new();
    let mut soft = Vec::new();
    for (name, text) in corpus_files() {
        let rules = parse_stylesheet(&text).map_err(|e| format!("{name}: {e}"))?.rules().count();
        let start = Instant::now();
        let cfg = RunConfig {
            deterministic: true,
            validate: Some(ValidationBounds::default()),
            ..Default::default()
        };
        let out = run(&text, &cfg).map_err(|e| format!("{name}: {e}"))?;
        let r = &out.report;
        let v = r.validation.as_ref().ok_or("no validation result")?;
        ensure(v.pass, || format!("{name}: validation failed: {v:?}"))?;
        ensure(r.bytes_output <= r.bytes_baseline, || format!("{name}: output grew"))?;
        within(start, Duration::from_secs(300)).map_err(|e| format!("{name}: {e}"))?;
        let savings: Vec<usize> = r.iterations.iter().map(|i| i.bytes_before - i.bytes_after).collect();
        if savings.len() > 1 {
            let mean = savings[1..].iter().sum::<usize>() as f64 / (savings.len() - 1) as f64;
            if (savings[0] as f64) < mean {
                soft.push(name.clone());
            }
        }
        lines.push(format!("{name} {rules} rules -{:.1}%", r.saving_percent));
    }
    let soft = if soft.is_empty() {
        "first merge saves at least the mean of later ones everywhere".to_string()
    } else {
        format!("soft check: first merge below later mean in {soft:?}")
    };
    Ok(format!("{}; {soft}", lines.join(", ")))
}

fn criterion_11() -> Result<String, String> {
    let checker = IntersectionChecker::new(EmptinessConfig::default());
    let original = ".a { color:red; font-size:large } .c { color:green } .b { color:red; font-size:large }";
    let merged = ".a, .b { color:red; font-size:large } .c { color:green }";
    let (g, _) = graph(original, &checker);
    let idx = |t: &str| g.sel_text.iter().position(|x| x == t).unwrap();
    let pidx = |t: &str| g.prop_text.iter().position(|x| x == t).unwrap();
    let cover = vec![
        CRule::new(vec![idx(".a"), idx(".b")], vec![pidx("color:red"), pidx("font-size:large")]),
        CRule::new(vec![idx(".c")], vec![pidx("color:green")]),
    ];
    ensure(!is_valid_covering(&g, &cover), || "class merge accepted as a valid covering".into())?;
    let v = validate_equivalence(
        &parse_stylesheet(original).unwrap(),
        &parse_stylesheet(merged).unwrap(),
        &ValidationBounds::default(),
        &checker,
    );
    ensure(!v.pass, || "validation passed".into())?;
    let cx = v.counterexample.ok_or("no witness document")?;
    let class = cx.tree.label(cx.node).attr("", "class").unwrap_or_default().to_string();
    let classes: BTreeSet<&str> = class.split(' ').collect();
    ensure(classes.contains("b") && classes.contains("c"), || format!("witness classes {class:?}"))?;
    Ok(format!(
        "rejected; witness node with class=\"{class}\" gets {} instead of {}",
        cx.minified.unwrap_or_default(),
        cx.original.unwrap_or_default()
    ))
}

fn main() {
    let criteria: [(u32, &str, Check); 11] = [
        (1, "selector/automaton equivalence", criterion_1),
        (2, "intersection ground truth", criterion_2),
        (3, "emptiness backend agreement", criterion_3),
        (4, "nomatch grid", criterion_4),
        (5, "trim golden and idempotence", criterion_5),
        (6, "edge order golden", criterion_6),
        (7, "orderability golden", criterion_7),
        (8, "Max-SAT optimality", criterion_8),
        (9, "end-to-end walk-through", criterion_9),
        (10, "semantic preservation on corpus", criterion_10),
        (11, "invalid merge detection", criterion_11),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, check) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {n:>2} PASS [{name}] ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL [{name}] ({secs:.1}s) {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
