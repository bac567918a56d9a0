//! Quantifier-free integer linear arithmetic formulas and SMT-LIB emission.

use std::collections::BTreeMap;
use std::fmt::Write;

/// Variable sort.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sort {
    Int,
    Bool,
}

/// Linear integer term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(i64),
    Add(Vec<Term>),
    /// Constant multiple.
    Mul(i64, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn plus(self, k: i64) -> Self {
        if k == 0 {
            self
        } else {
            Term::Add(vec![self, Term::Const(k)])
        }
    }

    pub fn add(self, other: Term) -> Self {
        Term::Add(vec![self, other])
    }

    pub fn sub(self, other: Term) -> Self {
        Term::Add(vec![self, Term::Mul(-1, Box::new(other))])
    }

    pub fn sum(terms: Vec<Term>) -> Self {
        if terms.is_empty() {
            Term::Const(0)
        } else {
            Term::Add(terms)
        }
    }

    pub fn scale(self, k: i64) -> Self {
        Term::Mul(k, Box::new(self))
    }

    fn eval(&self, m: &Model) -> Option<i64> {
        Some(match self {
            Term::Var(v) => *m.ints.get(v)?,
            Term::Const(k) => *k,
            Term::Add(ts) => {
                let mut s = 0;
                for t in ts {
                    s += t.eval(m)?;
                }
                s
            }
            Term::Mul(k, t) => k * t.eval(m)?,
        })
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) => out.push(v),
            Term::Const(_) => {}
            Term::Add(ts) => ts.iter().for_each(|t| t.collect_vars(out)),
            Term::Mul(_, t) => t.collect_vars(out),
        }
    }
}

fn write_int(out: &mut String, k: i64) {
    if k < 0 {
        let _ = write!(out, "(- {})", k.unsigned_abs());
    } else {
        let _ = write!(out, "{k}");
    }
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Var(v) => out.push_str(v),
        Term::Const(k) => write_int(out, *k),
        Term::Add(ts) => {
            out.push_str("(+");
            for t in ts {
                out.push(' ');
                write_term(out, t);
            }
            out.push(')');
        }
        Term::Mul(k, t) => {
            out.push_str("(* ");
            write_int(out, *k);
            out.push(' ');
            write_term(out, t);
            out.push(')');
        }
    }
}

/// Comparison operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// Boolean combination of linear constraints and Boolean variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    BoolVar(String),
    Cmp(Cmp, Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn cmp(op: Cmp, l: Term, r: Term) -> Self {
        Formula::Cmp(op, l, r)
    }

    pub fn eq(l: Term, r: Term) -> Self {
        Formula::Cmp(Cmp::Eq, l, r)
    }

    pub fn eq_const(v: &str, k: i64) -> Self {
        Formula::Cmp(Cmp::Eq, Term::var(v), Term::Const(k))
    }

    pub fn bool_var(v: impl Into<String>) -> Self {
        Formula::BoolVar(v.into())
    }

    /// Conjunction with constant folding.
    pub fn and(fs: Vec<Formula>) -> Self {
        let mut out = Vec::new();
        for f in fs {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().expect("one element"),
            _ => Formula::And(out),
        }
    }

    /// Disjunction with constant folding.
    pub fn or(fs: Vec<Formula>) -> Self {
        let mut out = Vec::new();
        for f in fs {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().expect("one element"),
            _ => Formula::Or(out),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => *inner,
            f => Formula::Not(Box::new(f)),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        match (&a, &b) {
            (Formula::False, _) | (_, Formula::True) => Formula::True,
            (Formula::True, _) => b,
            (_, Formula::False) => Formula::not(a),
            _ => Formula::Implies(Box::new(a), Box::new(b)),
        }
    }

    /// Evaluate under a model; `None` when a variable is unassigned.
    pub fn eval(&self, m: &Model) -> Option<bool> {
        Some(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::BoolVar(v) => *m.bools.get(v)?,
            Formula::Cmp(op, l, r) => {
                let (l, r) = (l.eval(m)?, r.eval(m)?);
                match op {
                    Cmp::Eq => l == r,
                    Cmp::Ne => l != r,
                    Cmp::Lt => l < r,
                    Cmp::Le => l <= r,
                    Cmp::Gt => l > r,
                    Cmp::Ge => l >= r,
                }
            }
            Formula::Not(f) => !f.eval(m)?,
            Formula::And(fs) => {
                let mut all = true;
                for f in fs {
                    all &= f.eval(m)?;
                }
                all
            }
            Formula::Or(fs) => {
                let mut any = false;
                for f in fs {
                    any |= f.eval(m)?;
                }
                any
            }
            Formula::Implies(a, b) => !a.eval(m)? || b.eval(m)?,
        })
    }

    /// Names of all variables occurring in the formula, with their sort.
    pub fn variables(&self) -> Vec<(&str, Sort)> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<(&'a str, Sort)>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::BoolVar(v) => out.push((v, Sort::Bool)),
            Formula::Cmp(_, l, r) => {
                let mut vs = Vec::new();
                l.collect_vars(&mut vs);
                r.collect_vars(&mut vs);
                out.extend(vs.into_iter().map(|v| (v, Sort::Int)));
            }
            Formula::Not(f) => f.collect_vars(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_vars(out)),
            Formula::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

fn write_formula(out: &mut String, f: &Formula) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::BoolVar(v) => out.push_str(v),
        Formula::Cmp(op, l, r) => {
            let sym = match op {
                Cmp::Eq => "=",
                Cmp::Ne => "distinct",
                Cmp::Lt => "<",
                Cmp::Le => "<=",
                Cmp::Gt => ">",
                Cmp::Ge => ">=",
            };
            let _ = write!(out, "({sym} ");
            write_term(out, l);
            out.push(' ');
            write_term(out, r);
            out.push(')');
        }
        Formula::Not(f) => {
            out.push_str("(not ");
            write_formula(out, f);
            out.push(')');
        }
        Formula::And(fs) | Formula::Or(fs) => {
            out.push_str(if matches!(f, Formula::And(_)) { "(and" } else { "(or" });
            for g in fs {
                out.push(' ');
                write_formula(out, g);
            }
            out.push(')');
        }
        Formula::Implies(a, b) => {
            out.push_str("(=> ");
            write_formula(out, a);
            out.push(' ');
            write_formula(out, b);
            out.push(')');
        }
    }
}

/// A satisfiability problem: declared variables plus a list of assertions.
#[derive(Clone, Debug, Default)]
pub struct Problem {
    vars: BTreeMap<String, Sort>,
    order: Vec<String>,
    pub assertions: Vec<Formula>,
}

impl Problem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declare a variable; redeclaring with the same sort is a no-op.
    pub fn declare(&mut self, name: &str, sort: Sort) -> String {
        match self.vars.get(name) {
            Some(s) => assert_eq!(*s, sort, "variable {name} redeclared with another sort"),
            None => {
                self.vars.insert(name.to_string(), sort);
                self.order.push(name.to_string());
            }
        }
        name.to_string()
    }

    /// Declare an integer variable with inclusive bounds.
    pub fn int_in(&mut self, name: &str, lo: Option<i64>, hi: Option<i64>) -> Term {
        let fresh = !self.vars.contains_key(name);
        self.declare(name, Sort::Int);
        if fresh {
            if let Some(lo) = lo {
                self.assert(Formula::cmp(Cmp::Ge, Term::var(name), Term::Const(lo)));
            }
            if let Some(hi) = hi {
                self.assert(Formula::cmp(Cmp::Le, Term::var(name), Term::Const(hi)));
            }
        }
        Term::var(name)
    }

    pub fn bool(&mut self, name: &str) -> Formula {
        self.declare(name, Sort::Bool);
        Formula::bool_var(name)
    }

    pub fn assert(&mut self, f: Formula) {
        if f != Formula::True {
            self.assertions.push(f);
        }
    }

    pub fn sort_of(&self, name: &str) -> Option<Sort> {
        self.vars.get(name).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// Every variable in the assertions is declared with the sort it is used at.
    pub fn check_declarations(&self) -> Result<(), String> {
        for f in &self.assertions {
            for (v, s) in f.variables() {
                match self.vars.get(v) {
                    Some(d) if *d == s => {}
                    Some(d) => return Err(format!("{v} used as {s:?} but declared {d:?}")),
                    None => return Err(format!("{v} is not declared")),
                }
            }
        }
        Ok(())
    }

    pub fn is_trivially_false(&self) -> bool {
        self.assertions.contains(&Formula::False)
    }
}

/// Emit a problem in SMT-LIB 2 text for the QF_LIA logic.
pub fn emit_smtlib(p: &Problem) -> String {
    let mut out = String::from("(set-option :produce-models true)\n(set-logic QF_LIA)\n");
    for v in &p.order {
        let sort = match p.vars[v] {
            Sort::Int => "Int",
            Sort::Bool => "Bool",
        };
        let _ = writeln!(out, "(declare-fun {v} () {sort})");
    }
    for f in &p.assertions {
        out.push_str("(assert ");
        write_formula(&mut out, f);
        out.push_str(")\n");
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

/// Variable assignment returned by the solver.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub ints: BTreeMap<String, i64>,
    pub bools: BTreeMap<String, bool>,
}

/// Parse a `(get-model)` response made of `define-fun` entries.
pub fn parse_model(text: &str) -> Model {
    let mut m = Model::default();
    let toks = tokenize(text);
    let mut i = 0;
    while i < toks.len() {
        if toks[i] == "define-fun" && i + 4 < toks.len() {
            let name = toks[i + 1].clone();
            // define-fun NAME ( ) SORT VALUE
            let sort = &toks[i + 4];
            let mut j = i + 5;
            if sort == "Bool" {
                if let Some(v) = toks.get(j) {
                    m.bools.insert(name, v == "true");
                }
            } else if sort == "Int" {
                let mut neg = false;
                let mut val = None;
                while j < toks.len() && val.is_none() {
                    match toks[j].as_str() {
                        "(" => {}
                        "-" => neg = true,
                        t => val = t.parse::<i64>().ok(),
                    }
                    j += 1;
                }
                if let Some(v) = val {
                    m.ints.insert(name, if neg { -v } else { v });
                }
            }
            i = j;
        } else {
            i += 1;
        }
    }
    m
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if c == '(' || c == ')' {
                out.push(c.to_string());
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding() {
        assert_eq!(Formula::and(vec![Formula::True, Formula::True]), Formula::True);
        assert_eq!(Formula::or(vec![]), Formula::False);
        assert_eq!(Formula::and(vec![Formula::False, Formula::bool_var("a")]), Formula::False);
        assert_eq!(Formula::not(Formula::not(Formula::bool_var("a"))), Formula::bool_var("a"));
    }

    #[test]
    fn emission_is_deterministic_and_declared() {
        let mut p = Problem::new();
        let x = p.int_in("x", Some(0), Some(3));
        let b = p.bool("b");
        p.assert(Formula::implies(b, Formula::eq(x.clone().plus(-2), Term::Const(-1))));
        p.check_declarations().unwrap();
        let s = emit_smtlib(&p);
        assert_eq!(s, emit_smtlib(&p));
        assert!(s.contains("(declare-fun x () Int)"));
        assert!(s.contains("(=> b (= (+ x (- 2)) (- 1)))"));
    }

    #[test]
    fn undeclared_variables_are_reported() {
        let mut p = Problem::new();
        p.assert(Formula::eq_const("y", 1));
        assert!(p.check_declarations().is_err());
    }

    #[test]
    fn model_parsing_and_evaluation() {
        let m = parse_model("(\n (define-fun x () Int\n (- 4))\n (define-fun b () Bool true)\n (define-fun y () Int 7))");
        assert_eq!(m.ints["x"], -4);
        assert_eq!(m.ints["y"], 7);
        assert!(m.bools["b"]);
        let f = Formula::and(vec![
            Formula::bool_var("b"),
            Formula::eq(Term::var("x").add(Term::var("y")), Term::Const(3)),
        ]);
        assert_eq!(f.eval(&m), Some(true));
    }
}
