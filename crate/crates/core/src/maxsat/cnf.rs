//! Boolean formulas, bounded integers and their conversion to weighted CNF.

use super::wcnf::WcnfInstance;
use std::collections::{BTreeMap, HashMap};

/// DIMACS literal: a positive or negated variable number.
pub type Lit = i32;

/// Propositional formula over DIMACS variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Const(bool),
    Lit(Lit),
    Not(Box<BoolExpr>),
    And(Vec<BoolExpr>),
    Or(Vec<BoolExpr>),
}

impl BoolExpr {
    pub fn t() -> Self {
        BoolExpr::Const(true)
    }

    pub fn f() -> Self {
        BoolExpr::Const(false)
    }

    pub fn var(v: Lit) -> Self {
        BoolExpr::Lit(v)
    }

    pub fn not(e: BoolExpr) -> Self {
        match e {
            BoolExpr::Const(b) => BoolExpr::Const(!b),
            BoolExpr::Lit(l) => BoolExpr::Lit(-l),
            BoolExpr::Not(inner) => *inner,
            e => BoolExpr::Not(Box::new(e)),
        }
    }

    pub fn and(items: impl IntoIterator<Item = BoolExpr>) -> Self {
        let mut v = Vec::new();
        for e in items {
            match e {
                BoolExpr::Const(true) => {}
                BoolExpr::Const(false) => return BoolExpr::f(),
                BoolExpr::And(inner) => v.extend(inner),
                e => v.push(e),
            }
        }
        match v.len() {
            0 => BoolExpr::t(),
            1 => v.pop().expect("one element"),
            _ => BoolExpr::And(v),
        }
    }

    pub fn or(items: impl IntoIterator<Item = BoolExpr>) -> Self {
        let mut v = Vec::new();
        for e in items {
            match e {
                BoolExpr::Const(false) => {}
                BoolExpr::Const(true) => return BoolExpr::t(),
                BoolExpr::Or(inner) => v.extend(inner),
                e => v.push(e),
            }
        }
        match v.len() {
            0 => BoolExpr::f(),
            1 => v.pop().expect("one element"),
            _ => BoolExpr::Or(v),
        }
    }

    pub fn implies(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::or([BoolExpr::not(a), b])
    }

    /// Truth value under an assignment of variables (missing means false).
    pub fn eval(&self, val: &dyn Fn(u32) -> bool) -> bool {
        match self {
            BoolExpr::Const(b) => *b,
            BoolExpr::Lit(l) => val(l.unsigned_abs()) == (*l > 0),
            BoolExpr::Not(e) => !e.eval(val),
            BoolExpr::And(v) => v.iter().all(|e| e.eval(val)),
            BoolExpr::Or(v) => v.iter().any(|e| e.eval(val)),
        }
    }
}

/// Integer in `[0, max]` stored in binary, least significant bit first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedInt {
    pub bits: Vec<Lit>,
    pub max: u64,
}

impl BoundedInt {
    /// Number of bits needed for values `0..=max`.
    pub fn width(max: u64) -> usize {
        (64 - max.leading_zeros()) as usize
    }

    /// `self >= c`.
    pub fn ge(&self, c: u64) -> BoolExpr {
        if c == 0 {
            return BoolExpr::t();
        }
        if c > self.max || Self::width(c) > self.bits.len() {
            return BoolExpr::f();
        }
        self.ge_from(self.bits.len(), c)
    }

    fn ge_from(&self, n: usize, c: u64) -> BoolExpr {
        if n == 0 {
            return BoolExpr::Const(c == 0);
        }
        let k = n - 1;
        let bit = BoolExpr::var(self.bits[k]);
        let low = c & ((1u64 << k) - 1);
        if c >> k & 1 == 1 {
            BoolExpr::and([bit, self.ge_from(k, low)])
        } else {
            BoolExpr::or([bit, self.ge_from(k, low)])
        }
    }

    /// `self <= c`.
    pub fn le(&self, c: u64) -> BoolExpr {
        if c >= self.max {
            return BoolExpr::t();
        }
        BoolExpr::not(self.ge(c + 1))
    }

    /// `self < c`.
    pub fn lt(&self, c: u64) -> BoolExpr {
        if c == 0 {
            return BoolExpr::f();
        }
        self.le(c - 1)
    }

    /// `self == c`.
    pub fn eq(&self, c: u64) -> BoolExpr {
        if c > self.max {
            return BoolExpr::f();
        }
        BoolExpr::and(self.bits.iter().enumerate().map(|(k, &b)| {
            if c >> k & 1 == 1 {
                BoolExpr::var(b)
            } else {
                BoolExpr::var(-b)
            }
        }))
    }

    /// Decode the value from a model.
    pub fn value(&self, val: &dyn Fn(u32) -> bool) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| val(b as u32))
            .map(|(k, _)| 1u64 << k)
            .sum()
    }
}

/// Allocates variables and collects hard and soft formulas.
#[derive(Clone, Debug, Default)]
pub struct FormulaSet {
    pub num_vars: u32,
    pub names: BTreeMap<u32, String>,
    pub hard: Vec<BoolExpr>,
    pub soft: Vec<(BoolExpr, u64)>,
}

impl FormulaSet {
    pub fn fresh(&mut self, name: impl Into<String>) -> Lit {
        self.num_vars += 1;
        self.names.insert(self.num_vars, name.into());
        self.num_vars as Lit
    }

    pub fn bounded_int(&mut self, name: &str, max: u64) -> BoundedInt {
        let bits = (0..BoundedInt::width(max)).map(|k| self.fresh(format!("{name}[{k}]"))).collect();
        let v = BoundedInt { bits, max };
        if BoundedInt::width(max + 1) == v.bits.len() {
            self.hard.push(BoolExpr::not(v.ge_from(v.bits.len(), max + 1)));
        }
        v
    }

    /// Total weight of the soft formulas violated by an assignment.
    pub fn cost(&self, val: &dyn Fn(u32) -> bool) -> u64 {
        self.soft.iter().filter(|(f, _)| !f.eval(val)).map(|(_, w)| w).sum()
    }

    /// Do all hard formulas hold under an assignment?
    pub fn hard_holds(&self, val: &dyn Fn(u32) -> bool) -> bool {
        self.hard.iter().all(|f| f.eval(val))
    }

    /// Structural CNF conversion with definition variables. Each soft
    /// formula becomes exactly one soft clause with the same weight.
    pub fn to_wcnf(&self) -> WcnfInstance {
        let mut t = Tseitin {
            next: self.num_vars,
            clauses: Vec::new(),
            memo: HashMap::new(),
        };
        for h in &self.hard {
            t.assert(h);
        }
        let mut soft = Vec::with_capacity(self.soft.len());
        for (f, w) in &self.soft {
            let clause = match as_clause(f) {
                Some(c) => c,
                None => vec![t.define(f)],
            };
            soft.push((*w, clause));
        }
        WcnfInstance {
            num_vars: t.next,
            hard: t.clauses,
            soft,
            names: self.names.clone(),
        }
    }
}

fn as_literal(e: &BoolExpr) -> Option<Lit> {
    match e {
        BoolExpr::Lit(l) => Some(*l),
        BoolExpr::Not(inner) => as_literal(inner).map(|l| -l),
        _ => None,
    }
}

fn as_clause(e: &BoolExpr) -> Option<Vec<Lit>> {
    match e {
        BoolExpr::Or(v) => v.iter().map(as_literal).collect(),
        e => as_literal(e).map(|l| vec![l]),
    }
}

struct Tseitin {
    next: u32,
    clauses: Vec<Vec<Lit>>,
    memo: HashMap<BoolExpr, Lit>,
}

impl Tseitin {
    fn fresh(&mut self) -> Lit {
        self.next += 1;
        self.next as Lit
    }

    fn assert(&mut self, e: &BoolExpr) {
        match e {
            BoolExpr::Const(true) => {}
            BoolExpr::And(v) => v.iter().for_each(|x| self.assert(x)),
            BoolExpr::Or(v) => {
                let c = v.iter().map(|x| self.define(x)).collect();
                self.clauses.push(c);
            }
            e => {
                let l = self.define(e);
                self.clauses.push(vec![l]);
            }
        }
    }

    /// A literal equivalent to `e`.
    fn define(&mut self, e: &BoolExpr) -> Lit {
        if let Some(l) = as_literal(e) {
            return l;
        }
        if let Some(&l) = self.memo.get(e) {
            return l;
        }
        let l = match e {
            BoolExpr::Const(b) => {
                let t = self.fresh();
                self.clauses.push(vec![if *b { t } else { -t }]);
                t
            }
            BoolExpr::Not(inner) => -self.define(inner),
            BoolExpr::And(v) => {
                let kids: Vec<Lit> = v.iter().map(|x| self.define(x)).collect();
                let t = self.fresh();
                for &k in &kids {
                    self.clauses.push(vec![-t, k]);
                }
                let mut c: Vec<Lit> = kids.iter().map(|k| -k).collect();
                c.push(t);
                self.clauses.push(c);
                t
            }
            BoolExpr::Or(v) => {
                let kids: Vec<Lit> = v.iter().map(|x| self.define(x)).collect();
                let t = self.fresh();
                for &k in &kids {
                    self.clauses.push(vec![t, -k]);
                }
                let mut c = kids;
                c.push(-t);
                self.clauses.push(c);
                t
            }
            BoolExpr::Lit(_) => unreachable!("literals are handled above"),
        };
        self.memo.insert(e.clone(), l);
        l
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assignments(n: u32) -> impl Iterator<Item = u64> {
        0..(1u64 << n)
    }

    #[test]
    fn bounded_int_comparisons() {
        let mut fs = FormulaSet::default();
        let x = fs.bounded_int("x", 5);
        assert_eq!(x.bits.len(), 3);
        for a in assignments(3) {
            let val = |v: u32| a >> (v - 1) & 1 == 1;
            let n = x.value(&val);
            assert_eq!(fs.hard_holds(&val), n <= 5);
            if n > 5 {
                continue;
            }
            for c in 0..9 {
                assert_eq!(x.ge(c).eval(&val), n >= c, "{n} >= {c}");
                assert_eq!(x.le(c).eval(&val) || n > 5, n <= c || n > 5, "{n} <= {c}");
                assert_eq!(x.eq(c).eval(&val), n == c);
                assert_eq!(x.lt(c).eval(&val) || n > 5, n < c || n > 5);
            }
        }
    }

    #[test]
    fn tseitin_preserves_models_and_costs() {
        let mut fs = FormulaSet::default();
        let a = fs.fresh("a");
        let b = fs.fresh("b");
        let c = fs.fresh("c");
        let v = BoolExpr::var;
        fs.hard.push(BoolExpr::or([
            BoolExpr::and([v(a), v(-b)]),
            BoolExpr::not(BoolExpr::or([v(b), v(c)])),
        ]));
        fs.soft.push((BoolExpr::and([v(a), v(c)]), 3));
        fs.soft.push((v(-a), 2));
        let w = fs.to_wcnf();
        assert_eq!(w.soft.len(), 2);
        // Every original assignment extends uniquely to the definitions.
        for m in assignments(3) {
            let base = |x: u32| m >> (x - 1) & 1 == 1;
            let want_hard = fs.hard_holds(&base);
            let mut best: Option<u64> = None;
            for ext in assignments(w.num_vars - 3) {
                let full = |x: u32| if x <= 3 { base(x) } else { ext >> (x - 4) & 1 == 1 };
                if w.hard_satisfied(&full) {
                    let cost = w.cost(&full);
                    best = Some(best.map_or(cost, |b: u64| b.min(cost)));
                }
            }
            assert_eq!(best.is_some(), want_hard);
            if let Some(b) = best {
                assert_eq!(b, fs.cost(&base));
            }
        }
    }

    #[test]
    fn constants_fold() {
        assert_eq!(BoolExpr::and([BoolExpr::t(), BoolExpr::var(1)]), BoolExpr::var(1));
        assert_eq!(BoolExpr::or([BoolExpr::t(), BoolExpr::var(1)]), BoolExpr::t());
        assert_eq!(BoolExpr::not(BoolExpr::not(BoolExpr::And(vec![]))), BoolExpr::And(vec![]));
    }
}
