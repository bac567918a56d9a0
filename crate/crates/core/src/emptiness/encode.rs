//! Full encoding of automaton non-emptiness as one QF_LIA problem.
//!
//! Position `i` of a run of length `n = |Δ|` carries the automaton state
//! `q_i`, the node type `t_i`, pseudo-class flags, sibling counters and
//! attribute value characters. Transitions constrain consecutive positions.

use super::attrs::{attr_groups, is_id_key, AttrKey, KeyConstraints};
use super::ila::{Cmp, Formula, Problem, Term};
use super::positional::{matches_anb, nomatch};
use super::types::{node_type_allowed, TypeSummary};
use super::words::{attr_solutions, AttrTest, ConstraintWordAutomaton};
use crate::automata::{CssAutomaton, Dir};
use crate::selector::*;
use std::collections::{BTreeMap, BTreeSet};

/// Attribute word length per attribute key, including the terminating null.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AttrBounds {
    pub per_key: BTreeMap<AttrKey, usize>,
}

fn transition_groups(a: &CssAutomaton) -> Vec<Option<Vec<KeyConstraints>>> {
    a.transitions
        .iter()
        .enumerate()
        .map(|(ti, t)| attr_groups(&t.sel, &ti.to_string()))
        .collect()
}

/// Word bounds that keep every satisfiable constraint set satisfiable: the
/// shortest witness for ordinary attributes, and for identifiers a length
/// that admits as many distinct witnesses as there are sets on that key.
pub fn attr_bounds(a: &CssAutomaton) -> AttrBounds {
    let mut sets: BTreeMap<AttrKey, Vec<Vec<AttrTest>>> = BTreeMap::new();
    for g in transition_groups(a).into_iter().flatten() {
        for kc in g {
            sets.entry(kc.key).or_default().push(kc.tests);
        }
    }
    let mut per_key = BTreeMap::new();
    for (key, ss) in sets {
        let k = if is_id_key(&key) { ss.len() } else { 1 };
        let mut b = 0;
        for s in &ss {
            if k == 1 {
                if let Some(l) = ConstraintWordAutomaton::new(s).shortest_len() {
                    b = b.max(l);
                }
            } else if let Some(w) = attr_solutions(s, k).last() {
                b = b.max(w.chars().count());
            }
        }
        per_key.insert(key, b + 1);
    }
    AttrBounds { per_key }
}

struct Enc<'a> {
    a: &'a CssAutomaton,
    ts: &'a TypeSummary,
    p: Problem,
    n: usize,
    keys: BTreeMap<AttrKey, (usize, usize)>,
    pcs: BTreeSet<PseudoClass>,
}

fn code(c: char) -> i64 {
    c as i64
}

impl Enc<'_> {
    fn q(&self, i: usize) -> Term {
        Term::var(format!("q_{i}"))
    }

    fn t(&self, i: usize) -> Term {
        Term::var(format!("t_{i}"))
    }

    fn x(&self, i: usize) -> Term {
        Term::var(format!("x_{i}"))
    }

    fn y(&self, i: usize) -> Term {
        Term::var(format!("y_{i}"))
    }

    fn xc(&self, i: usize, ty: usize) -> Term {
        Term::var(format!("xc_{i}_{ty}"))
    }

    fn yc(&self, i: usize, ty: usize) -> Term {
        Term::var(format!("yc_{i}_{ty}"))
    }

    fn pc(&self, i: usize, pc: PseudoClass) -> Formula {
        Formula::bool_var(format!("p_{i}_{}", pc.name()))
    }

    fn w(&self, i: usize, key: usize, j: usize) -> Term {
        Term::var(format!("w_{i}_{key}_{j}"))
    }

    fn h(&self, i: usize, key: usize) -> Formula {
        Formula::bool_var(format!("h_{i}_{key}"))
    }

    fn is_type(&self, i: usize, ty: usize) -> Formula {
        Formula::eq(self.t(i), Term::Const(ty as i64))
    }

    fn declare(&mut self) {
        let (n, nstates, ntypes) = (self.n, self.a.num_states as i64, self.ts.types.len() as i64);
        for i in 0..=n {
            self.p.int_in(&format!("q_{i}"), Some(0), Some(nstates - 1));
            self.p.int_in(&format!("t_{i}"), Some(0), Some(ntypes - 1));
            for pc in self.pcs.clone() {
                self.p.bool(&format!("p_{i}_{}", pc.name()));
            }
            if i >= 1 {
                let x = self.p.int_in(&format!("x_{i}"), Some(1), None);
                let y = self.p.int_in(&format!("y_{i}"), Some(1), None);
                if self.ts.counts_types {
                    let mut xs = Vec::new();
                    let mut ys = Vec::new();
                    for ty in 0..self.ts.types.len() {
                        xs.push(self.p.int_in(&format!("xc_{i}_{ty}"), Some(0), None));
                        ys.push(self.p.int_in(&format!("yc_{i}_{ty}"), Some(0), None));
                    }
                    self.p.assert(Formula::eq(x, Term::sum(xs).plus(1)));
                    self.p.assert(Formula::eq(y, Term::sum(ys).plus(1)));
                    let ot = self.p.int_in(&format!("ot_{i}"), Some(1), None);
                    let lt = self.p.int_in(&format!("lt_{i}"), Some(1), None);
                    for ty in 0..self.ts.types.len() {
                        let f = Formula::and(vec![
                            Formula::eq(ot.clone(), self.xc(i, ty).plus(1)),
                            Formula::eq(lt.clone(), self.yc(i, ty).plus(1)),
                        ]);
                        let g = Formula::implies(self.is_type(i, ty), f);
                        self.p.assert(g);
                    }
                }
            }
            for &(kid, b) in self.keys.clone().values() {
                for j in 1..=b {
                    self.p.int_in(&format!("w_{i}_{kid}_{j}"), Some(0), Some(0x10FFFF));
                }
                for j in 1..b {
                    let f = Formula::implies(
                        Formula::eq(self.w(i, kid, j), Term::Const(0)),
                        Formula::eq(self.w(i, kid, j + 1), Term::Const(0)),
                    );
                    self.p.assert(f);
                }
                let last = Formula::eq(self.w(i, kid, b), Term::Const(0));
                self.p.assert(last);
            }
            for (key, &(kid, _)) in &self.keys.clone() {
                if is_id_key(key) {
                    self.p.bool(&format!("h_{i}_{kid}"));
                }
            }
        }
    }

    fn consistency(&mut self) {
        let n = self.n;
        for i in 0..=n {
            for (x, y) in [
                (PseudoClass::Link, PseudoClass::Visited),
                (PseudoClass::Enabled, PseudoClass::Disabled),
            ] {
                if self.pcs.contains(&x) && self.pcs.contains(&y) {
                    let f = Formula::not(Formula::and(vec![self.pc(i, x), self.pc(i, y)]));
                    self.p.assert(f);
                }
            }
            if self.pcs.contains(&PseudoClass::Target) {
                for j in i + 1..=n {
                    let f = Formula::not(Formula::and(vec![
                        self.pc(i, PseudoClass::Target),
                        self.pc(j, PseudoClass::Target),
                    ]));
                    self.p.assert(f);
                }
            }
        }
        for (key, &(kid, b)) in &self.keys.clone() {
            if !is_id_key(key) {
                continue;
            }
            for i in 0..=n {
                for j in i + 1..=n {
                    let differ = Formula::or(
                        (1..=b)
                            .map(|l| Formula::cmp(Cmp::Ne, self.w(i, kid, l), self.w(j, kid, l)))
                            .collect(),
                    );
                    let f = Formula::implies(Formula::and(vec![self.h(i, kid), self.h(j, kid)]), differ);
                    self.p.assert(f);
                }
            }
        }
    }

    fn chars_at(&self, i: usize, kid: usize, off: usize, v: &[char]) -> Formula {
        Formula::and(
            v.iter()
                .enumerate()
                .map(|(l, &c)| Formula::eq(self.w(i, kid, off + l + 1), Term::Const(code(c))))
                .collect(),
        )
    }

    fn char_is(&self, i: usize, kid: usize, j: usize, c: i64) -> Formula {
        Formula::eq(self.w(i, kid, j), Term::Const(c))
    }

    fn attr_test(&self, i: usize, kid: usize, b: usize, op: AttrOp, v: &str) -> Formula {
        let v: Vec<char> = v.chars().collect();
        let m = v.len();
        if m + 1 > b {
            return Formula::False;
        }
        // Offsets at which an occurrence of `v` still leaves a null slot after it.
        let offsets = 0..=(b - 1 - m);
        let null = |j: usize| self.char_is(i, kid, j, 0);
        match op {
            AttrOp::Equals => Formula::and(vec![self.chars_at(i, kid, 0, &v), null(m + 1)]),
            AttrOp::Prefix => self.chars_at(i, kid, 0, &v),
            AttrOp::Suffix => Formula::or(
                offsets
                    .map(|o| Formula::and(vec![self.chars_at(i, kid, o, &v), null(o + m + 1)]))
                    .collect(),
            ),
            AttrOp::Substring => Formula::or(offsets.map(|o| self.chars_at(i, kid, o, &v)).collect()),
            AttrOp::Includes => Formula::or(
                offsets
                    .map(|o| {
                        let before = if o == 0 {
                            Formula::True
                        } else {
                            self.char_is(i, kid, o, code(' '))
                        };
                        let after = Formula::or(vec![null(o + m + 1), self.char_is(i, kid, o + m + 1, code(' '))]);
                        Formula::and(vec![before, self.chars_at(i, kid, o, &v), after])
                    })
                    .collect(),
            ),
            AttrOp::DashMatch => Formula::and(vec![
                self.chars_at(i, kid, 0, &v),
                Formula::or(vec![null(m + 1), self.char_is(i, kid, m + 1, code('-'))]),
            ]),
        }
    }

    fn attrs(&self, i: usize, groups: &Option<Vec<KeyConstraints>>) -> Formula {
        let Some(groups) = groups else {
            return Formula::False;
        };
        let mut out = Vec::new();
        for g in groups {
            let (kid, b) = self.keys[&g.key];
            if is_id_key(&g.key) {
                out.push(self.h(i, kid));
            }
            for t in &g.tests {
                match &t.test {
                    None if t.positive => {}
                    None => return Formula::False,
                    Some((op, v)) => {
                        let f = self.attr_test(i, kid, b, *op, v);
                        out.push(if t.positive { f } else { Formula::not(f) });
                    }
                }
            }
        }
        Formula::and(out)
    }

    fn positional(&mut self, i: usize, tag: &str, positive: bool, p: &Positional) -> Formula {
        if i == 0 {
            return if positive { Formula::False } else { Formula::True };
        }
        let one = |t: Term| Formula::eq(t, Term::Const(1));
        match p {
            Positional::OnlyChild => {
                let f = Formula::and(vec![one(self.x(i)), one(self.y(i))]);
                if positive {
                    f
                } else {
                    Formula::not(f)
                }
            }
            Positional::OnlyOfType => {
                let f = Formula::and(vec![
                    one(Term::var(format!("ot_{i}"))),
                    one(Term::var(format!("lt_{i}"))),
                ]);
                if positive {
                    f
                } else {
                    Formula::not(f)
                }
            }
            Positional::Nth { kind, a, b, .. } => {
                let x = match kind {
                    NthKind::Child => self.x(i),
                    NthKind::LastChild => self.y(i),
                    NthKind::OfType => Term::var(format!("ot_{i}")),
                    NthKind::LastOfType => Term::var(format!("lt_{i}")),
                };
                if positive {
                    matches_anb(&mut self.p, tag, x, *a, *b)
                } else {
                    nomatch(&mut self.p, tag, x, *a, *b)
                }
            }
        }
    }

    fn node(&mut self, i: usize, ti: usize, groups: &Option<Vec<KeyConstraints>>) -> Formula {
        let sel = self.a.transitions[ti].sel.clone();
        let mut out = Vec::new();
        let allowed: Vec<usize> = (0..self.ts.types.len())
            .filter(|&ty| node_type_allowed(&sel, &self.ts.types[ty]))
            .collect();
        if allowed.len() < self.ts.types.len() {
            out.push(Formula::or(allowed.iter().map(|&ty| self.is_type(i, ty)).collect()));
        }
        for (ci, c) in sel.conds.iter().enumerate() {
            let tag = format!("c_{i}_{ti}_{ci}");
            let f = match c {
                Condition::Is(Simple::Attr(_)) | Condition::Not(Negated::Simple(Simple::Attr(_))) => continue,
                Condition::Not(Negated::Type(_)) => continue,
                Condition::Is(Simple::Pseudo(PseudoClass::Root)) => {
                    if i == 0 {
                        Formula::True
                    } else {
                        Formula::False
                    }
                }
                Condition::Not(Negated::Simple(Simple::Pseudo(PseudoClass::Root))) => {
                    if i == 0 {
                        Formula::False
                    } else {
                        Formula::True
                    }
                }
                Condition::Is(Simple::Pseudo(pc)) => self.pc(i, *pc),
                Condition::Not(Negated::Simple(Simple::Pseudo(pc))) => Formula::not(self.pc(i, *pc)),
                Condition::Is(Simple::Positional(p)) => self.positional(i, &tag, true, p),
                Condition::Not(Negated::Simple(Simple::Positional(p))) => self.positional(i, &tag, false, p),
            };
            out.push(f);
        }
        out.push(self.attrs(i, groups));
        Formula::and(out)
    }

    fn count_update(&self, i: usize, extra: &dyn Fn(usize) -> Term) -> Formula {
        let mut out = Vec::new();
        for ty in 0..self.ts.types.len() {
            let here = self.is_type(i, ty);
            let next = self.is_type(i + 1, ty);
            out.push(Formula::implies(
                here.clone(),
                Formula::eq(self.xc(i + 1, ty), self.xc(i, ty).add(extra(ty)).plus(1)),
            ));
            out.push(Formula::implies(
                Formula::not(here),
                Formula::eq(self.xc(i + 1, ty), self.xc(i, ty).add(extra(ty))),
            ));
            out.push(Formula::implies(
                next.clone(),
                Formula::eq(self.yc(i + 1, ty), self.yc(i, ty).sub(extra(ty)).plus(-1)),
            ));
            out.push(Formula::implies(
                Formula::not(next),
                Formula::eq(self.yc(i + 1, ty), self.yc(i, ty).sub(extra(ty))),
            ));
        }
        Formula::and(out)
    }

    fn step(&mut self, i: usize, dir: Dir) -> Formula {
        match dir {
            Dir::Last => Formula::True,
            Dir::Child => {
                let mut out = Vec::new();
                if self.pcs.contains(&PseudoClass::Empty) {
                    out.push(Formula::not(self.pc(i, PseudoClass::Empty)));
                }
                out.push(Formula::eq(self.x(i + 1), Term::Const(1)));
                if self.ts.counts_types {
                    for ty in 0..self.ts.types.len() {
                        out.push(Formula::eq(self.xc(i + 1, ty), Term::Const(0)));
                    }
                }
                Formula::and(out)
            }
            Dir::Neighbour if i == 0 => Formula::False,
            Dir::Sibling if i == 0 => Formula::False,
            Dir::Neighbour => {
                let mut out = vec![
                    Formula::eq(self.x(i + 1), self.x(i).plus(1)),
                    Formula::eq(self.y(i + 1), self.y(i).plus(-1)),
                ];
                if self.ts.counts_types {
                    out.push(self.count_update(i, &|_| Term::Const(0)));
                }
                Formula::and(out)
            }
            Dir::Sibling => {
                if self.ts.counts_types {
                    let shifts: Vec<Term> = (0..self.ts.types.len())
                        .map(|ty| self.p.int_in(&format!("s_{i}_{ty}"), Some(0), None))
                        .collect();
                    let total = Term::sum(shifts).plus(1);
                    let upd = self.count_update(i, &|ty| Term::var(format!("s_{i}_{ty}")));
                    Formula::and(vec![
                        Formula::eq(self.x(i + 1), self.x(i).add(total.clone())),
                        Formula::eq(self.y(i + 1), self.y(i).sub(total)),
                        upd,
                    ])
                } else {
                    let d = self.p.int_in(&format!("d_{i}"), Some(1), None);
                    Formula::and(vec![
                        Formula::eq(self.x(i + 1), self.x(i).add(d.clone())),
                        Formula::eq(self.y(i + 1), self.y(i).sub(d)),
                    ])
                }
            }
        }
    }
}

/// Build the full non-emptiness problem for `a` over the type universe `ts`.
pub fn encode_nonemptiness(a: &CssAutomaton, ts: &TypeSummary, bounds: &AttrBounds) -> Problem {
    let n = a.transitions.len();
    let keys = bounds
        .per_key
        .iter()
        .enumerate()
        .map(|(kid, (k, &b))| (k.clone(), (kid, b)))
        .collect();
    let mut pcs = BTreeSet::new();
    for t in &a.transitions {
        for c in &t.sel.conds {
            match c {
                Condition::Is(Simple::Pseudo(p)) | Condition::Not(Negated::Simple(Simple::Pseudo(p)))
                    if *p != PseudoClass::Root => {
                        pcs.insert(*p);
                    }
                _ => {}
            }
        }
    }
    let mut e = Enc {
        a,
        ts,
        p: Problem::new(),
        n,
        keys,
        pcs,
    };
    e.declare();
    e.consistency();
    let groups = transition_groups(a);
    let init = Formula::eq(e.q(0), Term::Const(a.init as i64));
    let fin = Formula::eq(e.q(n), Term::Const(a.fin as i64));
    e.p.assert(init);
    e.p.assert(fin);
    for i in 0..n {
        let mut options = vec![Formula::eq(e.q(i), Term::Const(a.fin as i64))];
        for (ti, t) in a.transitions.iter().enumerate() {
            let head = vec![
                Formula::eq(e.q(i), Term::Const(t.from as i64)),
                Formula::eq(e.q(i + 1), Term::Const(t.to as i64)),
            ];
            let node = e.node(i, ti, &groups[ti]);
            let step = e.step(i, t.dir);
            let mut all = head;
            all.push(node);
            all.push(step);
            options.push(Formula::and(all));
        }
        let f = Formula::or(options);
        e.p.assert(f);
    }
    debug_assert_eq!(e.p.check_declarations(), Ok(()));
    e.p
}
