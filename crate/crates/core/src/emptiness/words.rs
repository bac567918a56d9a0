//! Satisfiability of attribute-value constraint sets via a deterministic
//! pattern-matching automaton over the marked word `^w$`.

use crate::selector::AttrOp;
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

/// One test on the value of a present attribute. `positive = false` means the
/// test must not hold; a negated presence test (`test = None`) is unsatisfiable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AttrTest {
    pub positive: bool,
    pub test: Option<(AttrOp, String)>,
}

impl AttrTest {
    pub fn pos(op: AttrOp, v: &str) -> Self {
        AttrTest {
            positive: true,
            test: Some((op, v.to_string())),
        }
    }

    pub fn neg(op: AttrOp, v: &str) -> Self {
        AttrTest {
            positive: false,
            test: Some((op, v.to_string())),
        }
    }

    pub fn presence() -> Self {
        AttrTest {
            positive: true,
            test: None,
        }
    }
}

/// Constraints on the value of a single attribute.
pub type ConstraintSet = Vec<AttrTest>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Sym {
    Start,
    End,
    Ch(char),
}

fn patterns(op: AttrOp, v: &str) -> Vec<Vec<Sym>> {
    let body: Vec<Sym> = v.chars().map(Sym::Ch).collect();
    let wrap = |pre: Option<Sym>, post: Option<Sym>| {
        let mut p: Vec<Sym> = pre.into_iter().collect();
        p.extend(body.iter().copied());
        p.extend(post);
        p
    };
    let (s, e, sp, dash) = (Sym::Start, Sym::End, Sym::Ch(' '), Sym::Ch('-'));
    match op {
        AttrOp::Equals => vec![wrap(Some(s), Some(e))],
        AttrOp::Prefix => vec![wrap(Some(s), None)],
        AttrOp::Suffix => vec![wrap(None, Some(e))],
        AttrOp::Substring => vec![wrap(None, None)],
        AttrOp::Includes => vec![
            wrap(Some(s), Some(e)),
            wrap(Some(s), Some(sp)),
            wrap(Some(sp), Some(e)),
            wrap(Some(sp), Some(sp)),
        ],
        AttrOp::DashMatch => vec![wrap(Some(s), Some(e)), wrap(Some(s), Some(dash))],
    }
}

const FILLERS: &str = "abcdefghijklmnopqrstuvwxyz0123456789_";

/// Deterministic automaton whose states are the prefixes of the constraint
/// patterns; reading a symbol moves to the longest suffix of the extended
/// word that is again a state, reporting every pattern completed on the way.
#[derive(Clone, Debug)]
pub struct ConstraintWordAutomaton {
    /// Constraint characters plus space, dash and one filler character.
    pub alphabet: Vec<char>,
    states: Vec<Vec<Sym>>,
    /// `next[state][symbol]`, symbols being `^`, `$` and then `alphabet`.
    next: Vec<Vec<usize>>,
    /// Bitmask of constraints completed by `next[state][symbol]`.
    hits: Vec<Vec<u64>>,
    positive_mask: u64,
    negative_mask: u64,
    /// False when the set is unsatisfiable on syntactic grounds.
    possible: bool,
}

impl ConstraintWordAutomaton {
    pub fn new(set: &[AttrTest]) -> Self {
        assert!(set.len() <= 64, "at most 64 constraints per attribute");
        let mut pats: Vec<(usize, Vec<Sym>)> = Vec::new();
        let mut positive_mask = 0u64;
        let mut negative_mask = 0u64;
        let mut possible = true;
        let mut chars: BTreeSet<char> = [' ', '-'].into_iter().collect();
        for (i, t) in set.iter().enumerate() {
            match &t.test {
                None if t.positive => {}
                None => possible = false,
                Some((op, v)) => {
                    chars.extend(v.chars());
                    for p in patterns(*op, v) {
                        pats.push((i, p));
                    }
                    if t.positive {
                        positive_mask |= 1 << i;
                    } else {
                        negative_mask |= 1 << i;
                    }
                }
            }
        }
        if let Some(f) = FILLERS.chars().find(|c| !chars.contains(c)) {
            chars.insert(f);
        }
        let alphabet: Vec<char> = chars.into_iter().collect();
        let mut prefixes: BTreeSet<Vec<Sym>> = BTreeSet::new();
        for (_, p) in &pats {
            for l in 0..=p.len() {
                prefixes.insert(p[..l].to_vec());
            }
        }
        prefixes.insert(Vec::new());
        let mut states: Vec<Vec<Sym>> = prefixes.into_iter().collect();
        states.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let index: BTreeMap<&Vec<Sym>, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let symbols: Vec<Sym> = [Sym::Start, Sym::End]
            .into_iter()
            .chain(alphabet.iter().map(|&c| Sym::Ch(c)))
            .collect();
        let mut next = Vec::new();
        let mut hits = Vec::new();
        for s in &states {
            let mut row = Vec::new();
            let mut hrow = Vec::new();
            for &c in &symbols {
                let mut w = s.clone();
                w.push(c);
                let mut h = 0u64;
                for (i, p) in &pats {
                    if w.ends_with(p) {
                        h |= 1 << i;
                    }
                }
                let target = (0..=w.len())
                    .find_map(|k| index.get(&w[k..].to_vec()).copied())
                    .expect("the empty word is a state");
                row.push(target);
                hrow.push(h);
            }
            next.push(row);
            hits.push(hrow);
        }
        ConstraintWordAutomaton {
            alphabet,
            states,
            next,
            hits,
            positive_mask,
            negative_mask,
            possible,
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    fn sym_index(&self, c: char) -> usize {
        match self.alphabet.binary_search(&c) {
            Ok(i) => i + 2,
            // Characters outside the alphabet behave like the filler, which
            // occurs in no pattern.
            Err(_) => {
                let f = self
                    .alphabet
                    .iter()
                    .position(|a| FILLERS.contains(*a) && !self.states.iter().flatten().any(|s| *s == Sym::Ch(*a)))
                    .unwrap_or(0);
                f + 2
            }
        }
    }

    fn step(&self, (q, sat): (usize, u64), sym: usize) -> Option<(usize, u64)> {
        let h = self.hits[q][sym];
        if h & self.negative_mask != 0 {
            return None;
        }
        Some((self.next[q][sym], sat | (h & self.positive_mask)))
    }

    fn start(&self) -> Option<(usize, u64)> {
        self.step((0, 0), 0)
    }

    fn finish(&self, cfg: (usize, u64)) -> bool {
        self.step(cfg, 1)
            .is_some_and(|(_, sat)| sat & self.positive_mask == self.positive_mask)
    }

    /// Run the automaton on a concrete value.
    pub fn accepts(&self, word: &str) -> bool {
        if !self.possible {
            return false;
        }
        let mut cfg = match self.start() {
            Some(c) => c,
            None => return false,
        };
        for c in word.chars() {
            cfg = match self.step(cfg, self.sym_index(c)) {
                Some(c) => c,
                None => return false,
            };
        }
        self.finish(cfg)
    }

    /// Length of a shortest accepted word, by breadth-first search over
    /// configurations (state, satisfied constraints).
    pub fn shortest_len(&self) -> Option<usize> {
        if !self.possible {
            return None;
        }
        let start = self.start()?;
        let mut seen = HashSet::new();
        seen.insert(start);
        let mut queue = VecDeque::from([(start, 0usize)]);
        while let Some((cfg, d)) = queue.pop_front() {
            if self.finish(cfg) {
                return Some(d);
            }
            for s in 2..self.alphabet.len() + 2 {
                if let Some(n) = self.step(cfg, s) {
                    if seen.insert(n) {
                        queue.push_back((n, d + 1));
                    }
                }
            }
        }
        None
    }

    fn num_configs(&self) -> usize {
        self.states.len() << (self.positive_mask.count_ones() as usize)
    }

    /// Accepted words in order of length, then alphabet order; at most
    /// `count` words, skipping those in `exclude`.
    pub fn words(&self, count: usize, exclude: &[String]) -> Vec<String> {
        let mut out = Vec::new();
        let Some(shortest) = self.shortest_len() else {
            return out;
        };
        let Some(start) = self.start() else { return out };
        let limit = shortest + (count + exclude.len() + 1) * (self.num_configs() + 1);
        let mut dead: HashSet<((usize, u64), usize)> = HashSet::new();
        for len in shortest..=limit {
            let mut buf = String::new();
            self.enumerate(start, len, &mut buf, &mut dead, count, exclude, &mut out);
            if out.len() >= count {
                break;
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        cfg: (usize, u64),
        remaining: usize,
        buf: &mut String,
        dead: &mut HashSet<((usize, u64), usize)>,
        count: usize,
        exclude: &[String],
        out: &mut Vec<String>,
    ) -> bool {
        if out.len() >= count || dead.contains(&(cfg, remaining)) {
            return false;
        }
        let mut found = false;
        if remaining == 0 {
            if self.finish(cfg) {
                found = true;
                if !exclude.contains(buf) {
                    out.push(buf.clone());
                }
            }
        } else {
            for (i, &c) in self.alphabet.iter().enumerate() {
                if out.len() >= count {
                    return true;
                }
                if let Some(n) = self.step(cfg, i + 2) {
                    buf.push(c);
                    found |= self.enumerate(n, remaining - 1, buf, dead, count, exclude, out);
                    buf.pop();
                }
            }
        }
        if !found {
            dead.insert((cfg, remaining));
        }
        found
    }
}

/// A shortest value satisfying `set` that differs from every word in
/// `distinct_from`, or `None` when there is none.
pub fn solve_attr_set(set: &[AttrTest], distinct_from: &[String]) -> Option<String> {
    ConstraintWordAutomaton::new(set).words(1, distinct_from).into_iter().next()
}

/// Up to `k` satisfying values in order of length.
pub fn attr_solutions(set: &[AttrTest], k: usize) -> Vec<String> {
    ConstraintWordAutomaton::new(set).words(k, &[])
}

/// Maximal attribute word length for a list of constraint sets: the number of
/// sets times the largest automaton times the largest set, plus one slot for
/// the terminating null.
pub fn compute_attr_bound(sets: &[ConstraintSet]) -> usize {
    if sets.is_empty() {
        return 1;
    }
    let m = sets.iter().map(|s| ConstraintWordAutomaton::new(s).num_states()).max().unwrap_or(1);
    let c = sets.iter().map(Vec::len).max().unwrap_or(0).max(1);
    sets.len() * m * c + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::attr_op_match;

    fn direct(set: &[AttrTest], w: &str) -> bool {
        set.iter().all(|t| match &t.test {
            None => t.positive,
            Some((op, v)) => attr_op_match(*op, w, v) == t.positive,
        })
    }

    #[test]
    fn prefix_and_suffix() {
        let set = vec![AttrTest::pos(AttrOp::Prefix, "ab"), AttrTest::pos(AttrOp::Suffix, "ba")];
        let w = solve_attr_set(&set, &[]).unwrap();
        assert_eq!(w, "aba");
        assert!(direct(&set, &w));
    }

    #[test]
    fn contradiction() {
        let set = vec![AttrTest::pos(AttrOp::Equals, "x"), AttrTest::neg(AttrOp::Equals, "x")];
        assert_eq!(solve_attr_set(&set, &[]), None);
        let set = vec![AttrTest::presence(), AttrTest { positive: false, test: None }];
        assert_eq!(solve_attr_set(&set, &[]), None);
    }

    #[test]
    fn includes_minimal_witness() {
        assert_eq!(solve_attr_set(&[AttrTest::pos(AttrOp::Includes, "v")], &[]).unwrap(), "v");
        let set = vec![AttrTest::pos(AttrOp::Includes, "a"), AttrTest::pos(AttrOp::Includes, "b")];
        let w = solve_attr_set(&set, &[]).unwrap();
        assert_eq!(w.len(), 3);
        assert!(direct(&set, &w));
    }

    #[test]
    fn distinct_words() {
        let set = vec![AttrTest::pos(AttrOp::Equals, "x")];
        assert_eq!(solve_attr_set(&set, &["x".into()]), None);
        let set = vec![AttrTest::pos(AttrOp::Prefix, "x")];
        let w = solve_attr_set(&set, &["x".into()]).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(attr_solutions(&set, 3).len(), 3);
    }

    #[test]
    fn presence_only_is_empty_word() {
        assert_eq!(solve_attr_set(&[AttrTest::presence()], &[]).unwrap(), "");
        assert_eq!(solve_attr_set(&[], &[]).unwrap(), "");
    }

    #[test]
    fn automaton_agrees_with_direct_evaluation() {
        let ops = [
            AttrOp::Equals,
            AttrOp::Includes,
            AttrOp::DashMatch,
            AttrOp::Prefix,
            AttrOp::Suffix,
            AttrOp::Substring,
        ];
        let values = ["a", "ab", "b-", ""];
        let words: Vec<String> = {
            let mut ws = vec![String::new()];
            let mut frontier = vec![String::new()];
            for _ in 0..4 {
                let mut next = Vec::new();
                for w in &frontier {
                    for c in ['a', 'b', ' ', '-'] {
                        next.push(format!("{w}{c}"));
                    }
                }
                ws.extend(next.iter().cloned());
                frontier = next;
            }
            ws
        };
        for o1 in ops {
            for o2 in ops {
                for v1 in values {
                    for v2 in values {
                        for (p1, p2) in [(true, true), (true, false)] {
                            let set = vec![
                                AttrTest { positive: p1, test: Some((o1, v1.into())) },
                                AttrTest { positive: p2, test: Some((o2, v2.into())) },
                            ];
                            let a = ConstraintWordAutomaton::new(&set);
                            for w in &words {
                                assert_eq!(a.accepts(w), direct(&set, w), "{set:?} on {w:?}");
                            }
                            if let Some(s) = solve_attr_set(&set, &[]) {
                                assert!(direct(&set, &s));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn attribute_bounds() {
        assert_eq!(compute_attr_bound(&[]), 1);
        let one = vec![vec![AttrTest::pos(AttrOp::Equals, "xy")]];
        // States: "", ^, ^x, ^xy, ^xy$.
        assert_eq!(ConstraintWordAutomaton::new(&one[0]).num_states(), 5);
        assert_eq!(compute_attr_bound(&one), 5 + 1);
        let two = vec![
            vec![AttrTest::pos(AttrOp::Equals, "xy")],
            vec![AttrTest::pos(AttrOp::Equals, "zw")],
        ];
        assert_eq!(compute_attr_bound(&two), 2 * 5 + 1);
    }
}
