//! CSS automata: path-walking automata over document trees that are closed
//! under intersection.
//!
//! A run starts at the root in the initial state. A child transition reads the
//! current node and moves to its first child, a neighbour transition moves to
//! the next sibling, a sibling transition skips to some strictly later sibling
//! and a last transition accepts the current node.

pub mod compile;
pub mod intersect;
pub mod run;

pub use compile::compile;
pub use intersect::{intersect, intersect_node_selectors, is_trivially_empty};
pub use run::run_accepts;

use crate::selector::NodeSelector;
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt::Write;

/// Transition direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Dir {
    /// Move to the first child.
    Child,
    /// Move to the next sibling.
    Neighbour,
    /// Move to some strictly later sibling.
    Sibling,
    /// Accept the current node.
    Last,
}

impl Dir {
    pub fn symbol(self) -> &'static str {
        match self {
            Dir::Child => "↓",
            Dir::Neighbour => "→",
            Dir::Sibling => "→→",
            Dir::Last => "⊣",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Transition {
    pub from: usize,
    pub dir: Dir,
    pub sel: NodeSelector,
    pub to: usize,
}

/// A CSS automaton with states `0..num_states`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CssAutomaton {
    pub num_states: usize,
    pub names: Vec<String>,
    pub transitions: Vec<Transition>,
    pub init: usize,
    pub fin: usize,
}

/// Structural violation of the automaton conditions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum AutomatonViolation {
    /// Condition 1: a cycle through distinct states.
    NonSelfLoopCycle(Vec<usize>),
    /// Condition 2: sibling transition that is not a `*` self-loop.
    SiblingNotAnyLoop(usize),
    /// Condition 3: self-loop labelled neighbour or with a non-`*` selector.
    BadSelfLoop(usize),
    /// Condition 4: final state reached without last, or last not reaching it.
    LastMismatch(usize),
    /// Condition 5: transition leaving the final state.
    FinalNotSink(usize),
}

impl CssAutomaton {
    pub fn outgoing(&self, q: usize) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.from == q)
    }

    /// Remove states that are unreachable from `init` or cannot reach `fin`,
    /// and transitions whose selector is trivially unsatisfiable.
    pub fn prune(&mut self) {
        self.transitions.retain(|t| !intersect::is_trivially_empty(&t.sel));
        let n = self.num_states;
        let mut fwd = vec![false; n];
        fwd[self.init] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for t in &self.transitions {
                if fwd[t.from] && !fwd[t.to] {
                    fwd[t.to] = true;
                    changed = true;
                }
            }
        }
        let mut bwd = vec![false; n];
        bwd[self.fin] = true;
        changed = true;
        while changed {
            changed = false;
            for t in &self.transitions {
                if bwd[t.to] && !bwd[t.from] {
                    bwd[t.from] = true;
                    changed = true;
                }
            }
        }
        let keep: Vec<bool> = (0..n)
            .map(|q| (fwd[q] && bwd[q]) || q == self.init || q == self.fin)
            .collect();
        let mut map = vec![usize::MAX; n];
        let mut names = Vec::new();
        for q in 0..n {
            if keep[q] {
                map[q] = names.len();
                names.push(self.names[q].clone());
            }
        }
        let mut seen = BTreeSet::new();
        let mut transitions = Vec::new();
        for t in &self.transitions {
            if keep[t.from] && keep[t.to] && fwd[t.from] && bwd[t.to] {
                let nt = Transition {
                    from: map[t.from],
                    dir: t.dir,
                    sel: t.sel.clone(),
                    to: map[t.to],
                };
                if seen.insert((nt.from, nt.dir, nt.sel.clone(), nt.to)) {
                    transitions.push(nt);
                }
            }
        }
        self.num_states = names.len();
        self.names = names;
        self.init = map[self.init];
        self.fin = map[self.fin];
        self.transitions = transitions;
    }

    /// True when the final state cannot be reached from the initial one at all.
    pub fn trivially_empty(&self) -> bool {
        !self.transitions.iter().any(|t| t.dir == Dir::Last)
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph css_automaton {\n  rankdir=LR;\n");
        for q in 0..self.num_states {
            let shape = if q == self.fin { "doublecircle" } else { "circle" };
            let _ = writeln!(s, "  q{q} [label=\"{}\", shape={shape}];", self.names[q].replace('"', "\\\""));
        }
        let _ = writeln!(s, "  start [shape=point];\n  start -> q{};", self.init);
        for t in &self.transitions {
            let _ = writeln!(
                s,
                "  q{} -> q{} [label=\"{} {}\"];",
                t.from,
                t.to,
                t.dir.symbol(),
                t.sel.to_string().replace('"', "\\\"")
            );
        }
        s.push_str("}\n");
        s
    }
}

/// Check the five structural conditions.
pub fn validate_automaton(a: &CssAutomaton) -> Vec<AutomatonViolation> {
    let mut out = Vec::new();
    for (i, t) in a.transitions.iter().enumerate() {
        if t.dir == Dir::Sibling && (t.from != t.to || !t.sel.is_any()) {
            out.push(AutomatonViolation::SiblingNotAnyLoop(i));
        }
        if t.from == t.to && (t.dir == Dir::Neighbour || !t.sel.is_any()) {
            out.push(AutomatonViolation::BadSelfLoop(i));
        }
        if (t.to == a.fin) != (t.dir == Dir::Last) {
            out.push(AutomatonViolation::LastMismatch(i));
        }
        if t.from == a.fin {
            out.push(AutomatonViolation::FinalNotSink(i));
        }
    }
    // Condition 1: the graph without self-loops must be acyclic.
    let n = a.num_states;
    let mut color = vec![0u8; n];
    let mut stack_path = Vec::new();
    fn dfs(
        a: &CssAutomaton,
        q: usize,
        color: &mut [u8],
        path: &mut Vec<usize>,
        out: &mut Vec<AutomatonViolation>,
    ) -> bool {
        color[q] = 1;
        path.push(q);
        for t in a.outgoing(q) {
            if t.to == q {
                continue;
            }
            if color[t.to] == 1 {
                let start = path.iter().position(|&p| p == t.to).unwrap_or(0);
                out.push(AutomatonViolation::NonSelfLoopCycle(path[start..].to_vec()));
                return true;
            }
            if color[t.to] == 0 && dfs(a, t.to, color, path, out) {
                return true;
            }
        }
        path.pop();
        color[q] = 2;
        false
    }
    for q in 0..n {
        if color[q] == 0 && dfs(a, q, &mut color, &mut stack_path, &mut out) {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn any() -> NodeSelector {
        NodeSelector::any()
    }

    #[test]
    fn detects_neighbour_self_loop() {
        let a = CssAutomaton {
            num_states: 2,
            names: vec!["q0".into(), "qf".into()],
            transitions: vec![
                Transition { from: 0, dir: Dir::Neighbour, sel: any(), to: 0 },
                Transition { from: 0, dir: Dir::Last, sel: any(), to: 1 },
            ],
            init: 0,
            fin: 1,
        };
        assert_eq!(validate_automaton(&a), vec![AutomatonViolation::BadSelfLoop(0)]);
    }

    #[test]
    fn detects_non_sink_final() {
        let a = CssAutomaton {
            num_states: 2,
            names: vec!["q0".into(), "qf".into()],
            transitions: vec![
                Transition { from: 0, dir: Dir::Last, sel: any(), to: 1 },
                Transition { from: 1, dir: Dir::Child, sel: any(), to: 0 },
            ],
            init: 0,
            fin: 1,
        };
        let v = validate_automaton(&a);
        assert!(v.contains(&AutomatonViolation::FinalNotSink(1)));
        assert!(v.iter().any(|x| matches!(x, AutomatonViolation::NonSelfLoopCycle(_))));
    }
}
