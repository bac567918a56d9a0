//! Translation of selectors into CSS automata.
//!
//! For `σ1 op1 σ2 ... σn` there is one state `q_i` per node selector, an
//! intermediate state `q̄_i` after each descendant, child or sibling
//! combinator, and a final state. The initial state `q_1` can reach any node
//! through `↓*` and `→→*` loops. The intermediate states let the run wander
//! to any descendant (descendant), any child (child) or any later sibling
//! (sibling) before `q_{i+1}` reads the next node.

use super::{CssAutomaton, Dir, Transition};
use crate::selector::{normalize, Combinator, Condition, NodeSelector, Selector};

/// Compile a selector into an equivalent CSS automaton.
pub fn compile(s: &Selector) -> CssAutomaton {
    let s = normalize(s);
    let n = s.compounds.len();
    let mut nodes: Vec<NodeSelector> = s.compounds.clone();
    if s.pseudo_element.is_some_and(|pe| pe.requires_content()) {
        nodes[n - 1].push_cond(Condition::not_empty());
    }
    let mut names = Vec::new();
    let mut transitions = Vec::new();
    let any = NodeSelector::any;
    let mut add = |from: usize, dir: Dir, sel: NodeSelector, to: usize| {
        transitions.push(Transition { from, dir, sel, to });
    };
    // Main states q_1..q_n are 0..n-1.
    for i in 0..n {
        names.push(format!("q{}", i + 1));
    }
    let fin = names.len();
    names.push("qf".into());
    add(0, Dir::Child, any(), 0);
    add(0, Dir::Sibling, any(), 0);
    for i in 0..n - 1 {
        let sel = nodes[i].clone();
        match s.combinators[i] {
            Combinator::Neighbour => add(i, Dir::Neighbour, sel, i + 1),
            comb => {
                let bar = names.len();
                names.push(format!("q{}'", i + 1));
                let step = if comb == Combinator::Sibling { Dir::Neighbour } else { Dir::Child };
                add(i, step, sel.clone(), i + 1);
                add(i, step, sel, bar);
                add(bar, Dir::Sibling, any(), bar);
                add(bar, Dir::Neighbour, any(), i + 1);
                if comb == Combinator::Descendant {
                    add(bar, Dir::Child, any(), bar);
                    add(bar, Dir::Child, any(), i + 1);
                }
            }
        }
    }
    add(n - 1, Dir::Last, nodes[n - 1].clone(), fin);
    CssAutomaton {
        num_states: names.len(),
        names,
        transitions,
        init: 0,
        fin,
    }
}
