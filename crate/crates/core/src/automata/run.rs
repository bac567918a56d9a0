//! Direct simulation of CSS automata on document trees.

use super::{CssAutomaton, Dir};
use crate::dom::{node_matches, DocumentTree};

/// True when `a` has an accepting run on `t` ending at node `n`.
pub fn run_accepts(a: &CssAutomaton, t: &DocumentTree, n: usize) -> bool {
    let ns = a.num_states;
    let mut seen = vec![false; ns * t.len()];
    let mut stack = vec![(a.init, 0usize)];
    seen[a.init * t.len()] = true;
    while let Some((q, v)) = stack.pop() {
        for tr in a.outgoing(q) {
            if !node_matches(t, v, &tr.sel) {
                continue;
            }
            let mut push = |q2: usize, v2: usize, stack: &mut Vec<(usize, usize)>| {
                let k = q2 * t.len() + v2;
                if !seen[k] {
                    seen[k] = true;
                    stack.push((q2, v2));
                }
            };
            match tr.dir {
                Dir::Last => {
                    if v == n {
                        return true;
                    }
                }
                Dir::Child => {
                    if let Some(&c) = t.children(v).first() {
                        push(tr.to, c, &mut stack);
                    }
                }
                Dir::Neighbour => {
                    let sibs = t.siblings(v);
                    let i = t.nodes[v].sibling_index;
                    if let Some(&m) = sibs.get(i + 1) {
                        push(tr.to, m, &mut stack);
                    }
                }
                Dir::Sibling => {
                    let sibs = t.siblings(v);
                    let i = t.nodes[v].sibling_index;
                    for &m in &sibs[(i + 1).min(sibs.len())..] {
                        push(tr.to, m, &mut stack);
                    }
                }
            }
        }
    }
    false
}
