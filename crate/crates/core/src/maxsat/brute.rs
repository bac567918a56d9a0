//! Exhaustive search for the best merging opportunity on small instances.

use crate::biclique::{Biclique, OrderContext};
use crate::graph::{apply_opportunity, is_valid_covering, CRule, CssGraph, MergingOpportunity};
use std::collections::HashSet;

/// Largest biclique (in nodes) whose subsets are enumerated.
pub const MAX_BRUTE_FORCE_NODES: usize = 16;

/// The opportunity with the smallest resulting weight among all
/// sub-bicliques of `maximal` at all positions, if it is smaller than the
/// current weight. Ties go to the smallest position, then to the smallest
/// rule text.
pub fn brute_force_best_opportunity(
    g: &CssGraph,
    c: &[CRule],
    ctx: &OrderContext,
    maximal: &[Biclique],
) -> Option<(MergingOpportunity, usize)> {
    let current = g.total_weight(c);
    let mut seen: HashSet<Biclique> = HashSet::new();
    let mut best: Option<(usize, usize, String, MergingOpportunity)> = None;
    for b in maximal {
        if b.num_nodes() > MAX_BRUTE_FORCE_NODES {
            log::warn!("brute force skips a biclique with {} nodes", b.num_nodes());
            continue;
        }
        for xm in 1u32..(1 << b.sels.len()) {
            for ym in 1u32..(1 << b.props.len()) {
                let sub = Biclique {
                    sels: pick(&b.sels, xm),
                    props: pick(&b.props, ym),
                };
                if !seen.insert(sub.clone()) {
                    continue;
                }
                for j in 0..=c.len() {
                    let Ok(props) = ctx.order_properties(&sub, j) else { continue };
                    let o = MergingOpportunity {
                        rule: CRule::new(sub.sels.clone(), props),
                        pos: j,
                    };
                    let mut inserted = c.to_vec();
                    inserted.insert(j, o.rule.clone());
                    if !is_valid_covering(g, &inserted) {
                        continue;
                    }
                    let w = g.total_weight(&apply_opportunity(c, &o));
                    let text = g.serialize(std::slice::from_ref(&o.rule));
                    let key = (w, j, text);
                    if best.as_ref().is_none_or(|(bw, bj, bt, _)| key < (*bw, *bj, bt.clone())) {
                        best = Some((key.0, key.1, key.2, o));
                    }
                }
            }
        }
    }
    best.filter(|(w, ..)| *w < current).map(|(w, _, _, o)| (o, w))
}

fn pick(items: &[usize], mask: u32) -> Vec<usize> {
    items
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) != 0)
        .map(|(_, &x)| x)
        .collect()
}
