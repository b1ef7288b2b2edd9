//! Binding rules. Each takes the requesting slots of one node, in ordinal
//! order, and returns the bindings made together with the depth at which
//! the bound pool entry was freed.

use crate::graph::Node;
use crate::reach::ReachIndex;

use super::depth::{post_deps, PathSemantics};
use super::{QubitSlot, ReuseBinding, ReusePool};

type Bound = Vec<(ReuseBinding, u64)>;

/// Pairs the oldest pool entries with the slots, in order, until either
/// runs out.
pub fn bind_greedy(pool: &mut ReusePool, slots: &[QubitSlot]) -> Bound {
    let mut out = Vec::new();
    for &to in slots {
        let Some(e) = pool.pop_front() else { break };
        out.push((ReuseBinding { from: e.slot, to }, e.post_dep));
    }
    out
}

/// Like [`bind_greedy`], but only entries freed by a strict ancestor of the
/// requesting node are eligible.
pub fn bind_dependency_preserving(
    pool: &mut ReusePool,
    slots: &[QubitSlot],
    reach: &ReachIndex,
) -> Bound {
    let mut out = Vec::new();
    for &to in slots {
        let Some(pos) = pool.position(|e| reach.reaches(e.slot.node, to.node)) else {
            break;
        };
        let e = pool.take(pos).expect("position is in range");
        out.push((ReuseBinding { from: e.slot, to }, e.post_dep));
    }
    out
}

/// Binds an entry to a slot only if the node's output depths stay what they
/// would be with a fresh qubit; among admissible entries, the one freed
/// latest in depth wins (oldest on ties).
///
/// `pre` holds the node's input depths with every requesting slot at 0.
pub fn bind_depth_preserving(
    pool: &mut ReusePool,
    slots: &[QubitSlot],
    node: &Node,
    pre: &[u64],
    semantics: PathSemantics,
) -> Bound {
    let desc = node.effective_depth();
    let mut baseline = Vec::new();
    post_deps(&desc, pre, semantics, &mut baseline);
    let mut work = pre.to_vec();
    let mut trial = Vec::new();
    let mut out = Vec::new();

    for &to in slots {
        let i = to.position(node).expect("request slot of this node");
        let mut best: Option<(usize, u64)> = None;
        for (pos, e) in pool.iter().enumerate() {
            let admissible = match semantics {
                PathSemantics::Longest => (0..baseline.len()).all(|k| match desc.dep(i, k) {
                    Some(d) => e.post_dep + d <= baseline[k],
                    None => true,
                }),
                PathSemantics::Shortest => {
                    work[i] = e.post_dep;
                    post_deps(&desc, &work, semantics, &mut trial);
                    work[i] = 0;
                    trial == baseline
                }
            };
            if admissible && best.is_none_or(|(_, p)| e.post_dep > p) {
                best = Some((pos, e.post_dep));
            }
        }
        if let Some((pos, _)) = best {
            let e = pool.take(pos).expect("position is in range");
            work[i] = e.post_dep;
            out.push((ReuseBinding { from: e.slot, to }, e.post_dep));
        }
    }
    out
}
