use crate::graph::NodeId;

use super::{reaches_releasing, GraphView, SortStats, Walker};

/// Priority of a frontier node; the sort emits the least-cost node first.
pub trait CostFunction {
    /// Computes costs for the unreduced graph.
    fn initialize(&mut self, view: &GraphView<'_>, stats: &mut SortStats);
    /// Cost of a live releasing node.
    fn cost(&self, v: NodeId) -> u64;
    /// Called after `removed` has been taken out of `view`.
    fn nodes_removed(&mut self, view: &GraphView<'_>, removed: &[NodeId], stats: &mut SortStats);
}

/// Qubits drawn (required plus auxiliary) by the live ancestry of a node,
/// the node itself included.
#[derive(Debug, Clone, Default)]
pub struct AncestryQubits {
    costs: Vec<u64>,
    keep: Vec<bool>,
    walker: Option<Walker>,
}

impl AncestryQubits {
    /// Adds `sign * weight(u)` to every live releasing node reachable from `u`.
    fn spread(&mut self, view: &GraphView<'_>, u: NodeId, add: bool, stats: &mut SortStats) {
        let graph = view.graph();
        let weight = graph.node(u).requests() as u64;
        if weight == 0 || !self.keep[u.index()] {
            return;
        }
        let mut written = 0;
        let walker = self.walker.get_or_insert_with(|| Walker::new(graph.len()));
        let costs = &mut self.costs;
        stats.cost_walk += walker.descendants(graph, u, &self.keep, |d| {
            if graph.node(d).role.is_releasing() && view.is_live(d) {
                written += 1;
                let c = &mut costs[d.index()];
                if add {
                    *c += weight;
                } else {
                    *c -= weight;
                }
            }
        });
        stats.cost_touches += written;
    }
}

impl CostFunction for AncestryQubits {
    fn initialize(&mut self, view: &GraphView<'_>, stats: &mut SortStats) {
        let graph = view.graph();
        self.costs = vec![0; graph.len()];
        self.keep = reaches_releasing(graph);
        for u in graph.node_ids() {
            if view.is_live(u) {
                self.spread(view, u, true, stats);
            }
        }
    }

    fn cost(&self, v: NodeId) -> u64 {
        self.costs[v.index()]
    }

    fn nodes_removed(&mut self, view: &GraphView<'_>, removed: &[NodeId], stats: &mut SortStats) {
        for &u in removed {
            self.spread(view, u, false, stats);
        }
    }
}
