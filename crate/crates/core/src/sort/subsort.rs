use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::graph::{ControlFlowGraph, NodeId, NodeRole};
use crate::util::Marker;

use super::{GraphView, SortError};

/// Kahn's algorithm over a predecessor-closed set of live nodes.
#[derive(Debug, Clone)]
pub(crate) struct SubSorter {
    in_set: Marker,
    indeg: Vec<u32>,
    heap: BinaryHeap<Reverse<(u8, NodeId)>>,
}

fn class(graph: &ControlFlowGraph, v: NodeId, prioritize_aux: bool) -> u8 {
    if !prioritize_aux {
        return 0;
    }
    let node = graph.node(v);
    match node.role {
        _ if node.aux > 0 => 0,
        NodeRole::Allocating(_) => 2,
        _ => 1,
    }
}

impl SubSorter {
    pub fn new(len: usize) -> Self {
        SubSorter {
            in_set: Marker::new(len),
            indeg: vec![0; len],
            heap: BinaryHeap::new(),
        }
    }

    pub fn sort(
        &mut self,
        view: &GraphView<'_>,
        nodes: &[NodeId],
        prioritize_aux: bool,
    ) -> Result<Vec<NodeId>, SortError> {
        let graph = view.graph();
        self.in_set.reset();
        let mut members = Vec::with_capacity(nodes.len());
        for &v in nodes {
            if !graph.contains(v) {
                return Err(SortError::UnknownNode(v));
            }
            if !view.is_live(v) {
                return Err(SortError::NotLive(v));
            }
            if self.in_set.mark(v.index()) {
                members.push(v);
            }
        }
        self.heap.clear();
        for &v in &members {
            let mut d = 0;
            for p in graph.predecessors(v) {
                if self.in_set.is_marked(p.index()) {
                    d += 1;
                } else if view.is_live(p) {
                    return Err(SortError::NotPredecessorClosed { node: v, missing: p });
                }
            }
            self.indeg[v.index()] = d;
            if d == 0 {
                self.heap.push(Reverse((class(graph, v, prioritize_aux), v)));
            }
        }
        let mut order = Vec::with_capacity(members.len());
        while let Some(Reverse((_, v))) = self.heap.pop() {
            order.push(v);
            for w in graph.successors(v) {
                if self.in_set.is_marked(w.index()) {
                    let d = &mut self.indeg[w.index()];
                    *d -= 1;
                    if *d == 0 {
                        self.heap.push(Reverse((class(graph, w, prioritize_aux), w)));
                    }
                }
            }
        }
        Ok(order)
    }
}

/// Topological order of `nodes`, which must be live and closed under live
/// predecessors.
///
/// Ready nodes are taken by `(class, id)`. With `prioritize_aux`, nodes with
/// auxiliary qubits come first (class 0), then neutral and releasing nodes,
/// then allocating ones (class 2); otherwise only the id counts.
pub fn sub_sort(
    view: &GraphView<'_>,
    nodes: &[NodeId],
    prioritize_aux: bool,
) -> Result<Vec<NodeId>, SortError> {
    SubSorter::new(view.graph().len()).sort(view, nodes, prioritize_aux)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphSpec, NodeSpec};

    #[test]
    fn aux_nodes_first_allocating_last() {
        // 0 (io 2) fans out to an allocating node, a neutral node and an aux node
        let mut spec = GraphSpec::new();
        spec.push(NodeSpec::neutral(0).with_io(3));
        spec.push(NodeSpec::alloc(0, 1));
        spec.push(NodeSpec::neutral(0));
        spec.push(NodeSpec::neutral(0).with_aux(1));
        spec.edge(0, 1, 1).edge(0, 2, 1).edge(0, 3, 1);
        let g = spec.build().unwrap();
        let view = GraphView::new(&g);
        let all: Vec<_> = g.node_ids().collect();
        let ids = |v: Vec<NodeId>| v.into_iter().map(|n| n.0).collect::<Vec<_>>();
        assert_eq!(ids(sub_sort(&view, &all, true).unwrap()), vec![0, 3, 2, 1]);
        assert_eq!(ids(sub_sort(&view, &all, false).unwrap()), vec![0, 1, 2, 3]);
    }

    #[test]
    fn rejects_open_sets() {
        let mut spec = GraphSpec::new();
        spec.push(NodeSpec::alloc(0, 1));
        spec.push(NodeSpec::release(0, 1));
        spec.edge(0, 1, 1);
        let g = spec.build().unwrap();
        let mut view = GraphView::new(&g);
        assert_eq!(
            sub_sort(&view, &[NodeId(1)], true),
            Err(SortError::NotPredecessorClosed {
                node: NodeId(1),
                missing: NodeId(0)
            })
        );
        view.remove(NodeId(0));
        assert_eq!(sub_sort(&view, &[NodeId(1)], true).unwrap(), vec![NodeId(1)]);
        assert_eq!(sub_sort(&view, &[NodeId(0)], true), Err(SortError::NotLive(NodeId(0))));
    }
}
