//! Reuse-prioritizing topological sort.
//!
//! Releasing nodes are scheduled first: the pass keeps the frontier of
//! releasing nodes whose releasing ancestors are all emitted, repeatedly
//! picks the frontier node of least cost, emits a topological sort of its
//! remaining ancestry and removes that ancestry from the graph. Whatever is
//! left once the frontier runs dry is appended at the end.
//!
//! With [`AncestryQubits`] the whole pass costs `O(|V| * |V_R|)`: ancestry
//! costs are kept up to date incrementally by walking, for each removed
//! qubit-drawing node, down to its live releasing descendants.

mod cost;
mod subsort;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ControlFlowGraph, NodeId};
use crate::util::Marker;

pub use cost::{AncestryQubits, CostFunction};
pub use subsort::sub_sort;
pub(crate) use subsort::SubSorter;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SortError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} was already removed")]
    NotLive(NodeId),
    #[error("node {node} has live predecessor {missing} outside the set")]
    NotPredecessorClosed { node: NodeId, missing: NodeId },
    #[error("node {0} is not on the releasing frontier")]
    NotInFrontier(NodeId),
    #[error("order is not a permutation of 0..{len}")]
    NotAPermutation { len: usize },
    #[error("order covers {found} nodes, graph has {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("edge {from}->{to} is violated by the order")]
    NotTopological { from: NodeId, to: NodeId },
}

/// A full topological order together with every node's position in it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SortResultRepr", into = "SortResultRepr")]
pub struct SortResult {
    order: Vec<NodeId>,
    index: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct SortResultRepr {
    order: Vec<NodeId>,
}

impl TryFrom<SortResultRepr> for SortResult {
    type Error = SortError;

    fn try_from(r: SortResultRepr) -> Result<Self, SortError> {
        SortResult::from_order(r.order)
    }
}

impl From<SortResult> for SortResultRepr {
    fn from(s: SortResult) -> Self {
        SortResultRepr { order: s.order }
    }
}

impl SortResult {
    /// Wraps `order`, which must be a permutation of `0..order.len()`.
    pub fn from_order(order: Vec<NodeId>) -> Result<Self, SortError> {
        let len = order.len();
        let mut index = vec![u32::MAX; len];
        for (pos, v) in order.iter().enumerate() {
            match index.get_mut(v.index()) {
                Some(slot) if *slot == u32::MAX => *slot = pos as u32,
                _ => return Err(SortError::NotAPermutation { len }),
            }
        }
        Ok(SortResult { order, index })
    }

    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Emission index of `v`.
    #[inline]
    pub fn position(&self, v: NodeId) -> usize {
        self.index[v.index()] as usize
    }

    /// Checks that this order covers `graph` and respects every edge.
    pub fn check_against(&self, graph: &ControlFlowGraph) -> Result<(), SortError> {
        if self.order.len() != graph.len() {
            return Err(SortError::WrongLength {
                expected: graph.len(),
                found: self.order.len(),
            });
        }
        for e in graph.edges() {
            if self.position(e.from) >= self.position(e.to) {
                return Err(SortError::NotTopological {
                    from: e.from,
                    to: e.to,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SortOptions {
    /// Within each emitted ancestry, dequeue nodes with auxiliary qubits
    /// before qubit-requiring nodes.
    pub prioritize_aux: bool,
}

impl Default for SortOptions {
    fn default() -> Self {
        SortOptions {
            prioritize_aux: true,
        }
    }
}

/// Work counters, used to check the pass's complexity empirically.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SortStats {
    /// Cached cost entries written.
    pub cost_touches: u64,
    /// Node visits spent locating the releasing descendants whose costs change.
    pub cost_walk: u64,
    /// Node visits spent maintaining closure in-degrees.
    pub closure_touches: u64,
    /// Node visits spent collecting ancestries.
    pub ancestry_touches: u64,
    /// Frontier members inspected while selecting.
    pub frontier_scans: u64,
}

impl SortStats {
    /// Cache and bookkeeping work, excluding the cost walks.
    pub fn total(&self) -> u64 {
        self.cost_touches + self.closure_touches + self.ancestry_touches + self.frontier_scans
    }
}

/// A graph with some nodes removed.
#[derive(Debug, Clone)]
pub struct GraphView<'g> {
    graph: &'g ControlFlowGraph,
    removed: Vec<bool>,
}

impl<'g> GraphView<'g> {
    pub fn new(graph: &'g ControlFlowGraph) -> Self {
        GraphView {
            graph,
            removed: vec![false; graph.len()],
        }
    }

    pub fn graph(&self) -> &'g ControlFlowGraph {
        self.graph
    }

    #[inline]
    pub fn is_live(&self, v: NodeId) -> bool {
        !self.removed[v.index()]
    }

    pub fn remove(&mut self, v: NodeId) {
        self.removed[v.index()] = true;
    }

    pub fn live_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.graph.node_ids().filter(move |&v| self.is_live(v))
    }
}

/// `keep[v]` iff `v` is releasing or has a releasing descendant.
pub(crate) fn reaches_releasing(graph: &ControlFlowGraph) -> Vec<bool> {
    let mut keep = vec![false; graph.len()];
    for &v in graph.topological_order().iter().rev() {
        keep[v.index()] = graph.node(v).role.is_releasing()
            || graph.successors(v).any(|w| keep[w.index()]);
    }
    keep
}

/// Depth-first traversal scratch space.
#[derive(Debug, Clone)]
pub(crate) struct Walker {
    marker: Marker,
    stack: Vec<NodeId>,
}

impl Walker {
    pub fn new(len: usize) -> Self {
        Walker {
            marker: Marker::new(len),
            stack: Vec::new(),
        }
    }

    /// Visits `start` and its descendants restricted to nodes with
    /// `keep[v]`. Returns the number of nodes visited.
    pub fn descendants(
        &mut self,
        graph: &ControlFlowGraph,
        start: NodeId,
        keep: &[bool],
        mut f: impl FnMut(NodeId),
    ) -> u64 {
        self.marker.reset();
        self.marker.mark(start.index());
        self.stack.push(start);
        let mut visited = 0;
        while let Some(u) = self.stack.pop() {
            visited += 1;
            f(u);
            for w in graph.successors(u) {
                if keep[w.index()] && self.marker.mark(w.index()) {
                    self.stack.push(w);
                }
            }
        }
        visited
    }

    /// `start` and its live ancestors, in discovery order.
    pub fn live_ancestry(&mut self, view: &GraphView<'_>, start: NodeId) -> Vec<NodeId> {
        self.marker.reset();
        self.marker.mark(start.index());
        self.stack.push(start);
        let mut out = Vec::new();
        while let Some(u) = self.stack.pop() {
            out.push(u);
            for p in view.graph.predecessors(u) {
                if view.is_live(p) && self.marker.mark(p.index()) {
                    self.stack.push(p);
                }
            }
        }
        out
    }
}

/// Incremental state of the reuse-prioritizing sort.
pub struct SortState<'g, C: CostFunction> {
    view: GraphView<'g>,
    cost: C,
    prioritize_aux: bool,
    reaches_releasing: Vec<bool>,
    closure_indeg: Vec<u32>,
    frontier: Vec<NodeId>,
    stats: SortStats,
    walker: Walker,
    sorter: SubSorter,
}

impl<'g, C: CostFunction> SortState<'g, C> {
    pub fn new(graph: &'g ControlFlowGraph, mut cost: C, options: SortOptions) -> Self {
        let view = GraphView::new(graph);
        let mut stats = SortStats::default();
        cost.initialize(&view, &mut stats);

        let keep = reaches_releasing(graph);
        let mut walker = Walker::new(graph.len());
        let mut closure_indeg = vec![0u32; graph.len()];
        for r in graph.node_ids() {
            if !graph.node(r).role.is_releasing() {
                continue;
            }
            stats.closure_touches += walker.descendants(graph, r, &keep, |d| {
                if d != r && graph.node(d).role.is_releasing() {
                    closure_indeg[d.index()] += 1;
                }
            });
        }
        let frontier = graph
            .node_ids()
            .filter(|&r| graph.node(r).role.is_releasing() && closure_indeg[r.index()] == 0)
            .collect();

        SortState {
            view,
            cost,
            prioritize_aux: options.prioritize_aux,
            reaches_releasing: keep,
            closure_indeg,
            frontier,
            stats,
            walker,
            sorter: SubSorter::new(graph.len()),
        }
    }

    pub fn view(&self) -> &GraphView<'g> {
        &self.view
    }

    pub fn stats(&self) -> SortStats {
        self.stats
    }

    pub fn is_live(&self, v: NodeId) -> bool {
        self.view.is_live(v)
    }

    /// Current frontier, in ascending id order.
    pub fn frontier(&self) -> Vec<NodeId> {
        let mut f = self.frontier.clone();
        f.sort_unstable();
        f
    }

    /// Number of live releasing strict ancestors of releasing node `v`.
    pub fn closure_in_degree(&self, v: NodeId) -> u32 {
        self.closure_indeg[v.index()]
    }

    /// Cached cost of a live releasing node.
    pub fn cost(&self, v: NodeId) -> Option<u64> {
        let node = self.view.graph.node(v);
        (node.role.is_releasing() && self.view.is_live(v)).then(|| self.cost.cost(v))
    }

    /// Frontier node of least cost; ties go to the lowest id.
    pub fn select(&mut self) -> Option<NodeId> {
        self.stats.frontier_scans += self.frontier.len() as u64;
        self.frontier
            .iter()
            .copied()
            .min_by_key(|&v| (self.cost.cost(v), v))
    }

    /// Emits frontier node `v`: returns a sub-sort of its live ancestry and
    /// removes that ancestry, updating frontier, in-degrees and costs.
    pub fn emit(&mut self, v: NodeId) -> Result<Vec<NodeId>, SortError> {
        if !self.frontier.contains(&v) {
            return Err(SortError::NotInFrontier(v));
        }
        let ancestry = self.walker.live_ancestry(&self.view, v);
        self.stats.ancestry_touches += ancestry.len() as u64;
        let order = self.sorter.sort(&self.view, &ancestry, self.prioritize_aux)?;
        for &u in &ancestry {
            self.view.remove(u);
        }
        self.update_after_removal(v, &ancestry);
        Ok(order)
    }

    fn update_after_removal(&mut self, emitted: NodeId, removed: &[NodeId]) {
        self.frontier.retain(|&f| f != emitted);
        self.cost.nodes_removed(&self.view, removed, &mut self.stats);

        let graph = self.view.graph;
        let (indeg, frontier) = (&mut self.closure_indeg, &mut self.frontier);
        self.stats.closure_touches +=
            self.walker
                .descendants(graph, emitted, &self.reaches_releasing, |d| {
                    if d != emitted && graph.node(d).role.is_releasing() {
                        indeg[d.index()] -= 1;
                        if indeg[d.index()] == 0 {
                            frontier.push(d);
                        }
                    }
                });
    }

    /// Sorts and removes everything still live.
    pub fn finish(&mut self) -> Result<Vec<NodeId>, SortError> {
        let rest: Vec<NodeId> = self.view.live_nodes().collect();
        let order = self.sorter.sort(&self.view, &rest, self.prioritize_aux)?;
        for &u in &rest {
            self.view.remove(u);
        }
        Ok(order)
    }
}

/// Reuse-prioritizing sort with the default ancestry-qubit cost.
pub fn smart_sort(graph: &ControlFlowGraph, options: SortOptions) -> SortResult {
    smart_sort_with(graph, AncestryQubits::default(), options).0
}

/// Reuse-prioritizing sort with a caller-supplied cost function.
pub fn smart_sort_with<C: CostFunction>(
    graph: &ControlFlowGraph,
    cost: C,
    options: SortOptions,
) -> (SortResult, SortStats) {
    let mut state = SortState::new(graph, cost, options);
    let mut order = Vec::with_capacity(graph.len());
    while let Some(v) = state.select() {
        order.extend(state.emit(v).expect("selected node is on the frontier"));
    }
    order.extend(state.finish().expect("live set is predecessor-closed"));
    let stats = state.stats();
    let result = SortResult::from_order(order).expect("every node emitted exactly once");
    (result, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphSpec, NodeSpec};

    #[test]
    fn single_node() {
        let mut spec = GraphSpec::new();
        spec.push(NodeSpec::alloc(0, 1));
        let g = spec.build().unwrap();
        assert_eq!(smart_sort(&g, SortOptions::default()).order(), &[NodeId(0)]);
    }

    #[test]
    fn empty_graph() {
        let g = GraphSpec::new().build().unwrap();
        assert!(smart_sort(&g, SortOptions::default()).is_empty());
    }

    #[test]
    fn from_order_rejects_non_permutations() {
        assert!(SortResult::from_order(vec![NodeId(0), NodeId(0)]).is_err());
        assert!(SortResult::from_order(vec![NodeId(2), NodeId(0)]).is_err());
        let s = SortResult::from_order(vec![NodeId(1), NodeId(0)]).unwrap();
        assert_eq!(s.position(NodeId(0)), 1);
    }

    #[test]
    fn emit_rejects_non_frontier_nodes() {
        let mut spec = GraphSpec::new();
        spec.push(NodeSpec::alloc(0, 2));
        spec.push(NodeSpec::release(0, 1));
        spec.push(NodeSpec::release(0, 1));
        spec.edge(0, 1, 2).edge(1, 2, 1);
        let g = spec.build().unwrap();
        let mut state = SortState::new(&g, AncestryQubits::default(), SortOptions::default());
        assert_eq!(state.frontier(), vec![NodeId(1)]);
        assert_eq!(state.closure_in_degree(NodeId(2)), 1);
        assert_eq!(state.emit(NodeId(2)), Err(SortError::NotInFrontier(NodeId(2))));
        assert_eq!(state.emit(NodeId(1)).unwrap(), vec![NodeId(0), NodeId(1)]);
        assert_eq!(state.frontier(), vec![NodeId(2)]);
        assert_eq!(state.cost(NodeId(2)), Some(0));
        assert_eq!(state.cost(NodeId(1)), None);
    }
}
