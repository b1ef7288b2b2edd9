//! Control flow graph model.
//!
//! A [`GraphSpec`] is the raw, unchecked description of a program: nodes with
//! their qubit counts and data-flow edges carrying qubit counts. Turning it
//! into a [`ControlFlowGraph`] runs [`validate`](crate::validate::validate)
//! and builds the adjacency and topological order every pass relies on.
//!
//! # Qubit layout of a node
//!
//! Every node sees its qubits as one local index space:
//!
//! ```text
//! [0, io)                 I/O qubits, arrive on in-edges and leave on out-edges
//! [io, io + q)            role qubits: drawn from the pool (allocating) or
//!                         returned to it (releasing); q = required / released
//! [io + q, io + q + aux)  auxiliary qubits, drawn and returned by the node
//! ```
//!
//! Input wires fill positions `[0, io + released)` in order of the in-edges'
//! source ids; output wires leave from positions `[0, io + required)` in order
//! of the out-edges' target ids. Inputs not covered by an edge are program
//! inputs (only sources may have them in a validated graph); outputs not taken
//! by an edge are program outputs.

use std::borrow::Cow;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::validate::{self, ValidationReport};

/// Dense node index, `0..graph.len()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

/// What a node does to the qubit pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRole {
    /// Draws this many qubits in the zero state.
    Allocating(u32),
    /// Returns this many qubits, uncomputed to zero, to the pool.
    Releasing(u32),
    Neutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("node both requires {required} and releases {released} qubits")]
pub struct RoleRestriction {
    pub required: u32,
    pub released: u32,
}

impl NodeRole {
    /// Builds a role from raw counts, rejecting nodes that would both draw
    /// and release qubits.
    pub fn from_counts(required: u32, released: u32) -> Result<Self, RoleRestriction> {
        match (required, released) {
            (0, 0) => Ok(NodeRole::Neutral),
            (r, 0) => Ok(NodeRole::Allocating(r)),
            (0, r) => Ok(NodeRole::Releasing(r)),
            (required, released) => Err(RoleRestriction { required, released }),
        }
    }

    pub fn required(self) -> u32 {
        match self {
            NodeRole::Allocating(n) => n,
            _ => 0,
        }
    }

    pub fn released(self) -> u32 {
        match self {
            NodeRole::Releasing(n) => n,
            _ => 0,
        }
    }

    pub fn is_releasing(self) -> bool {
        matches!(self, NodeRole::Releasing(_))
    }

    pub fn is_allocating(self) -> bool {
        matches!(self, NodeRole::Allocating(_))
    }
}

/// Square matrix of intra-node depths: entry `(i, j)` is the length of the
/// longest gate path from the input of qubit `i` to the output of qubit `j`,
/// or `None` when no path exists.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DepMatrix {
    size: usize,
    entries: Vec<Option<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("row {row} has {len} entries, expected {expected}")]
pub struct MatrixShapeError {
    pub row: usize,
    pub len: usize,
    pub expected: usize,
}

impl DepMatrix {
    pub fn new(rows: Vec<Vec<Option<u64>>>) -> Result<Self, MatrixShapeError> {
        let size = rows.len();
        let mut entries = Vec::with_capacity(size * size);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != size {
                return Err(MatrixShapeError {
                    row,
                    len: r.len(),
                    expected: size,
                });
            }
            entries.extend(r);
        }
        Ok(DepMatrix { size, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> Option<u64> {
        self.entries[from * self.size + to]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Option<u64>]> + '_ {
        self.entries.chunks(self.size.max(1)).take(self.size)
    }
}

/// Intra-node depth data used by the depth recurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DepthDescriptor {
    /// Every input reaches every output through exactly this depth.
    Scalar(u64),
    Matrix(DepMatrix),
}

impl DepthDescriptor {
    #[inline]
    pub fn dep(&self, from: usize, to: usize) -> Option<u64> {
        match self {
            DepthDescriptor::Scalar(d) => Some(*d),
            DepthDescriptor::Matrix(m) => m.get(from, to),
        }
    }
}

/// Unchecked node description.
///
/// Keeping `required` and `released` as independent counts lets validation
/// report nodes that break the role restriction instead of making them
/// unrepresentable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    pub id: u32,
    pub required: u32,
    pub released: u32,
    pub aux: u32,
    /// Number of I/O qubits; derived from edge flows when absent.
    pub io: Option<u32>,
    pub depth: Option<DepthDescriptor>,
}

impl NodeSpec {
    pub fn neutral(id: u32) -> Self {
        NodeSpec {
            id,
            required: 0,
            released: 0,
            aux: 0,
            io: None,
            depth: Some(DepthDescriptor::Scalar(1)),
        }
    }

    pub fn alloc(id: u32, qubits: u32) -> Self {
        NodeSpec {
            required: qubits,
            ..NodeSpec::neutral(id)
        }
    }

    pub fn release(id: u32, qubits: u32) -> Self {
        NodeSpec {
            released: qubits,
            ..NodeSpec::neutral(id)
        }
    }

    pub fn with_aux(mut self, aux: u32) -> Self {
        self.aux = aux;
        self
    }

    pub fn with_io(mut self, io: u32) -> Self {
        self.io = Some(io);
        self
    }

    pub fn with_depth(mut self, depth: Option<DepthDescriptor>) -> Self {
        self.depth = depth;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSpec {
    pub from: u32,
    pub to: u32,
    pub flow: u32,
}

/// Raw graph description, as parsed or generated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphSpec {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
}

impl GraphSpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a node, overwriting its id with the next dense index.
    pub fn push(&mut self, mut node: NodeSpec) -> u32 {
        let id = self.nodes.len() as u32;
        node.id = id;
        self.nodes.push(node);
        id
    }

    pub fn edge(&mut self, from: u32, to: u32, flow: u32) -> &mut Self {
        self.edges.push(EdgeSpec { from, to, flow });
        self
    }

    pub fn build(self) -> Result<ControlFlowGraph, GraphError> {
        ControlFlowGraph::new(self)
    }
}

/// A validated node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub role: NodeRole,
    pub aux: u32,
    /// Effective I/O qubit count (declared or derived from flows).
    pub io: u32,
    pub depth: Option<DepthDescriptor>,
}

const DEFAULT_DEPTH: DepthDescriptor = DepthDescriptor::Scalar(1);

impl Node {
    #[inline]
    pub fn required(&self) -> u32 {
        self.role.required()
    }

    #[inline]
    pub fn released(&self) -> u32 {
        self.role.released()
    }

    /// Count of the role qubits (required or released).
    #[inline]
    pub fn role_qubits(&self) -> u32 {
        self.required() + self.released()
    }

    /// Size of the local qubit index space.
    #[inline]
    pub fn qubit_count(&self) -> u32 {
        self.io + self.role_qubits() + self.aux
    }

    /// Qubits arriving on wires.
    #[inline]
    pub fn inputs(&self) -> u32 {
        self.io + self.released()
    }

    /// Qubits leaving on wires.
    #[inline]
    pub fn outputs(&self) -> u32 {
        self.io + self.required()
    }

    /// Fresh-qubit requests: required plus auxiliary.
    #[inline]
    pub fn requests(&self) -> u32 {
        self.required() + self.aux
    }

    /// Qubits handed back to the pool: released plus auxiliary.
    #[inline]
    pub fn releases(&self) -> u32 {
        self.released() + self.aux
    }

    /// The descriptor used for depth metrics; nodes without one count as
    /// `Scalar(1)`.
    pub fn effective_depth(&self) -> Cow<'_, DepthDescriptor> {
        match &self.depth {
            Some(d) => Cow::Borrowed(d),
            None => Cow::Owned(DEFAULT_DEPTH),
        }
    }

    pub fn to_spec(&self) -> NodeSpec {
        NodeSpec {
            id: self.id.0,
            required: self.required(),
            released: self.released(),
            aux: self.aux,
            io: Some(self.io),
            depth: self.depth.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub flow: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("invalid graph:\n{0}")]
    Invalid(ValidationReport),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

/// Immutable, validated control flow graph.
///
/// Edges are stored sorted by `(from, to)`, so the out-edges of a node form a
/// contiguous slice; in-edges are indexed separately, sorted by source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlFlowGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    out_start: Vec<u32>,
    in_start: Vec<u32>,
    in_edges: Vec<u32>,
    /// Per edge: first output position at the source, first input position
    /// at the target.
    ports: Vec<(u32, u32)>,
    topo: Vec<NodeId>,
}

impl ControlFlowGraph {
    /// Validates `spec` and builds the graph; any violation rejects it.
    pub fn new(spec: GraphSpec) -> Result<Self, GraphError> {
        let checked = validate::check(&spec);
        if !checked.report.is_empty() {
            return Err(GraphError::Invalid(checked.report));
        }
        Ok(Self::assemble(spec, checked.io))
    }

    /// Builds a graph that may take program inputs at non-source nodes.
    ///
    /// Used for block subgraphs and composed graphs, whose boundary wires
    /// are cut. Structural problems (ids, edges, cycles, roles, matrix
    /// shapes) are still rejected.
    pub(crate) fn new_relaxed(spec: GraphSpec) -> Result<Self, GraphError> {
        let mut checked = validate::check(&spec);
        checked.report.violations.retain(|v| !v.is_flow_violation());
        if !checked.report.is_empty() {
            return Err(GraphError::Invalid(checked.report));
        }
        Ok(Self::assemble(spec, checked.io))
    }

    fn assemble(spec: GraphSpec, io: Vec<u32>) -> Self {
        let n = spec.nodes.len();
        let mut nodes: Vec<Node> = spec
            .nodes
            .into_iter()
            .map(|s| Node {
                id: NodeId(s.id),
                // validation guarantees the restriction holds
                role: NodeRole::from_counts(s.required, s.released).expect("validated role"),
                aux: s.aux,
                io: io[s.id as usize],
                depth: s.depth,
            })
            .collect();
        nodes.sort_by_key(|n| n.id);

        let mut edges: Vec<Edge> = spec
            .edges
            .iter()
            .map(|e| Edge {
                from: NodeId(e.from),
                to: NodeId(e.to),
                flow: e.flow,
            })
            .collect();
        edges.sort();

        let mut out_start = vec![0u32; n + 1];
        for e in &edges {
            out_start[e.from.index() + 1] += 1;
        }
        for i in 0..n {
            out_start[i + 1] += out_start[i];
        }

        let mut in_start = vec![0u32; n + 1];
        for e in &edges {
            in_start[e.to.index() + 1] += 1;
        }
        for i in 0..n {
            in_start[i + 1] += in_start[i];
        }
        let mut fill = in_start.clone();
        let mut in_edges = vec![0u32; edges.len()];
        // edges are sorted by source, so each in-list comes out sorted by source
        for (idx, e) in edges.iter().enumerate() {
            let slot = &mut fill[e.to.index()];
            in_edges[*slot as usize] = idx as u32;
            *slot += 1;
        }

        let mut graph = ControlFlowGraph {
            nodes,
            edges,
            out_start,
            in_start,
            in_edges,
            ports: Vec::new(),
            topo: Vec::new(),
        };
        graph.ports = graph.conventional_ports();
        graph.topo = graph.kahn_order();
        graph
    }

    /// Outputs in order of target id, inputs in order of source id.
    fn conventional_ports(&self) -> Vec<(u32, u32)> {
        let mut ports = vec![(0, 0); self.edges.len()];
        for v in self.node_ids() {
            let base = self.out_start[v.index()] as usize;
            let mut offset = 0;
            for (k, e) in self.out_edges(v).iter().enumerate() {
                ports[base + k].0 = offset;
                offset += e.flow;
            }
            let mut offset = 0;
            for &e in self.in_edge_indices(v) {
                ports[e as usize].1 = offset;
                offset += self.edges[e as usize].flow;
            }
        }
        ports
    }

    fn kahn_order(&self) -> Vec<NodeId> {
        let n = self.nodes.len();
        let mut indeg: Vec<u32> = (0..n)
            .map(|v| self.in_start[v + 1] - self.in_start[v])
            .collect();
        let mut order = Vec::with_capacity(n);
        let mut stack: Vec<NodeId> = (0..n as u32)
            .rev()
            .map(NodeId)
            .filter(|v| indeg[v.index()] == 0)
            .collect();
        while let Some(v) = stack.pop() {
            order.push(v);
            for w in self.successors(v).collect::<Vec<_>>().into_iter().rev() {
                indeg[w.index()] -= 1;
                if indeg[w.index()] == 0 {
                    stack.push(w);
                }
            }
        }
        debug_assert_eq!(order.len(), n, "validated graph must be acyclic");
        order
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.nodes.len()
    }

    pub fn check(&self, v: NodeId) -> Result<(), GraphError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(v))
        }
    }

    #[inline]
    pub fn node(&self, v: NodeId) -> &Node {
        &self.nodes[v.index()]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    /// All edges, sorted by `(from, to)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Out-edges of `v`, sorted by target.
    #[inline]
    pub fn out_edges(&self, v: NodeId) -> &[Edge] {
        let i = v.index();
        &self.edges[self.out_start[i] as usize..self.out_start[i + 1] as usize]
    }

    /// Indices (into [`edges`](Self::edges)) of the in-edges of `v`, sorted by source.
    #[inline]
    pub fn in_edge_indices(&self, v: NodeId) -> &[u32] {
        let i = v.index();
        &self.in_edges[self.in_start[i] as usize..self.in_start[i + 1] as usize]
    }

    pub fn in_edges(&self, v: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.in_edge_indices(v)
            .iter()
            .map(move |&e| &self.edges[e as usize])
    }

    /// First output position at the source and first input position at
    /// the target of edge `e` (an index into [`edges`](Self::edges)).
    #[inline]
    pub(crate) fn ports(&self, e: usize) -> (u32, u32) {
        self.ports[e]
    }

    #[inline]
    pub fn successors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.out_edges(v).iter().map(|e| e.to)
    }

    #[inline]
    pub fn predecessors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.in_edges(v).map(|e| e.from)
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_edge_indices(v).len()
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_edges(v).len()
    }

    pub fn in_flow(&self, v: NodeId) -> u32 {
        self.in_edges(v).map(|e| e.flow).sum()
    }

    pub fn out_flow(&self, v: NodeId) -> u32 {
        self.out_edges(v).iter().map(|e| e.flow).sum()
    }

    /// A fixed topological order (Kahn, smallest id first).
    pub fn topological_order(&self) -> &[NodeId] {
        &self.topo
    }

    /// Total fresh-qubit requests over all nodes.
    pub fn total_requests(&self) -> u64 {
        self.nodes.iter().map(|n| n.requests() as u64).sum()
    }

    /// Raw description with every I/O count made explicit.
    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            nodes: self.nodes.iter().map(Node::to_spec).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    from: e.from.0,
                    to: e.to.0,
                    flow: e.flow,
                })
                .collect(),
        }
    }

    /// Subgraph induced by `members`, renumbered densely in ascending id
    /// order. Returns the subgraph and the local-to-global id map.
    ///
    /// Each node keeps its full I/O count; wires from outside the member set
    /// become program inputs of the subgraph.
    pub fn induced(&self, members: &[NodeId]) -> Result<(ControlFlowGraph, Vec<NodeId>), GraphError> {
        let mut global: Vec<NodeId> = members.to_vec();
        global.sort_unstable();
        global.dedup();
        for &g in &global {
            self.check(g)?;
        }
        // lookups by binary search keep the cost proportional to the block
        let local = |g: NodeId| global.binary_search(&g).ok().map(|i| i as u32);
        let mut spec = GraphSpec::new();
        let mut ports = Vec::new();
        for (i, &g) in global.iter().enumerate() {
            let mut s = self.node(g).to_spec();
            s.id = i as u32;
            spec.nodes.push(s);
            let base = self.out_start[g.index()] as usize;
            for (k, e) in self.out_edges(g).iter().enumerate() {
                if let Some(to) = local(e.to) {
                    spec.edges.push(EdgeSpec {
                        from: i as u32,
                        to,
                        flow: e.flow,
                    });
                    ports.push(self.ports[base + k]);
                }
            }
        }
        let mut sub = ControlFlowGraph::new_relaxed(spec)?;
        // edges were emitted in (from, to) order, matching the subgraph's
        // storage; cut wires keep their original positions
        sub.ports = ports;
        Ok((sub, global))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn role_restriction_is_enforced() {
        assert_eq!(NodeRole::from_counts(0, 0), Ok(NodeRole::Neutral));
        assert_eq!(NodeRole::from_counts(2, 0), Ok(NodeRole::Allocating(2)));
        assert_eq!(NodeRole::from_counts(0, 3), Ok(NodeRole::Releasing(3)));
        assert!(NodeRole::from_counts(1, 1).is_err());
    }

    #[test]
    fn matrix_must_be_square() {
        assert!(DepMatrix::new(vec![vec![Some(0), None], vec![Some(1)]]).is_err());
        let m = DepMatrix::new(vec![vec![Some(0), None], vec![Some(1), Some(2)]]).unwrap();
        assert_eq!(m.get(0, 1), None);
        assert_eq!(m.get(1, 0), Some(1));
        assert_eq!(m.rows().count(), 2);
        assert_eq!(DepMatrix::new(vec![]).unwrap().rows().count(), 0);
    }

    #[test]
    fn adjacency_is_sorted() {
        let mut spec = GraphSpec::new();
        for _ in 0..4 {
            spec.push(NodeSpec::neutral(0));
        }
        spec.edge(0, 3, 1).edge(0, 1, 1).edge(2, 3, 1).edge(1, 3, 1);
        spec.nodes[0].io = Some(2);
        spec.nodes[2].io = Some(1);
        let g = spec.build().unwrap();
        let succ: Vec<_> = g.successors(NodeId(0)).collect();
        assert_eq!(succ, vec![NodeId(1), NodeId(3)]);
        let pred: Vec<_> = g.predecessors(NodeId(3)).collect();
        assert_eq!(pred, vec![NodeId(0), NodeId(1), NodeId(2)]);
        assert_eq!(g.in_flow(NodeId(3)), 3);
        assert_eq!(g.node(NodeId(3)).io, 3);
        let topo = g.topological_order();
        assert_eq!(topo.len(), 4);
    }

    #[test]
    fn induced_subgraph_keeps_io() {
        let mut spec = GraphSpec::new();
        spec.push(NodeSpec::alloc(0, 2));
        spec.push(NodeSpec::neutral(0));
        spec.push(NodeSpec::release(0, 1));
        spec.edge(0, 1, 1).edge(0, 2, 1);
        let g = spec.build().unwrap();
        let (sub, map) = g.induced(&[NodeId(2), NodeId(1)]).unwrap();
        assert_eq!(map, vec![NodeId(1), NodeId(2)]);
        assert_eq!(sub.edges().len(), 0);
        assert_eq!(sub.node(NodeId(1)).role, NodeRole::Releasing(1));
        assert_eq!(sub.node(NodeId(0)).io, 1);
    }
}
