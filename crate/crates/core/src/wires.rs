//! Qubit-level wiring between nodes.
//!
//! Edges only carry qubit counts; this resolves them into individual wires
//! following the layout convention documented in [`crate::graph`]; block
//! subgraphs keep the positions their wires had in the full graph.

use crate::graph::{ControlFlowGraph, NodeId};

/// Where an input wire of a node comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireSource {
    /// A program input (or, in a block subgraph, a wire from another block).
    External,
    /// Output position `output` of `node`.
    Node { node: NodeId, output: u32 },
}

#[derive(Debug, Clone)]
pub struct WireLayout {
    input_base: Vec<u32>,
    inputs: Vec<WireSource>,
    qubit_base: Vec<u32>,
}

impl WireLayout {
    pub fn new(graph: &ControlFlowGraph) -> Self {
        let n = graph.len();
        let mut input_base = Vec::with_capacity(n + 1);
        let mut qubit_base = Vec::with_capacity(n + 1);
        let (mut acc_in, mut acc_q) = (0u32, 0u32);
        for node in graph.nodes() {
            input_base.push(acc_in);
            qubit_base.push(acc_q);
            acc_in += node.inputs();
            acc_q += node.qubit_count();
        }
        input_base.push(acc_in);
        qubit_base.push(acc_q);

        let mut inputs = vec![WireSource::External; acc_in as usize];
        for (idx, edge) in graph.edges().iter().enumerate() {
            let (out_at, in_at) = graph.ports(idx);
            let start = input_base[edge.to.index()] as usize;
            let cap = graph.node(edge.to).inputs();
            for t in 0..edge.flow.min(cap.saturating_sub(in_at)) {
                inputs[start + (in_at + t) as usize] = WireSource::Node {
                    node: edge.from,
                    output: out_at + t,
                };
            }
        }

        WireLayout {
            input_base,
            inputs,
            qubit_base,
        }
    }

    /// Sources of the input wires of `v`, indexed by local position.
    #[inline]
    pub fn inputs(&self, v: NodeId) -> &[WireSource] {
        let i = v.index();
        &self.inputs[self.input_base[i] as usize..self.input_base[i + 1] as usize]
    }

    /// Offset of `v`'s local qubit space in a flat per-qubit array.
    #[inline]
    pub fn qubit_base(&self, v: NodeId) -> usize {
        self.qubit_base[v.index()] as usize
    }

    /// Length of a flat per-qubit array covering every node.
    pub fn total_qubits(&self) -> usize {
        *self.qubit_base.last().unwrap_or(&0) as usize
    }
}
