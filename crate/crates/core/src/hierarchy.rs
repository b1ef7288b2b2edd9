//! Partitioned solving.
//!
//! Each block of a [`BlockTree`] is solved on its own, then collapsed into a
//! composite node that draws what the block leaks, releases what it hands
//! back unconsumed, and carries the qubits it both draws and frees as
//! auxiliary qubits. The graph of composite nodes is solved like any other,
//! and its bindings are mapped back onto the slots of the block nodes.
//!
//! With `N` nodes in `P` equal blocks the quadratic sort runs on pieces of
//! size `N / P` plus one graph of size `P`, so the total is
//! `O(N^2 / P + P^2)`, smallest around `P ~ N^(2/3)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    ControlFlowGraph, DepthDescriptor, EdgeSpec, GraphError, GraphSpec, NodeId, NodeRole, NodeSpec,
};
use crate::pipeline::{solve, SolveOptions};
use crate::reuse::{
    compute_metrics_with, sort_bindings, Device, IntegrityError, QubitSlot, ReuseBinding, ReuseError,
    Schedule, SlotKind,
};
use crate::sort::SortResult;
use crate::validate::Violation;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub id: u32,
    pub nodes: Vec<NodeId>,
}

/// A partition of the graph's nodes into blocks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockTree {
    pub blocks: Vec<Block>,
}

impl BlockTree {
    /// One block holding every node.
    pub fn whole(graph: &ControlFlowGraph) -> Self {
        BlockTree {
            blocks: vec![Block {
                id: 0,
                nodes: graph.node_ids().collect(),
            }],
        }
    }

    /// One block per node.
    pub fn singletons(graph: &ControlFlowGraph) -> Self {
        BlockTree {
            blocks: graph
                .node_ids()
                .map(|v| Block {
                    id: v.0,
                    nodes: vec![v],
                })
                .collect(),
        }
    }

    /// Block index (into `blocks`) of every node, if this is a partition.
    pub fn assignment(&self, graph: &ControlFlowGraph) -> Result<Vec<usize>, PartitionError> {
        let mut ids = std::collections::HashSet::new();
        let mut owner = vec![usize::MAX; graph.len()];
        for (b, block) in self.blocks.iter().enumerate() {
            if !ids.insert(block.id) {
                return Err(PartitionError::DuplicateBlock(block.id));
            }
            if block.nodes.is_empty() {
                return Err(PartitionError::EmptyBlock(block.id));
            }
            for &v in &block.nodes {
                if !graph.contains(v) {
                    return Err(PartitionError::UnknownNode { block: block.id, node: v });
                }
                if owner[v.index()] != usize::MAX {
                    return Err(PartitionError::Overlap {
                        node: v,
                        first: self.blocks[owner[v.index()]].id,
                        second: block.id,
                    });
                }
                owner[v.index()] = b;
            }
        }
        match owner.iter().position(|&b| b == usize::MAX) {
            Some(v) => Err(PartitionError::Unassigned(NodeId(v as u32))),
            None => Ok(owner),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("block id {0} is used more than once")]
    DuplicateBlock(u32),
    #[error("block {0} has no nodes")]
    EmptyBlock(u32),
    #[error("block {block} lists unknown node {node}")]
    UnknownNode { block: u32, node: NodeId },
    #[error("node {node} belongs to both block {first} and block {second}")]
    Overlap { node: NodeId, first: u32, second: u32 },
    #[error("node {0} belongs to no block")]
    Unassigned(NodeId),
    #[error(
        "block {block} both draws {net_required} and releases {net_released} qubits; \
         split it so draws and releases land in different blocks"
    )]
    RoleRestriction {
        block: u32,
        net_required: u32,
        net_released: u32,
    },
    #[error("blocks {blocks:?} depend on each other cyclically; choose a partition along the data flow")]
    CyclicComposition { blocks: Vec<u32> },
    #[error("block {block}: {source}")]
    Block { block: u32, source: ReuseError },
    #[error("composed graph: {0}")]
    Composite(ReuseError),
    #[error("spliced schedule is inconsistent: {0}")]
    Integrity(#[from] IntegrityError),
    #[error("composed graph is malformed: {0}")]
    Graph(GraphError),
}

/// A solved block, seen from outside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSummary {
    /// Fresh qubits that leave the block still in use.
    pub net_required: u32,
    /// Incoming qubits the block releases and does not recycle itself.
    pub net_released: u32,
    /// Fresh qubits the block draws and hands back itself.
    pub aux: u32,
    /// Schedule of the block subgraph, in block-local ids.
    pub schedule: Schedule,
    required: Vec<QubitSlot>,
    aux_in: Vec<QubitSlot>,
    released: Vec<QubitSlot>,
    aux_out: Vec<QubitSlot>,
}

impl BlockSummary {
    pub fn role(&self) -> Option<NodeRole> {
        NodeRole::from_counts(self.net_required, self.net_released).ok()
    }

    /// Block-local slot standing behind slot `index` of kind `kind` of the
    /// composite node.
    pub fn inner_slot(&self, kind: SlotKind, index: u32) -> Option<QubitSlot> {
        let list = match kind {
            SlotKind::Required => &self.required,
            SlotKind::AuxIn => &self.aux_in,
            SlotKind::Released => &self.released,
            SlotKind::AuxOut => &self.aux_out,
        };
        list.get(index as usize).copied()
    }
}

/// Solves a block subgraph and classifies its fresh draws and unconsumed
/// releases.
pub fn summarize_block(block: &ControlFlowGraph, options: &SolveOptions) -> Result<BlockSummary, ReuseError> {
    let schedule = solve(block, options)?;
    let metrics = compute_metrics_with(&schedule, block, options.semantics)
        .expect("freshly built schedules are consistent");

    let returned: std::collections::HashSet<Device> =
        metrics.end_pool.iter().map(|(_, d)| *d).collect();
    let (mut required, mut aux_in) = (Vec::new(), Vec::new());
    for (k, &slot) in metrics.draws.iter().enumerate() {
        if returned.contains(&Device::Fresh(k as u32)) {
            aux_in.push(slot);
        } else {
            required.push(slot);
        }
    }
    let (mut released, mut aux_out) = (Vec::new(), Vec::new());
    for (entry, device) in &metrics.end_pool {
        match device {
            Device::External(_) => released.push(entry.slot),
            Device::Fresh(_) => aux_out.push(entry.slot),
        }
    }
    Ok(BlockSummary {
        net_required: required.len() as u32,
        net_released: released.len() as u32,
        aux: aux_in.len() as u32,
        schedule,
        required,
        aux_in,
        released,
        aux_out,
    })
}

/// Block count minimizing the partitioned running time, `round(n^(2/3))`
/// clamped to `[1, n]`.
pub fn suggest_partition_size(n: usize) -> usize {
    let p = (n as f64).cbrt().powi(2).round() as usize;
    p.clamp(1, n.max(1))
}

/// Solves every block, then the graph of composite block nodes, and splices
/// the results into one schedule of `graph`.
pub fn solve_partitioned(
    graph: &ControlFlowGraph,
    tree: &BlockTree,
    options: &SolveOptions,
) -> Result<Schedule, PartitionError> {
    let owner = tree.assignment(graph)?;
    if tree.blocks.len() == 1 {
        // nothing to compose, so the block's role is unconstrained
        return solve(graph, options).map_err(|source| PartitionError::Block {
            block: tree.blocks[0].id,
            source,
        });
    }
    let mut members: Vec<Vec<NodeId>> = vec![Vec::new(); tree.blocks.len()];
    for v in graph.node_ids() {
        members[owner[v.index()]].push(v);
    }

    let solved = options.execution.map(&members, |nodes| {
        let (sub, map) = graph.induced(nodes).expect("block members are graph nodes");
        summarize_block(&sub, options).map(|s| (s, map))
    });
    let mut leaves = Vec::with_capacity(solved.len());
    for (b, r) in solved.into_iter().enumerate() {
        let block = tree.blocks[b].id;
        let (summary, map) = r.map_err(|source| PartitionError::Block { block, source })?;
        if summary.net_required > 0 && summary.net_released > 0 {
            return Err(PartitionError::RoleRestriction {
                block,
                net_required: summary.net_required,
                net_released: summary.net_released,
            });
        }
        leaves.push((summary, map));
    }

    let composite = compose(graph, tree, &owner, &members, &leaves)?;
    let top = solve(&composite, options).map_err(PartitionError::Composite)?;

    let mut order = Vec::with_capacity(graph.len());
    for &c in top.order.order() {
        let (summary, map) = &leaves[c.index()];
        order.extend(summary.schedule.order.order().iter().map(|v| map[v.index()]));
    }
    let to_global = |b: usize, s: QubitSlot| QubitSlot {
        node: leaves[b].1[s.node.index()],
        ..s
    };
    let mut bindings = Vec::new();
    for (b, (summary, _)) in leaves.iter().enumerate() {
        bindings.extend(summary.schedule.bindings.iter().map(|x| ReuseBinding {
            from: to_global(b, x.from),
            to: to_global(b, x.to),
        }));
    }
    for x in &top.bindings {
        let inner = |s: QubitSlot| {
            let b = s.node.index();
            let slot = leaves[b]
                .0
                .inner_slot(s.kind, s.index)
                .expect("composite slots mirror block slots");
            to_global(b, slot)
        };
        bindings.push(ReuseBinding {
            from: inner(x.from),
            to: inner(x.to),
        });
    }

    let order = SortResult::from_order(order).expect("blocks partition the graph");
    sort_bindings(&mut bindings, &order);
    let mut schedule = Schedule {
        order,
        bindings,
        width: 0,
        depth: 0,
    };
    let metrics = compute_metrics_with(&schedule, graph, options.semantics)?;
    schedule.width = metrics.width;
    schedule.depth = metrics.depth;
    Ok(schedule)
}

/// Graph with one node per block; node `b` stands for `tree.blocks[b]`.
fn compose(
    graph: &ControlFlowGraph,
    tree: &BlockTree,
    owner: &[usize],
    members: &[Vec<NodeId>],
    leaves: &[(BlockSummary, Vec<NodeId>)],
) -> Result<ControlFlowGraph, PartitionError> {
    let mut flows: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    let mut in_flow = vec![0u32; members.len()];
    let mut out_flow = vec![0u32; members.len()];
    for e in graph.edges() {
        let (a, b) = (owner[e.from.index()], owner[e.to.index()]);
        if a != b {
            *flows.entry((a, b)).or_default() += e.flow;
            out_flow[a] += e.flow;
            in_flow[b] += e.flow;
        }
    }

    let mut spec = GraphSpec::new();
    for (b, (summary, _)) in leaves.iter().enumerate() {
        let (io, depth) = match members[b].as_slice() {
            [v] => {
                let node = graph.node(*v);
                (node.io, node.depth.clone())
            }
            _ => {
                let io = in_flow[b]
                    .saturating_sub(summary.net_released)
                    .max(out_flow[b].saturating_sub(summary.net_required));
                (io, Some(DepthDescriptor::Scalar(summary.schedule.depth)))
            }
        };
        spec.nodes.push(NodeSpec {
            id: b as u32,
            required: summary.net_required,
            released: summary.net_released,
            aux: summary.aux,
            io: Some(io),
            depth,
        });
    }
    spec.edges = flows
        .into_iter()
        .map(|((a, b), flow)| EdgeSpec {
            from: a as u32,
            to: b as u32,
            flow,
        })
        .collect();

    ControlFlowGraph::new_relaxed(spec).map_err(|e| match &e {
        GraphError::Invalid(report) => {
            for v in &report.violations {
                if let Violation::Cycle { nodes } = v {
                    return PartitionError::CyclicComposition {
                        blocks: nodes.iter().map(|n| tree.blocks[n.index()].id).collect(),
                    };
                }
            }
            PartitionError::Graph(e)
        }
        _ => PartitionError::Graph(e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_size_hint() {
        assert_eq!(suggest_partition_size(1), 1);
        assert_eq!(suggest_partition_size(1000), 100);
        assert_eq!(suggest_partition_size(8000), 400);
        assert_eq!(suggest_partition_size(2), 2);
    }

    fn split_register() -> ControlFlowGraph {
        let mut spec = GraphSpec::new();
        spec.push(NodeSpec::neutral(0).with_io(2));
        spec.push(NodeSpec::alloc(0, 1));
        spec.push(NodeSpec::release(0, 1));
        spec.edge(0, 1, 1).edge(0, 2, 1);
        spec.build().unwrap()
    }

    #[test]
    fn tree_must_partition() {
        let g = split_register();
        let tree = |blocks: Vec<(u32, Vec<u32>)>| BlockTree {
            blocks: blocks
                .into_iter()
                .map(|(id, n)| Block {
                    id,
                    nodes: n.into_iter().map(NodeId).collect(),
                })
                .collect(),
        };
        assert_eq!(
            tree(vec![(0, vec![0, 1])]).assignment(&g),
            Err(PartitionError::Unassigned(NodeId(2)))
        );
        assert!(matches!(
            tree(vec![(0, vec![0, 1]), (1, vec![1, 2])]).assignment(&g),
            Err(PartitionError::Overlap { node: NodeId(1), .. })
        ));
        assert_eq!(
            tree(vec![(4, vec![0]), (4, vec![1, 2])]).assignment(&g),
            Err(PartitionError::DuplicateBlock(4))
        );
        assert!(tree(vec![(0, vec![0, 1]), (1, vec![2])]).assignment(&g).is_ok());
    }

    #[test]
    fn mixed_block_is_rejected() {
        // node 2 releases the qubit arriving from node 1 and passes node 0's
        // fresh qubit on, so block {0, 2} leaks one qubit and frees another
        let mut spec = GraphSpec::new();
        spec.push(NodeSpec::alloc(0, 1));
        spec.push(NodeSpec::neutral(0).with_io(1));
        spec.push(NodeSpec::release(0, 1));
        spec.edge(0, 2, 1).edge(1, 2, 1);
        let g = spec.build().unwrap();
        let tree = BlockTree {
            blocks: vec![
                Block {
                    id: 7,
                    nodes: vec![NodeId(0), NodeId(2)],
                },
                Block {
                    id: 8,
                    nodes: vec![NodeId(1)],
                },
            ],
        };
        let err = solve_partitioned(&g, &tree, &SolveOptions::default()).unwrap_err();
        assert_eq!(
            err,
            PartitionError::RoleRestriction {
                block: 7,
                net_required: 1,
                net_released: 1
            }
        );
    }

    #[test]
    fn neutral_block_summarizes_to_nothing() {
        let mut spec = GraphSpec::new();
        spec.push(NodeSpec::neutral(0).with_io(1));
        spec.push(NodeSpec::neutral(0));
        spec.edge(0, 1, 1);
        let g = spec.build().unwrap();
        let s = summarize_block(&g, &SolveOptions::default()).unwrap();
        assert_eq!((s.net_required, s.net_released, s.aux), (0, 0, 0));
    }
}
