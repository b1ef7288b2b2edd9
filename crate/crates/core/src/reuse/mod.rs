//! Qubit reuse: walks a topological order and binds released qubits to later
//! fresh-qubit requests.
//!
//! Every node's requests (required and auxiliary qubits) are offered the
//! current pool of released qubits; the [`Strategy`] decides which entries
//! to take. Requests left unbound draw fresh device qubits, so
//! `width = total requests - bindings`. After binding, the node's released
//! and auxiliary qubits join the pool, each annotated with the depth at which
//! it was freed.

mod depth;
mod pool;
mod replay;
mod strategy;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ControlFlowGraph, Node, NodeId};
use crate::reach::ReachIndex;
use crate::sort::{SortError, SortResult};
use crate::wires::{WireLayout, WireSource};

pub use depth::{post_deps, PathSemantics};
pub use pool::{PoolEntry, ReusePool};
pub use replay::{compute_metrics, compute_metrics_with, Device, IntegrityError, Metrics};
pub use strategy::{bind_dependency_preserving, bind_depth_preserving, bind_greedy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlotKind {
    Required,
    Released,
    AuxIn,
    AuxOut,
}

impl SlotKind {
    /// Whether slots of this kind draw qubits (as opposed to freeing them).
    pub fn is_request(self) -> bool {
        matches!(self, SlotKind::Required | SlotKind::AuxIn)
    }
}

/// One qubit of a node's role or auxiliary set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(NodeId, u32, SlotKind)", into = "(NodeId, u32, SlotKind)")]
pub struct QubitSlot {
    pub node: NodeId,
    pub index: u32,
    pub kind: SlotKind,
}

impl From<(NodeId, u32, SlotKind)> for QubitSlot {
    fn from((node, index, kind): (NodeId, u32, SlotKind)) -> Self {
        QubitSlot { node, index, kind }
    }
}

impl From<QubitSlot> for (NodeId, u32, SlotKind) {
    fn from(s: QubitSlot) -> Self {
        (s.node, s.index, s.kind)
    }
}

impl fmt::Display for QubitSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            SlotKind::Required => "required",
            SlotKind::Released => "released",
            SlotKind::AuxIn => "aux-in",
            SlotKind::AuxOut => "aux-out",
        };
        write!(f, "{}:{}#{}", self.node, kind, self.index)
    }
}

impl QubitSlot {
    pub fn new(node: NodeId, index: u32, kind: SlotKind) -> Self {
        QubitSlot { node, index, kind }
    }

    /// Position of this slot in the node's local qubit space, or `None` if
    /// the node has no such slot.
    pub fn position(&self, node: &Node) -> Option<usize> {
        let (count, offset) = match self.kind {
            SlotKind::Required => (node.required(), node.io),
            SlotKind::Released => (node.released(), node.io),
            SlotKind::AuxIn | SlotKind::AuxOut => (node.aux, node.io + node.role_qubits()),
        };
        (self.index < count).then_some((offset + self.index) as usize)
    }
}

/// Requesting slots of a node: required ones, then aux-in.
pub fn request_slots(node: &Node) -> impl Iterator<Item = QubitSlot> + '_ {
    let required = (0..node.required()).map(|k| QubitSlot::new(node.id, k, SlotKind::Required));
    let aux = (0..node.aux).map(|k| QubitSlot::new(node.id, k, SlotKind::AuxIn));
    required.chain(aux)
}

/// Slots a node hands to the pool: released ones, then aux-out.
pub fn release_slots(node: &Node) -> impl Iterator<Item = QubitSlot> + '_ {
    let released = (0..node.released()).map(|k| QubitSlot::new(node.id, k, SlotKind::Released));
    let aux = (0..node.aux).map(|k| QubitSlot::new(node.id, k, SlotKind::AuxOut));
    released.chain(aux)
}

/// A released qubit recycled into a later request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReuseBinding {
    pub from: QubitSlot,
    pub to: QubitSlot,
}

/// Which pool entries a request may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Strategy {
    /// Never bind; every request draws a fresh qubit.
    NoReuse,
    /// Take every available entry, first released first.
    #[default]
    Greedy,
    /// Only take entries released by an ancestor of the requesting node.
    DependencyPreserving,
    /// Only take entries that leave the node's output depths unchanged.
    DepthPreserving,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::NoReuse,
        Strategy::Greedy,
        Strategy::DependencyPreserving,
        Strategy::DepthPreserving,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::NoReuse => "none",
            Strategy::Greedy => "greedy",
            Strategy::DependencyPreserving => "dependency",
            Strategy::DepthPreserving => "depth",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown strategy {0:?}, expected one of none, greedy, dependency, depth")]
pub struct UnknownStrategy(pub String);

impl FromStr for Strategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReuseOptions {
    pub strategy: Strategy,
    pub semantics: PathSemantics,
}

impl From<Strategy> for ReuseOptions {
    fn from(strategy: Strategy) -> Self {
        ReuseOptions {
            strategy,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReuseError {
    #[error("invalid order: {0}")]
    Order(#[from] SortError),
    #[error("node {0} has no depth descriptor, required by the depth-preserving strategy")]
    MissingDepth(NodeId),
}

/// A sort plus reuse bindings and the metrics they produce.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct Schedule {
    pub order: SortResult,
    /// Sorted by the requesting slot's position in the walk.
    pub bindings: Vec<ReuseBinding>,
    pub width: u64,
    pub depth: u64,
}

#[derive(Serialize, Deserialize)]
struct ScheduleRepr {
    order: Vec<NodeId>,
    bindings: Vec<ReuseBinding>,
    width: u64,
    depth: u64,
}

impl TryFrom<ScheduleRepr> for Schedule {
    type Error = SortError;

    fn try_from(r: ScheduleRepr) -> Result<Self, SortError> {
        Ok(Schedule {
            order: SortResult::from_order(r.order)?,
            bindings: r.bindings,
            width: r.width,
            depth: r.depth,
        })
    }
}

impl From<Schedule> for ScheduleRepr {
    fn from(s: Schedule) -> Self {
        ScheduleRepr {
            order: s.order.order().to_vec(),
            bindings: s.bindings,
            width: s.width,
            depth: s.depth,
        }
    }
}

impl Schedule {
    /// Device qubit of every slot, reconstructed by replaying the schedule.
    pub fn device_assignment(
        &self,
        graph: &ControlFlowGraph,
    ) -> Result<std::collections::BTreeMap<QubitSlot, Device>, IntegrityError> {
        compute_metrics(self, graph).map(|m| m.devices)
    }
}

/// Checks the depth-preserving strategy's precondition.
pub fn check_depth_data(graph: &ControlFlowGraph) -> Result<(), ReuseError> {
    match graph.nodes().iter().find(|n| n.depth.is_none()) {
        Some(n) => Err(ReuseError::MissingDepth(n.id)),
        None => Ok(()),
    }
}

/// Walks `sort` binding pool entries to requests under `options.strategy`.
pub fn apply_reuse(
    graph: &ControlFlowGraph,
    sort: &SortResult,
    options: &ReuseOptions,
) -> Result<Schedule, ReuseError> {
    sort.check_against(graph)?;
    if options.strategy == Strategy::DepthPreserving {
        check_depth_data(graph)?;
    }
    let reach = match options.strategy {
        Strategy::DependencyPreserving => {
            let sources: Vec<NodeId> = graph
                .nodes()
                .iter()
                .filter(|n| n.releases() > 0)
                .map(|n| n.id)
                .collect();
            Some(ReachIndex::ancestors_within(graph, &sources).expect("ids come from the graph"))
        }
        _ => None,
    };

    let layout = WireLayout::new(graph);
    let mut post = vec![0u64; layout.total_qubits()];
    let mut pool = ReusePool::new();
    let mut bindings = Vec::new();
    let mut pre = Vec::new();
    let mut out = Vec::new();
    let mut slots = Vec::new();
    let mut depth = 0u64;

    for &v in sort.order() {
        let node = graph.node(v);
        pre.clear();
        pre.resize(node.qubit_count() as usize, 0);
        for (i, src) in layout.inputs(v).iter().enumerate() {
            if let WireSource::Node { node: u, output } = *src {
                pre[i] = post[layout.qubit_base(u) + output as usize];
            }
        }

        slots.clear();
        slots.extend(request_slots(node));
        if !slots.is_empty() {
            let bound = match options.strategy {
                Strategy::NoReuse => Vec::new(),
                Strategy::Greedy => bind_greedy(&mut pool, &slots),
                Strategy::DependencyPreserving => {
                    bind_dependency_preserving(&mut pool, &slots, reach.as_ref().unwrap())
                }
                Strategy::DepthPreserving => {
                    bind_depth_preserving(&mut pool, &slots, node, &pre, options.semantics)
                }
            };
            for (b, post_dep) in bound {
                let pos = b.to.position(node).expect("request slot of this node");
                pre[pos] = post_dep;
                bindings.push(b);
            }
        }

        post_deps(&node.effective_depth(), &pre, options.semantics, &mut out);
        let base = layout.qubit_base(v);
        post[base..base + out.len()].copy_from_slice(&out);
        depth = out.iter().copied().fold(depth, u64::max);

        for slot in release_slots(node) {
            let pos = slot.position(node).expect("release slot of this node");
            pool.push(PoolEntry {
                slot,
                post_dep: out[pos],
            });
        }
    }

    let width = graph.total_requests() - bindings.len() as u64;
    sort_bindings(&mut bindings, sort);
    Ok(Schedule {
        order: sort.clone(),
        bindings,
        width,
        depth,
    })
}

/// Canonical binding order: by the requesting node's position, then slot.
pub(crate) fn sort_bindings(bindings: &mut [ReuseBinding], sort: &SortResult) {
    bindings.sort_by_key(|b| (sort.position(b.to.node), b.to.kind, b.to.index));
}

