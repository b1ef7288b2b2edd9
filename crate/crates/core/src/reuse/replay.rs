//! Independent replay of a schedule: checks binding integrity, assigns
//! device qubits and recomputes width and depth.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::graph::ControlFlowGraph;
use crate::sort::SortError;
use crate::wires::{WireLayout, WireSource};

use super::depth::{post_deps, PathSemantics};
use super::{release_slots, request_slots, PoolEntry, QubitSlot, Schedule};

/// A physical qubit: drawn fresh from the device, or a program input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Device {
    /// The k-th fresh draw of the schedule.
    Fresh(u32),
    /// The k-th program input wire met during the walk.
    External(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntegrityError {
    #[error("invalid order: {0}")]
    Order(#[from] SortError),
    #[error("slot {0} does not exist or has the wrong kind for its side of a binding")]
    InvalidSlot(QubitSlot),
    #[error("slot {0} is bound to its own node")]
    SelfBinding(QubitSlot),
    #[error("request slot {0} is bound more than once")]
    BoundTwice(QubitSlot),
    #[error("released slot {0} is recycled more than once")]
    UsedTwice(QubitSlot),
    #[error("slot {from} is recycled into {to} before it is released")]
    NotYetReleased { from: QubitSlot, to: QubitSlot },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metrics {
    /// Number of fresh device qubits drawn.
    pub width: u64,
    pub depth: u64,
    /// Device behind every request and release slot.
    pub devices: BTreeMap<QubitSlot, Device>,
    /// `draws[k]` is the request slot that drew `Device::Fresh(k)`.
    pub draws: Vec<QubitSlot>,
    /// Released qubits never recycled, in release order.
    pub end_pool: Vec<(PoolEntry, Device)>,
}

/// Replays `schedule` with longest-path depth semantics.
pub fn compute_metrics(schedule: &Schedule, graph: &ControlFlowGraph) -> Result<Metrics, IntegrityError> {
    compute_metrics_with(schedule, graph, PathSemantics::Longest)
}

pub fn compute_metrics_with(
    schedule: &Schedule,
    graph: &ControlFlowGraph,
    semantics: PathSemantics,
) -> Result<Metrics, IntegrityError> {
    let order = &schedule.order;
    order.check_against(graph)?;

    let valid = |s: &QubitSlot, request: bool| {
        graph.contains(s.node) && s.kind.is_request() == request && s.position(graph.node(s.node)).is_some()
    };
    let mut source_of = HashMap::with_capacity(schedule.bindings.len());
    let mut used = HashSet::with_capacity(schedule.bindings.len());
    for b in &schedule.bindings {
        if !valid(&b.from, false) {
            return Err(IntegrityError::InvalidSlot(b.from));
        }
        if !valid(&b.to, true) {
            return Err(IntegrityError::InvalidSlot(b.to));
        }
        if b.from.node == b.to.node {
            return Err(IntegrityError::SelfBinding(b.to));
        }
        if source_of.insert(b.to, b.from).is_some() {
            return Err(IntegrityError::BoundTwice(b.to));
        }
        if !used.insert(b.from) {
            return Err(IntegrityError::UsedTwice(b.from));
        }
    }

    let layout = WireLayout::new(graph);
    let mut post = vec![0u64; layout.total_qubits()];
    let mut dev = vec![Device::External(0); layout.total_qubits()];
    let mut released: Vec<(PoolEntry, Device)> = Vec::new();
    let mut available: HashMap<QubitSlot, usize> = HashMap::new();
    let mut consumed: Vec<bool> = Vec::new();
    let mut devices = BTreeMap::new();
    let mut draws = Vec::new();
    let mut external = 0u32;
    let mut depth = 0u64;
    let mut pre = Vec::new();
    let mut out = Vec::new();

    for &v in order.order() {
        let node = graph.node(v);
        let base = layout.qubit_base(v);
        pre.clear();
        pre.resize(node.qubit_count() as usize, 0);
        for (i, src) in layout.inputs(v).iter().enumerate() {
            match *src {
                WireSource::External => {
                    dev[base + i] = Device::External(external);
                    external += 1;
                }
                WireSource::Node { node: u, output } => {
                    let q = layout.qubit_base(u) + output as usize;
                    pre[i] = post[q];
                    dev[base + i] = dev[q];
                }
            }
        }
        for slot in request_slots(node) {
            let pos = slot.position(node).expect("request slot of this node");
            let d = match source_of.get(&slot) {
                Some(from) => {
                    let idx = available
                        .remove(from)
                        .ok_or(IntegrityError::NotYetReleased { from: *from, to: slot })?;
                    consumed[idx] = true;
                    pre[pos] = released[idx].0.post_dep;
                    released[idx].1
                }
                None => {
                    draws.push(slot);
                    Device::Fresh(draws.len() as u32 - 1)
                }
            };
            dev[base + pos] = d;
            devices.insert(slot, d);
        }

        post_deps(&node.effective_depth(), &pre, semantics, &mut out);
        post[base..base + out.len()].copy_from_slice(&out);
        depth = out.iter().copied().fold(depth, u64::max);

        for slot in release_slots(node) {
            let pos = slot.position(node).expect("release slot of this node");
            let d = dev[base + pos];
            devices.insert(slot, d);
            available.insert(slot, released.len());
            released.push((PoolEntry { slot, post_dep: out[pos] }, d));
            consumed.push(false);
        }
    }

    let end_pool = released
        .into_iter()
        .zip(consumed)
        .filter(|(_, c)| !c)
        .map(|(e, _)| e)
        .collect();
    Ok(Metrics {
        width: draws.len() as u64,
        depth,
        devices,
        draws,
        end_pool,
    })
}
