//! Reference checks used by the test suite and the `oracle` subcommand.
//!
//! Both are deliberately naive and share no code with the passes they
//! check: the minimum-width search works on qubit counts alone, and the pool
//! replay rebuilds wiring straight from the adjacency lists.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{ControlFlowGraph, NodeId};
use crate::reuse::{QubitSlot, Schedule, SlotKind};
use crate::sort::SortResult;

/// Largest graph [`enumerate_min_width`] accepts.
pub const ENUMERATION_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("graph has {nodes} nodes, exhaustive search is limited to {limit}")]
pub struct TooLarge {
    pub nodes: usize,
    pub limit: usize,
}

/// Minimum greedy width over all topological orders, with an order that
/// achieves it.
///
/// Greedy reuse only depends on counts: at each node it binds
/// `min(pool, requests)`. The number of bindings made so far is
/// monotone in its own earlier value, so for every set of already emitted
/// nodes it is enough to keep the largest count reached; a dynamic program
/// over those sets covers every order.
pub fn enumerate_min_width(graph: &ControlFlowGraph) -> Result<(u64, SortResult), TooLarge> {
    let n = graph.len();
    if n > ENUMERATION_LIMIT {
        return Err(TooLarge {
            nodes: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let preds: Vec<u32> = graph
        .node_ids()
        .map(|v| graph.predecessors(v).fold(0, |m, p| m | 1 << p.0))
        .collect();
    let requests: Vec<u64> = graph.nodes().iter().map(|x| x.requests() as u64).collect();
    let releases: Vec<u64> = graph.nodes().iter().map(|x| x.releases() as u64).collect();

    let full = (1usize << n) - 1;
    let mut best: Vec<Option<u64>> = vec![None; full + 1];
    let mut parent = vec![usize::MAX; full + 1];
    best[0] = Some(0);
    // subsets only grow, so numeric order visits every subset after its parents
    for set in 0..=full {
        let Some(bound) = best[set] else { continue };
        let released: u64 = (0..n).filter(|&v| set & 1 << v != 0).map(|v| releases[v]).sum();
        for v in 0..n {
            if set & 1 << v != 0 || preds[v] as usize & !set != 0 {
                continue;
            }
            let next = set | 1 << v;
            let b = released.min(bound + requests[v]);
            if best[next].is_none_or(|old| b > old) {
                best[next] = Some(b);
                parent[next] = v;
            }
        }
    }

    let mut order = Vec::with_capacity(n);
    let mut set = full;
    while set != 0 {
        let v = parent[set];
        order.push(NodeId(v as u32));
        set &= !(1 << v);
    }
    order.reverse();
    let width = graph.total_requests() - best[full].unwrap_or(0);
    Ok((width, SortResult::from_order(order).expect("every node placed once")))
}

/// Time steps (walk positions) during which a device qubit was held.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub start: usize,
    /// `None` while still held at the end of the walk.
    pub end: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    /// Fresh device qubits drawn.
    pub width: u64,
    pub intervals: BTreeMap<u32, Vec<Interval>>,
    pub violations: Vec<String>,
}

/// Replays `schedule` against an explicit device pool and reports every
/// inconsistency instead of stopping at the first.
pub fn simulate_pool(schedule: &Schedule, graph: &ControlFlowGraph) -> ReplayReport {
    let mut report = ReplayReport::default();
    let order = schedule.order.order();
    if order.len() != graph.len() {
        report
            .violations
            .push(format!("order has {} nodes, graph has {}", order.len(), graph.len()));
        return report;
    }
    let mut step = vec![usize::MAX; graph.len()];
    for (t, &v) in order.iter().enumerate() {
        step[v.index()] = t;
    }
    for e in graph.edges() {
        if step[e.from.index()] >= step[e.to.index()] {
            report
                .violations
                .push(format!("edge {}->{} runs against the order", e.from, e.to));
        }
    }
    if !report.violations.is_empty() {
        return report;
    }

    let mut source: HashMap<QubitSlot, QubitSlot> = HashMap::new();
    let mut seen_from: HashMap<QubitSlot, usize> = HashMap::new();
    for b in &schedule.bindings {
        if source.insert(b.to, b.from).is_some() {
            report.violations.push(format!("slot {} is bound twice", b.to));
        }
        if seen_from.insert(b.from, 0).is_some() {
            report.violations.push(format!("slot {} is recycled twice", b.from));
        }
        if b.from.node == b.to.node {
            report.violations.push(format!("slot {} is bound to its own node", b.to));
        }
    }

    // device on each local qubit of each node; None marks a program input
    let mut local: Vec<Vec<Option<u32>>> = vec![Vec::new(); graph.len()];
    let mut free: HashMap<QubitSlot, Option<u32>> = HashMap::new();
    let mut open: HashMap<u32, usize> = HashMap::new();

    for (t, &v) in order.iter().enumerate() {
        let node = graph.node(v);
        let (io, q, aux) = (node.io as usize, node.role_qubits() as usize, node.aux as usize);
        let mut qubits: Vec<Option<u32>> = vec![None; io + q + aux];
        let mut filled = 0;
        for e in graph.in_edges(v) {
            let mut offset = 0;
            for o in graph.out_edges(e.from) {
                if o.to == v {
                    break;
                }
                offset += o.flow as usize;
            }
            for k in 0..e.flow as usize {
                if filled < node.inputs() as usize {
                    qubits[filled] = local[e.from.index()][offset + k];
                    filled += 1;
                }
            }
        }

        let requests = (0..node.required())
            .map(|k| (QubitSlot::new(v, k, SlotKind::Required), io + k as usize))
            .chain((0..node.aux).map(|k| (QubitSlot::new(v, k, SlotKind::AuxIn), io + q + k as usize)));
        for (slot, pos) in requests {
            let device = match source.get(&slot) {
                Some(from) => match free.remove(from) {
                    Some(d) => d,
                    None => {
                        report
                            .violations
                            .push(format!("slot {from} is not free when {slot} takes it"));
                        None
                    }
                },
                None => {
                    report.width += 1;
                    Some(report.width as u32 - 1)
                }
            };
            if let Some(d) = device {
                if open.insert(d, t).is_some() {
                    report.violations.push(format!("device {d} is drawn while still held"));
                }
                report.intervals.entry(d).or_default().push(Interval { start: t, end: None });
            }
            qubits[pos] = device;
        }

        let releases = (0..node.released())
            .map(|k| (QubitSlot::new(v, k, SlotKind::Released), io + k as usize))
            .chain((0..node.aux).map(|k| (QubitSlot::new(v, k, SlotKind::AuxOut), io + q + k as usize)));
        for (slot, pos) in releases {
            let device = qubits[pos];
            if let Some(d) = device {
                match open.remove(&d) {
                    Some(_) => {
                        if let Some(last) = report.intervals.get_mut(&d).and_then(|l| l.last_mut()) {
                            last.end = Some(t);
                        }
                    }
                    None => report.violations.push(format!("device {d} is released while not held")),
                }
            }
            free.insert(slot, device);
        }
        local[v.index()] = qubits;
    }

    for (d, list) in &report.intervals {
        for w in list.windows(2) {
            if w[0].end.is_none_or(|end| end >= w[1].start) {
                report.violations.push(format!("device {d} has overlapping uses"));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphSpec, NodeSpec};

    #[test]
    fn guard_refuses_large_graphs() {
        let mut spec = GraphSpec::new();
        for _ in 0..13 {
            spec.push(NodeSpec::neutral(0));
        }
        let g = spec.build().unwrap();
        assert_eq!(
            enumerate_min_width(&g).unwrap_err(),
            TooLarge {
                nodes: 13,
                limit: ENUMERATION_LIMIT
            }
        );
    }

    #[test]
    fn no_releases_means_every_order_draws_everything() {
        let mut spec = GraphSpec::new();
        spec.push(NodeSpec::alloc(0, 2));
        spec.push(NodeSpec::neutral(0));
        spec.push(NodeSpec::alloc(0, 1));
        spec.edge(0, 1, 2);
        let g = spec.build().unwrap();
        assert_eq!(enumerate_min_width(&g).unwrap().0, 3);
    }

    #[test]
    fn auxiliary_qubits_return_to_the_pool() {
        let mut spec = GraphSpec::new();
        spec.push(NodeSpec::alloc(0, 2));
        spec.push(NodeSpec::neutral(0).with_aux(1));
        spec.push(NodeSpec::alloc(0, 1));
        spec.edge(0, 1, 2);
        let g = spec.build().unwrap();
        let (w, order) = enumerate_min_width(&g).unwrap();
        assert_eq!(w, 3);
        assert!(order.position(NodeId(1)) < order.position(NodeId(2)));
    }

    #[test]
    fn empty_graph() {
        let g = GraphSpec::new().build().unwrap();
        let (w, order) = enumerate_min_width(&g).unwrap();
        assert_eq!(w, 0);
        assert!(order.is_empty());
        let s = Schedule {
            order,
            bindings: vec![],
            width: 0,
            depth: 0,
        };
        assert_eq!(simulate_pool(&s, &g), ReplayReport::default());
    }
}
