//! Worked example graphs and brute-force oracles shared by the integration
//! tests. Nothing here calls into the passes under test.

#![allow(dead_code)]

use qrecycle_core::gen::{self, RoleMix};
use qrecycle_core::reuse::{QubitSlot, ReuseBinding, SlotKind};
use qrecycle_core::{ControlFlowGraph, GraphSpec, NodeId, NodeSpec};

pub fn ids(xs: &[u32]) -> Vec<NodeId> {
    xs.iter().map(|&x| NodeId(x)).collect()
}

/// A allocates five qubits that fan out to B, C, D, E; C feeds the release
/// F and, with D, the one-qubit allocation G.
///
/// Ids: A 0, B 1, C 2, D 3, E 4, F 5, G 6.
pub fn release_then_allocate() -> ControlFlowGraph {
    release_then_allocate_spec().build().unwrap()
}

pub fn release_then_allocate_spec() -> GraphSpec {
    let mut spec = GraphSpec::new();
    spec.push(NodeSpec::alloc(0, 5));
    for _ in 0..4 {
        spec.push(NodeSpec::neutral(0));
    }
    spec.push(NodeSpec::release(0, 1));
    spec.push(NodeSpec::alloc(0, 1));
    spec.edge(0, 1, 1)
        .edge(0, 2, 2)
        .edge(0, 3, 1)
        .edge(0, 4, 1)
        .edge(1, 4, 1)
        .edge(2, 5, 1)
        .edge(2, 6, 1)
        .edge(3, 6, 1);
    spec
}

/// The same shape with F and G neutral, each using one auxiliary qubit.
pub fn auxiliary_pair() -> ControlFlowGraph {
    let mut spec = release_then_allocate_spec();
    spec.nodes[5] = NodeSpec::neutral(5).with_aux(1);
    spec.nodes[6] = NodeSpec::neutral(6).with_aux(1);
    spec.build().unwrap()
}

pub const LETTERS: &str = "ABCDEFGHIJKLMNOPQRSTUVWXY";

pub fn letter(c: char) -> NodeId {
    NodeId(LETTERS.find(c).unwrap() as u32)
}

/// Three releasing nodes D, N and Y with partly shared ancestries; A..Y in
/// letter order.
pub fn three_releases() -> ControlFlowGraph {
    let alloc: &[(char, u32)] = &[('A', 8), ('E', 1), ('G', 1), ('H', 1), ('J', 1), ('U', 1), ('W', 1)];
    let release = "DLNTY";
    let mut spec = GraphSpec::new();
    for c in LETTERS.chars() {
        let node = match alloc.iter().find(|(a, _)| *a == c) {
            Some(&(_, q)) => NodeSpec::alloc(0, q),
            None if release.contains(c) => NodeSpec::release(0, 1),
            None => NodeSpec::neutral(0),
        };
        spec.push(node);
    }
    let edges = [
        ("AB", 8),
        ("BC", 5),
        ("BD", 3),
        ("CE", 3),
        ("CF", 1),
        ("CG", 1),
        ("DH", 1),
        ("DI", 1),
        ("IJ", 1),
        ("JM", 1),
        ("HK", 2),
        ("KL", 2),
        ("LM", 1),
        ("EN", 3),
        ("EO", 1),
        ("NP", 2),
        ("PQ", 1),
        ("QR", 1),
        ("RS", 1),
        ("ST", 1),
        ("OU", 1),
        ("UV", 1),
        ("PV", 1),
        ("VT", 1),
        ("MR", 1),
        ("WX", 1),
        ("XY", 1),
    ];
    for (e, flow) in edges {
        let mut cs = e.chars();
        let (a, b) = (cs.next().unwrap(), cs.next().unwrap());
        spec.edge(letter(a).0, letter(b).0, flow);
    }
    spec.build().unwrap()
}

/// A neutral source feeding a one-qubit allocation B and a one-qubit
/// release C.
pub fn split_register() -> ControlFlowGraph {
    let mut spec = GraphSpec::new();
    spec.push(NodeSpec::neutral(0).with_io(2));
    spec.push(NodeSpec::alloc(0, 1));
    spec.push(NodeSpec::release(0, 1));
    spec.edge(0, 1, 1).edge(0, 2, 1);
    spec.build().unwrap()
}

/// Random graph with at most `max_n` nodes; parameters vary with the seed.
pub fn random_small(seed: u64, max_n: usize) -> ControlFlowGraph {
    let n = 1 + (seed as usize * 7919) % max_n;
    let density = [0.5, 0.75, 1.0][(seed % 3) as usize];
    gen::random_sparse(n, density, RoleMix::default(), seed).unwrap()
}

/// `m[u][v]` iff a path of length at least one leads from `u` to `v`.
#[allow(clippy::needless_range_loop)]
pub fn reachability_matrix(graph: &ControlFlowGraph) -> Vec<Vec<bool>> {
    let n = graph.len();
    let mut m = vec![vec![false; n]; n];
    for e in graph.edges() {
        m[e.from.index()][e.to.index()] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
    m
}

pub fn is_topological(graph: &ControlFlowGraph, order: &[NodeId]) -> bool {
    let mut pos = vec![usize::MAX; graph.len()];
    for (i, v) in order.iter().enumerate() {
        if v.index() >= graph.len() || pos[v.index()] != usize::MAX {
            return false;
        }
        pos[v.index()] = i;
    }
    order.len() == graph.len() && graph.edges().iter().all(|e| pos[e.from.index()] < pos[e.to.index()])
}

/// Every topological order, by exhaustive backtracking.
pub fn all_topological_orders(graph: &ControlFlowGraph) -> Vec<Vec<NodeId>> {
    fn go(graph: &ControlFlowGraph, indeg: &mut [usize], cur: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        if cur.len() == graph.len() {
            out.push(cur.clone());
            return;
        }
        for v in graph.node_ids() {
            if indeg[v.index()] == 0 && !cur.contains(&v) {
                for w in graph.successors(v) {
                    indeg[w.index()] -= 1;
                }
                cur.push(v);
                go(graph, indeg, cur, out);
                cur.pop();
                for w in graph.successors(v) {
                    indeg[w.index()] += 1;
                }
            }
        }
    }
    let mut indeg: Vec<usize> = graph.node_ids().map(|v| graph.in_degree(v)).collect();
    let mut out = Vec::new();
    go(graph, &mut indeg, &mut Vec::new(), &mut out);
    out
}

/// Greedy width of an order computed from qubit counts alone.
pub fn counted_greedy_width(graph: &ControlFlowGraph, order: &[NodeId]) -> u64 {
    let (mut pool, mut width) = (0u64, 0u64);
    for &v in order {
        let node = graph.node(v);
        let want = node.required() as u64 + node.aux as u64;
        let got = pool.min(want);
        width += want - got;
        pool = pool - got + node.released() as u64 + node.aux as u64;
    }
    width
}

/// Sum of required plus auxiliary qubits over the live ancestry of `v`.
pub fn recompute_cost(graph: &ControlFlowGraph, live: &[bool], v: NodeId) -> u64 {
    let mut seen = vec![false; graph.len()];
    let mut stack = vec![v];
    seen[v.index()] = true;
    let mut total = 0;
    while let Some(u) = stack.pop() {
        let node = graph.node(u);
        total += node.required() as u64 + node.aux as u64;
        for p in graph.predecessors(u) {
            if live[p.index()] && !seen[p.index()] {
                seen[p.index()] = true;
                stack.push(p);
            }
        }
    }
    total
}

/// Live releasing nodes without a live releasing strict ancestor.
pub fn oracle_frontier(graph: &ControlFlowGraph, live: &[bool]) -> Vec<NodeId> {
    let reach = reachability_matrix(graph);
    let releasing = |v: NodeId| live[v.index()] && graph.node(v).role.is_releasing();
    graph
        .node_ids()
        .filter(|&v| releasing(v))
        .filter(|&v| !graph.node_ids().any(|u| releasing(u) && reach[u.index()][v.index()]))
        .collect()
}

/// Final depth of a walk under the longest-path recurrence, rebuilding the
/// wiring from the adjacency lists.
pub fn simulate_depth(graph: &ControlFlowGraph, order: &[NodeId], bindings: &[ReuseBinding]) -> u64 {
    let mut post: Vec<Vec<u64>> = vec![Vec::new(); graph.len()];
    let mut freed: std::collections::HashMap<QubitSlot, u64> = Default::default();
    let source = |slot: QubitSlot| bindings.iter().find(|b| b.to == slot).map(|b| b.from);
    let mut depth = 0;
    for &v in order {
        let node = graph.node(v);
        let (io, q, aux) = (node.io as usize, node.role_qubits() as usize, node.aux as usize);
        let size = io + q + aux;
        let mut pre = vec![0u64; size];
        let mut filled = 0;
        for e in graph.in_edges(v) {
            let offset: u32 = graph.out_edges(e.from).iter().take_while(|o| o.to != v).map(|o| o.flow).sum();
            for k in 0..e.flow {
                pre[filled] = post[e.from.index()][(offset + k) as usize];
                filled += 1;
            }
        }
        let requests = (0..node.required())
            .map(|k| (QubitSlot::new(v, k, SlotKind::Required), io + k as usize))
            .chain((0..node.aux).map(|k| (QubitSlot::new(v, k, SlotKind::AuxIn), io + q + k as usize)));
        for (slot, pos) in requests {
            if let Some(from) = source(slot) {
                pre[pos] = freed[&from];
            }
        }
        let desc = node.effective_depth();
        let out: Vec<u64> = (0..size)
            .map(|k| {
                (0..size)
                    .filter_map(|j| desc.dep(j, k).map(|d| pre[j] + d))
                    .max()
                    .unwrap()
            })
            .collect();
        depth = out.iter().copied().fold(depth, u64::max);
        for k in 0..node.released() {
            freed.insert(QubitSlot::new(v, k, SlotKind::Released), out[io + k as usize]);
        }
        for k in 0..node.aux {
            freed.insert(QubitSlot::new(v, k, SlotKind::AuxOut), out[io + q + k as usize]);
        }
        post[v.index()] = out;
    }
    depth
}
