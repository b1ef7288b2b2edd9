//! Parameterized graph families for tests and benchmarks. Every generator is
//! a pure function of its parameters and produces a graph that validates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{ControlFlowGraph, DepMatrix, DepthDescriptor, GraphSpec, NodeId, NodeSpec};
use crate::hierarchy::{Block, BlockTree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid parameter {name}: {reason}")]
pub struct ParameterError {
    pub name: &'static str,
    pub reason: String,
}

fn positive(name: &'static str, value: usize) -> Result<(), ParameterError> {
    if value == 0 {
        Err(ParameterError {
            name,
            reason: "must be positive".into(),
        })
    } else {
        Ok(())
    }
}

/// Shares of allocating and releasing nodes; the rest are neutral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoleMix {
    pub allocating: f64,
    pub releasing: f64,
}

impl Default for RoleMix {
    fn default() -> Self {
        RoleMix {
            allocating: 0.2,
            releasing: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphFamily {
    FooChain {
        iterations: usize,
        body: usize,
        aux: u32,
    },
    RandomSparse {
        n: usize,
        density: f64,
        mix: RoleMix,
        seed: u64,
    },
    FanoutFanin {
        branches: usize,
        branch_len: usize,
    },
    SerialAllocDealloc {
        pairs: usize,
    },
}

/// A generated graph, with its natural partition where the family has one.
#[derive(Debug, Clone)]
pub struct Generated {
    pub graph: ControlFlowGraph,
    pub blocks: Option<BlockTree>,
}

pub fn generate(family: &GraphFamily) -> Result<Generated, ParameterError> {
    match *family {
        GraphFamily::FooChain {
            iterations,
            body,
            aux,
        } => foo_chain(iterations, body, aux).map(|(graph, tree)| Generated {
            graph,
            blocks: Some(tree),
        }),
        GraphFamily::RandomSparse {
            n,
            density,
            mix,
            seed,
        } => random_sparse(n, density, mix, seed).map(|graph| Generated {
            graph,
            blocks: None,
        }),
        GraphFamily::FanoutFanin {
            branches,
            branch_len,
        } => fanout_fanin(branches, branch_len).map(|(graph, tree)| Generated {
            graph,
            blocks: Some(tree),
        }),
        GraphFamily::SerialAllocDealloc { pairs } => {
            serial_alloc_dealloc(pairs).map(|(graph, tree)| Generated {
                graph,
                blocks: Some(tree),
            })
        }
    }
}

fn block(id: usize, nodes: std::ops::Range<u32>) -> Block {
    Block {
        id: id as u32,
        nodes: nodes.map(NodeId).collect(),
    }
}

/// A loop of `iterations` calls, each allocating `aux` scratch qubits,
/// running `body` operations on them and one threaded register, and
/// releasing the scratch qubits again. The register passes through the
/// release node into the next iteration. One block per iteration.
pub fn foo_chain(iterations: usize, body: usize, aux: u32) -> Result<(ControlFlowGraph, BlockTree), ParameterError> {
    positive("iterations", iterations)?;
    positive("body", body)?;
    positive("aux", aux as usize)?;
    let mut spec = GraphSpec::new();
    let mut blocks = Vec::with_capacity(iterations);
    let mut prev = None;
    for k in 0..iterations {
        let alloc = spec.push(NodeSpec::alloc(0, aux).with_io(if k == 0 { 1 } else { 0 }));
        let first = spec.push(NodeSpec::neutral(0));
        // the register arrives first, so it keeps local position 0 throughout
        if let Some(p) = prev {
            spec.edge(p, first, 1);
        }
        spec.edge(alloc, first, aux + u32::from(k == 0));
        let mut last = first;
        for _ in 1..body {
            let b = spec.push(NodeSpec::neutral(0));
            spec.edge(last, b, aux + 1);
            last = b;
        }
        let dealloc = spec.push(NodeSpec::release(0, aux));
        spec.edge(last, dealloc, aux + 1);
        blocks.push(block(k, alloc..dealloc + 1));
        prev = Some(dealloc);
    }
    let graph = spec.build().expect("foo chain is well-formed");
    Ok((graph, BlockTree { blocks }))
}

/// One register threaded through `pairs` allocate/release steps: each step
/// draws a qubit, uses it with the register and releases it.
pub fn serial_alloc_dealloc(pairs: usize) -> Result<(ControlFlowGraph, BlockTree), ParameterError> {
    positive("pairs", pairs)?;
    let mut spec = GraphSpec::new();
    let mut blocks = Vec::with_capacity(pairs);
    let mut prev = None;
    for k in 0..pairs {
        let a = spec.push(NodeSpec::alloc(0, 1).with_io(1));
        let d = spec.push(NodeSpec::release(0, 1));
        if let Some(p) = prev {
            spec.edge(p, a, 1);
        }
        spec.edge(a, d, 2);
        blocks.push(block(k, a..d + 1));
        prev = Some(d);
    }
    let graph = spec.build().expect("serial chain is well-formed");
    Ok((graph, BlockTree { blocks }))
}

/// A root fanning out to `branches` independent allocate/compute/release
/// branches of `branch_len` inner nodes, joined by a sink. Blocks: the
/// root, each branch, the sink.
pub fn fanout_fanin(branches: usize, branch_len: usize) -> Result<(ControlFlowGraph, BlockTree), ParameterError> {
    positive("branches", branches)?;
    let width = branches as u32;
    let mut spec = GraphSpec::new();
    let root = spec.push(NodeSpec::neutral(0).with_io(width));
    let mut blocks = vec![block(0, root..root + 1)];
    let mut tails = Vec::with_capacity(branches);
    for b in 0..branches {
        let a = spec.push(NodeSpec::alloc(0, 1));
        spec.edge(root, a, 1);
        let mut last = a;
        for _ in 0..branch_len {
            let n = spec.push(NodeSpec::neutral(0));
            spec.edge(last, n, 2);
            last = n;
        }
        let d = spec.push(NodeSpec::release(0, 1));
        spec.edge(last, d, 2);
        blocks.push(block(b + 1, a..d + 1));
        tails.push(d);
    }
    let sink = spec.push(NodeSpec::neutral(0));
    for d in tails {
        spec.edge(d, sink, 1);
    }
    blocks.push(block(branches + 1, sink..sink + 1));
    let graph = spec.build().expect("fan-out graph is well-formed");
    Ok((graph, BlockTree { blocks }))
}

const MAX_PARENTS: usize = 3;

/// Random sparse DAG built by simulating wires: every node takes qubits
/// from the open outputs of up to three earlier nodes (each parent tried
/// with probability `density`) and offers its own outputs to later nodes.
/// About a quarter of the nodes carry auxiliary qubits and every node gets
/// a random scalar or matrix depth descriptor.
pub fn random_sparse(n: usize, density: f64, mix: RoleMix, seed: u64) -> Result<ControlFlowGraph, ParameterError> {
    positive("n", n)?;
    if !(density > 0.0 && density <= 1.0) {
        return Err(ParameterError {
            name: "density",
            reason: format!("{density} is outside (0, 1]"),
        });
    }
    if mix.allocating < 0.0 || mix.releasing < 0.0 || mix.allocating + mix.releasing > 1.0 {
        return Err(ParameterError {
            name: "mix",
            reason: "shares must be non-negative and sum to at most 1".into(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = GraphSpec::new();
    let mut open: Vec<u32> = Vec::with_capacity(n);
    let mut with_open: Vec<u32> = Vec::new();

    for v in 0..n as u32 {
        let mut incoming = 0u32;
        let mut parents: Vec<u32> = Vec::new();
        for _ in 0..MAX_PARENTS {
            with_open.retain(|&u| open[u as usize] > 0);
            if with_open.is_empty() || !rng.gen_bool(density) {
                continue;
            }
            let u = with_open[rng.gen_range(0..with_open.len())];
            if parents.contains(&u) {
                continue;
            }
            let take = rng.gen_range(1..=open[u as usize].min(2));
            open[u as usize] -= take;
            spec.edge(u, v, take);
            incoming += take;
            parents.push(u);
        }

        let r: f64 = rng.gen();
        let mut node = if r < mix.allocating {
            NodeSpec::alloc(0, rng.gen_range(1..=2))
        } else if r < mix.allocating + mix.releasing && incoming > 0 {
            NodeSpec::release(0, rng.gen_range(1..=incoming.min(2)))
        } else {
            NodeSpec::neutral(0)
        };
        let io = if incoming == 0 {
            rng.gen_range(0..=1)
        } else {
            incoming - node.released
        };
        node.io = Some(io);
        if rng.gen_bool(0.25) {
            node.aux = rng.gen_range(1..=2);
        }
        let qubits = (io + node.required + node.released + node.aux) as usize;
        node.depth = Some(random_depth(&mut rng, qubits));
        spec.push(node);

        let outputs = io + spec.nodes[v as usize].required;
        open.push(outputs);
        if outputs > 0 {
            with_open.push(v);
        }
    }
    Ok(spec.build().expect("wire simulation keeps flows consistent"))
}

fn random_depth(rng: &mut ChaCha8Rng, qubits: usize) -> DepthDescriptor {
    if qubits == 0 || rng.gen_bool(0.5) {
        return DepthDescriptor::Scalar(rng.gen_range(0..=3));
    }
    let rows = (0..qubits)
        .map(|i| {
            (0..qubits)
                .map(|j| {
                    if i == j {
                        Some(rng.gen_range(0..=3))
                    } else if rng.gen_bool(0.6) {
                        Some(rng.gen_range(0..=4))
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();
    DepthDescriptor::Matrix(DepMatrix::new(rows).expect("rows are square"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn foo_chain_shape() {
        let (g, tree) = foo_chain(3, 1, 1).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(tree.blocks.len(), 3);
        assert!(tree.blocks.iter().all(|b| b.nodes.len() == 3));
        assert!(tree.assignment(&g).is_ok());
    }

    #[test]
    fn random_is_deterministic() {
        let a = random_sparse(10, 0.7, RoleMix::default(), 42).unwrap();
        let b = random_sparse(10, 0.7, RoleMix::default(), 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(random_sparse(1, 0.5, RoleMix::default(), 1).unwrap().len(), 1);
    }

    #[test]
    fn bad_parameters() {
        assert!(foo_chain(0, 1, 1).is_err());
        assert!(random_sparse(5, 0.0, RoleMix::default(), 0).is_err());
        let mix = RoleMix {
            allocating: 0.8,
            releasing: 0.5,
        };
        assert!(random_sparse(5, 0.5, mix, 0).is_err());
        assert!(serial_alloc_dealloc(0).is_err());
    }

    #[test]
    fn random_graphs_validate_across_seeds() {
        for seed in 0..200 {
            let g = random_sparse(1 + (seed as usize % 30), 0.8, RoleMix::default(), seed).unwrap();
            let max_out = g.node_ids().map(|v| g.out_degree(v)).sum::<usize>() as f64 / g.len() as f64;
            assert!(max_out <= MAX_PARENTS as f64);
        }
    }
}
