//! Well-formedness checks for raw graph descriptions.
//!
//! Problems are collected, never thrown: [`validate`] returns every violation
//! it finds and an empty report means the graph can be built.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::graph::{DepthDescriptor, GraphSpec, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("node id {id} is outside 0..{len}")]
    IdOutOfRange { id: u32, len: usize },
    #[error("node id {id} declared more than once")]
    DuplicateId { id: u32 },
    #[error("edge {from}->{to} references an unknown node")]
    UnknownEndpoint { from: u32, to: u32 },
    #[error("edge {from}->{to} carries no qubits")]
    ZeroFlow { from: u32, to: u32 },
    #[error("edge {from}->{to} declared more than once")]
    DuplicateEdge { from: u32, to: u32 },
    #[error("cycle through nodes {nodes:?}")]
    Cycle { nodes: Vec<NodeId> },
    #[error("node {node} both requires {required} and releases {released} qubits")]
    RoleRestriction {
        node: NodeId,
        required: u32,
        released: u32,
    },
    #[error("node {node} releases {released} qubits but only {incoming} flow in")]
    ReleasesUnheld {
        node: NodeId,
        released: u32,
        incoming: u32,
    },
    #[error("node {node} receives {incoming} qubits, its declared inputs are {expected}")]
    InputMismatch {
        node: NodeId,
        incoming: u32,
        expected: u32,
    },
    #[error("node {node} sends {outgoing} qubits but holds only {available}")]
    OutputOverflow {
        node: NodeId,
        outgoing: u32,
        available: u32,
    },
    #[error("node {node} depth matrix is {found}x{found}, node has {expected} qubits")]
    MatrixShape {
        node: NodeId,
        expected: usize,
        found: usize,
    },
    #[error("node {node} depth matrix has no path from qubit {qubit} to itself")]
    MatrixDiagonal { node: NodeId, qubit: usize },
}

impl Violation {
    /// Violations of qubit-flow conservation, as opposed to structural ones.
    pub fn is_flow_violation(&self) -> bool {
        matches!(
            self,
            Violation::ReleasesUnheld { .. }
                | Violation::InputMismatch { .. }
                | Violation::OutputOverflow { .. }
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

pub(crate) struct Checked {
    pub report: ValidationReport,
    /// Effective I/O count per node id (0 where undeterminable).
    pub io: Vec<u32>,
}

/// Lists every problem with `spec`; empty iff the graph is well-formed.
pub fn validate(spec: &GraphSpec) -> ValidationReport {
    check(spec).report
}

pub(crate) fn check(spec: &GraphSpec) -> Checked {
    let n = spec.nodes.len();
    let mut violations = Vec::new();

    let mut slot: Vec<Option<usize>> = vec![None; n];
    for (pos, node) in spec.nodes.iter().enumerate() {
        let id = node.id as usize;
        if id >= n {
            violations.push(Violation::IdOutOfRange { id: node.id, len: n });
        } else if slot[id].is_some() {
            violations.push(Violation::DuplicateId { id: node.id });
        } else {
            slot[id] = Some(pos);
        }
    }

    let mut seen = HashSet::new();
    let mut in_flow = vec![0u32; n];
    let mut out_flow = vec![0u32; n];
    let mut has_in = vec![false; n];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for e in &spec.edges {
        let (from, to) = (e.from as usize, e.to as usize);
        if from >= n || to >= n || slot[from].is_none() || slot[to].is_none() {
            violations.push(Violation::UnknownEndpoint {
                from: e.from,
                to: e.to,
            });
            continue;
        }
        if e.flow == 0 {
            violations.push(Violation::ZeroFlow {
                from: e.from,
                to: e.to,
            });
        }
        if !seen.insert((e.from, e.to)) {
            violations.push(Violation::DuplicateEdge {
                from: e.from,
                to: e.to,
            });
            continue;
        }
        in_flow[to] += e.flow;
        out_flow[from] += e.flow;
        has_in[to] = true;
        succ[from].push(to);
        indeg[to] += 1;
    }

    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut done = 0;
    while let Some(v) = stack.pop() {
        done += 1;
        for &w in &succ[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                stack.push(w);
            }
        }
    }
    if done < n {
        let nodes = (0..n)
            .filter(|&v| indeg[v] > 0)
            .map(|v| NodeId(v as u32))
            .collect();
        violations.push(Violation::Cycle { nodes });
    }

    let mut io = vec![0u32; n];
    for (id, pos) in slot.iter().enumerate() {
        let Some(pos) = *pos else { continue };
        let node = &spec.nodes[pos];
        let nid = NodeId(id as u32);
        let (required, released) = (node.required, node.released);
        if required > 0 && released > 0 {
            violations.push(Violation::RoleRestriction {
                node: nid,
                required,
                released,
            });
        }

        let eff = if has_in[id] {
            match node.io {
                Some(declared) => {
                    if in_flow[id] != declared + released {
                        violations.push(Violation::InputMismatch {
                            node: nid,
                            incoming: in_flow[id],
                            expected: declared + released,
                        });
                    }
                    declared
                }
                None if in_flow[id] < released => {
                    violations.push(Violation::ReleasesUnheld {
                        node: nid,
                        released,
                        incoming: in_flow[id],
                    });
                    0
                }
                None => in_flow[id] - released,
            }
        } else {
            node.io.unwrap_or(out_flow[id].saturating_sub(required))
        };
        if out_flow[id] > eff + required {
            violations.push(Violation::OutputOverflow {
                node: nid,
                outgoing: out_flow[id],
                available: eff + required,
            });
        }
        io[id] = eff;

        if let Some(DepthDescriptor::Matrix(m)) = &node.depth {
            let expected = (eff + required + released + node.aux) as usize;
            if m.size() != expected {
                violations.push(Violation::MatrixShape {
                    node: nid,
                    expected,
                    found: m.size(),
                });
            } else if let Some(q) = (0..expected).find(|&q| m.get(q, q).is_none()) {
                violations.push(Violation::MatrixDiagonal { node: nid, qubit: q });
            }
        }
    }

    Checked {
        report: ValidationReport { violations },
        io,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{DepMatrix, NodeSpec};

    fn chain(spec: &mut GraphSpec, nodes: Vec<NodeSpec>, flows: &[u32]) {
        for n in nodes {
            spec.push(n);
        }
        for (i, &f) in flows.iter().enumerate() {
            spec.edge(i as u32, i as u32 + 1, f);
        }
    }

    #[test]
    fn two_cycle_is_reported() {
        let mut spec = GraphSpec::new();
        spec.push(NodeSpec::neutral(0).with_io(1));
        spec.push(NodeSpec::neutral(0).with_io(1));
        spec.edge(0, 1, 1).edge(1, 0, 1);
        let report = validate(&spec);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Cycle { nodes } if nodes.len() == 2)));
    }

    #[test]
    fn releasing_more_than_held() {
        let mut spec = GraphSpec::new();
        chain(
            &mut spec,
            vec![NodeSpec::alloc(0, 2), NodeSpec::release(0, 3)],
            &[2],
        );
        let report = validate(&spec);
        assert_eq!(
            report.violations,
            vec![Violation::ReleasesUnheld {
                node: NodeId(1),
                released: 3,
                incoming: 2
            }]
        );
    }

    #[test]
    fn output_overflow_and_input_mismatch() {
        let mut spec = GraphSpec::new();
        chain(
            &mut spec,
            vec![
                NodeSpec::alloc(0, 1).with_io(0),
                NodeSpec::neutral(0).with_io(2),
                NodeSpec::neutral(0),
            ],
            &[2, 1],
        );
        let report = validate(&spec);
        assert!(report.violations.contains(&Violation::OutputOverflow {
            node: NodeId(0),
            outgoing: 2,
            available: 1
        }));
        assert!(!report.violations.iter().any(|v| matches!(v, Violation::InputMismatch { .. })));

        let mut spec = GraphSpec::new();
        chain(
            &mut spec,
            vec![NodeSpec::alloc(0, 2), NodeSpec::neutral(0).with_io(3)],
            &[2],
        );
        assert_eq!(
            validate(&spec).violations,
            vec![Violation::InputMismatch {
                node: NodeId(1),
                incoming: 2,
                expected: 3
            }]
        );
    }

    #[test]
    fn structural_problems() {
        let mut spec = GraphSpec::new();
        spec.push(NodeSpec::alloc(0, 1));
        spec.push(NodeSpec::neutral(0));
        spec.nodes.push(NodeSpec::neutral(7));
        spec.nodes.push(NodeSpec::neutral(1));
        spec.edge(0, 1, 0).edge(0, 9, 1).edge(0, 1, 1);
        let report = validate(&spec);
        let kinds: Vec<_> = report.violations.iter().map(|v| v.to_string()).collect();
        assert!(report.violations.contains(&Violation::IdOutOfRange { id: 7, len: 4 }));
        assert!(report.violations.contains(&Violation::DuplicateId { id: 1 }));
        assert!(report.violations.contains(&Violation::ZeroFlow { from: 0, to: 1 }));
        assert!(report.violations.contains(&Violation::UnknownEndpoint { from: 0, to: 9 }));
        assert!(report.violations.contains(&Violation::DuplicateEdge { from: 0, to: 1 }), "{kinds:?}");
    }

    #[test]
    fn role_restriction_reported() {
        let mut spec = GraphSpec::new();
        let mut node = NodeSpec::alloc(0, 1);
        node.released = 1;
        spec.push(node);
        assert_eq!(
            validate(&spec).violations,
            vec![Violation::RoleRestriction {
                node: NodeId(0),
                required: 1,
                released: 1
            }]
        );
    }

    #[test]
    fn matrix_checks() {
        let m = DepMatrix::new(vec![vec![Some(1), None], vec![None, None]]).unwrap();
        let mut spec = GraphSpec::new();
        spec.push(NodeSpec::alloc(0, 1).with_io(1).with_depth(Some(DepthDescriptor::Matrix(m.clone()))));
        spec.push(NodeSpec::alloc(0, 3).with_depth(Some(DepthDescriptor::Matrix(m))));
        assert_eq!(
            validate(&spec).violations,
            vec![
                Violation::MatrixDiagonal { node: NodeId(0), qubit: 1 },
                Violation::MatrixShape {
                    node: NodeId(1),
                    expected: 3,
                    found: 2
                },
            ]
        );
    }
}
