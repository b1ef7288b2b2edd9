//! JSON formats for graphs, partitions, sorts and schedules.
//!
//! Graph files look like
//!
//! ```json
//! {"nodes": [{"id": 0, "role": "alloc", "qubits": 2, "aux": 0, "io": 1, "depth": 1}],
//!  "edges": [[0, 1, 2]]}
//! ```
//!
//! `role` is `alloc`, `dealloc` or `neutral` (which takes no `qubits`).
//! `io` is optional and derived from edge flows when absent. `depth` is a
//! number, a square matrix whose `null` entries mark missing paths, or
//! `null` for no depth data; when absent it defaults to `1`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::graph::{ControlFlowGraph, DepMatrix, DepthDescriptor, EdgeSpec, GraphSpec, NodeSpec};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("node {node}: {reason}")]
    Node { node: u32, reason: String },
    #[error("edge #{index}: expected [from, to, flow], found {found} entries")]
    Edge { index: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RoleJson {
    Alloc,
    Dealloc,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum DepthJson {
    Scalar(u64),
    Matrix(Vec<Vec<Option<u64>>>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeJson {
    id: u32,
    role: RoleJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    qubits: Option<u32>,
    #[serde(default)]
    aux: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    io: Option<u32>,
    // outer None: field absent; inner None: explicit null
    #[serde(default, deserialize_with = "present")]
    depth: Option<Option<DepthJson>>,
}

fn present<'de, D: Deserializer<'de>, T: Deserialize<'de>>(d: D) -> Result<Option<T>, D::Error> {
    T::deserialize(d).map(Some)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    nodes: Vec<NodeJson>,
    #[serde(default)]
    edges: Vec<Vec<u32>>,
}

/// Parses a graph file into an unchecked description; build it with
/// [`GraphSpec::build`] to validate.
pub fn parse_graph(text: &str) -> Result<GraphSpec, ParseError> {
    let raw: GraphJson = serde_json::from_str(text)?;
    let mut spec = GraphSpec::new();
    for n in raw.nodes {
        let bad = |reason: &str| ParseError::Node {
            node: n.id,
            reason: reason.to_string(),
        };
        let (required, released) = match (n.role, n.qubits) {
            (RoleJson::Neutral, None | Some(0)) => (0, 0),
            (RoleJson::Neutral, Some(_)) => return Err(bad("neutral nodes take no \"qubits\"")),
            (_, None | Some(0)) => return Err(bad("alloc and dealloc nodes need \"qubits\" >= 1")),
            (RoleJson::Alloc, Some(q)) => (q, 0),
            (RoleJson::Dealloc, Some(q)) => (0, q),
        };
        let depth = match n.depth {
            None => Some(DepthDescriptor::Scalar(1)),
            Some(None) => None,
            Some(Some(DepthJson::Scalar(d))) => Some(DepthDescriptor::Scalar(d)),
            Some(Some(DepthJson::Matrix(rows))) => Some(DepthDescriptor::Matrix(
                DepMatrix::new(rows).map_err(|e| bad(&format!("depth matrix: {e}")))?,
            )),
        };
        spec.nodes.push(NodeSpec {
            id: n.id,
            required,
            released,
            aux: n.aux,
            io: n.io,
            depth,
        });
    }
    for (index, e) in raw.edges.iter().enumerate() {
        match e.as_slice() {
            &[from, to, flow] => spec.edges.push(EdgeSpec { from, to, flow }),
            _ => return Err(ParseError::Edge { index, found: e.len() }),
        }
    }
    Ok(spec)
}

/// Serializes a graph description; I/O counts and depth are written out
/// whenever known.
pub fn graph_spec_to_json(spec: &GraphSpec) -> String {
    let nodes = spec
        .nodes
        .iter()
        .map(|n| {
            let (role, qubits) = match (n.required, n.released) {
                (0, 0) => (RoleJson::Neutral, None),
                (q, 0) => (RoleJson::Alloc, Some(q)),
                (_, q) => (RoleJson::Dealloc, Some(q)),
            };
            let depth = n.depth.as_ref().map(|d| match d {
                DepthDescriptor::Scalar(s) => DepthJson::Scalar(*s),
                DepthDescriptor::Matrix(m) => DepthJson::Matrix(m.rows().map(<[_]>::to_vec).collect()),
            });
            NodeJson {
                id: n.id,
                role,
                qubits,
                aux: n.aux,
                io: n.io,
                depth: Some(depth),
            }
        })
        .collect();
    let edges = spec.edges.iter().map(|e| vec![e.from, e.to, e.flow]).collect();
    to_json(&GraphJson { nodes, edges })
}

pub fn graph_to_json(graph: &ControlFlowGraph) -> String {
    graph_spec_to_json(&graph.to_spec())
}

/// Parses any of the other formats (block trees, sorts, schedules).
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, ParseError> {
    Ok(serde_json::from_str(text)?)
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values serialize to JSON");
    s.push('\n');
    s
}
