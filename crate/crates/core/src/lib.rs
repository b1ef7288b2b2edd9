//! Qubit-reuse scheduling over quantum control flow graphs.
//!
//! The pipeline has two passes. [`sort::smart_sort`] orders the graph so that
//! qubit-releasing nodes come as early as their dependencies allow, and
//! [`reuse::apply_reuse`] walks that order binding released qubits to later
//! allocation requests under a chosen [`reuse::Strategy`]. Large graphs can be
//! solved block by block with [`hierarchy::solve_partitioned`].

pub mod bench;
pub mod exec;
pub mod gen;
pub mod graph;
pub mod hierarchy;
pub mod io;
pub mod oracle;
mod pipeline;
pub mod reach;
pub mod reuse;
pub mod sort;
mod util;
pub mod validate;
pub mod wires;

pub use graph::{
    ControlFlowGraph, DepMatrix, DepthDescriptor, Edge, GraphError, GraphSpec, Node, NodeId,
    NodeRole, NodeSpec,
};
pub use sort::{smart_sort, SortOptions, SortResult};
pub use validate::{validate, ValidationReport, Violation};
pub use exec::Execution;
pub use hierarchy::{solve_partitioned, BlockTree};
pub use pipeline::{solve, SolveOptions};
pub use reuse::{apply_reuse, compute_metrics, Schedule, Strategy};
