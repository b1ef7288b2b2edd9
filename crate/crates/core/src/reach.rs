//! Reachability queries: ancestry of a node and transitive closure
//! restricted to a subset of nodes.
//!
//! The restricted closure follows Purdom's scheme: walk a topological order
//! in reverse and accumulate, for every node, the set of subset members
//! reachable from it. Keeping only subset members in the sets makes the cost
//! `O(|V| * |S|)` bits instead of `O(|V|^2)`.

use fixedbitset::FixedBitSet;

use crate::graph::{ControlFlowGraph, GraphError, NodeId};

/// `v` together with all of its strict ancestors, in ascending id order.
pub fn ancestry(graph: &ControlFlowGraph, v: NodeId) -> Result<Vec<NodeId>, GraphError> {
    graph.check(v)?;
    let mut seen = FixedBitSet::with_capacity(graph.len());
    let mut stack = vec![v];
    seen.insert(v.index());
    let mut out = Vec::new();
    while let Some(u) = stack.pop() {
        out.push(u);
        for p in graph.predecessors(u) {
            if !seen.put(p.index()) {
                stack.push(p);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Descendants,
    Ancestors,
}

/// Per-node sets of the subset members reachable from (or reaching) it.
#[derive(Debug, Clone)]
pub struct ReachIndex {
    members: Vec<NodeId>,
    member_of: Vec<u32>,
    sets: Vec<FixedBitSet>,
    direction: Direction,
}

const NOT_MEMBER: u32 = u32::MAX;

impl ReachIndex {
    fn build(
        graph: &ControlFlowGraph,
        subset: &[NodeId],
        direction: Direction,
    ) -> Result<Self, GraphError> {
        let mut members = subset.to_vec();
        members.sort_unstable();
        members.dedup();
        let mut member_of = vec![NOT_MEMBER; graph.len()];
        for (i, &m) in members.iter().enumerate() {
            graph.check(m)?;
            member_of[m.index()] = i as u32;
        }
        let k = members.len();
        let mut sets = vec![FixedBitSet::with_capacity(k); graph.len()];
        let topo = graph.topological_order();
        let visit = |v: NodeId, sets: &mut Vec<FixedBitSet>, neighbours: Vec<NodeId>| {
            let mut acc = FixedBitSet::with_capacity(k);
            for w in neighbours {
                acc.union_with(&sets[w.index()]);
                let idx = member_of[w.index()];
                if idx != NOT_MEMBER {
                    acc.insert(idx as usize);
                }
            }
            sets[v.index()] = acc;
        };
        match direction {
            Direction::Descendants => {
                for &v in topo.iter().rev() {
                    visit(v, &mut sets, graph.successors(v).collect());
                }
            }
            Direction::Ancestors => {
                for &v in topo {
                    visit(v, &mut sets, graph.predecessors(v).collect());
                }
            }
        }
        Ok(ReachIndex {
            members,
            member_of,
            sets,
            direction,
        })
    }

    /// For every node, the subset members strictly reachable from it.
    pub fn descendants_within(graph: &ControlFlowGraph, subset: &[NodeId]) -> Result<Self, GraphError> {
        Self::build(graph, subset, Direction::Descendants)
    }

    /// For every node, the subset members from which it is strictly reachable.
    pub fn ancestors_within(graph: &ControlFlowGraph, subset: &[NodeId]) -> Result<Self, GraphError> {
        Self::build(graph, subset, Direction::Ancestors)
    }

    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    /// Whether a path `from -> ... -> to` of length at least one exists.
    ///
    /// The member-side endpoint (`to` for a descendant index, `from` for an
    /// ancestor index) must belong to the subset; otherwise this is `false`.
    #[inline]
    pub fn reaches(&self, from: NodeId, to: NodeId) -> bool {
        let (row, member) = match self.direction {
            Direction::Descendants => (from, to),
            Direction::Ancestors => (to, from),
        };
        match self.member_of.get(member.index()) {
            Some(&idx) if idx != NOT_MEMBER => self.sets[row.index()].contains(idx as usize),
            _ => false,
        }
    }
}

/// Transitive closure of a graph restricted to a node subset.
#[derive(Debug, Clone)]
pub struct ClosureGraph {
    members: Vec<NodeId>,
    succ: Vec<FixedBitSet>,
}

impl ClosureGraph {
    /// Subset members in ascending id order.
    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    fn position(&self, v: NodeId) -> Option<usize> {
        self.members.binary_search(&v).ok()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        match (self.position(u), self.position(v)) {
            (Some(a), Some(b)) => self.succ[a].contains(b),
            _ => false,
        }
    }

    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for (a, row) in self.succ.iter().enumerate() {
            for b in row.ones() {
                out.push((self.members[a], self.members[b]));
            }
        }
        out
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        match self.position(v) {
            Some(b) => self.succ.iter().filter(|row| row.contains(b)).count(),
            None => 0,
        }
    }
}

/// DAG over `subset` with an edge `(u, v)` iff `v` is reachable from `u`.
pub fn restricted_transitive_closure(
    graph: &ControlFlowGraph,
    subset: &[NodeId],
) -> Result<ClosureGraph, GraphError> {
    let index = ReachIndex::descendants_within(graph, subset)?;
    let succ = index
        .members
        .iter()
        .map(|m| index.sets[m.index()].clone())
        .collect();
    Ok(ClosureGraph {
        members: index.members,
        succ,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphSpec, NodeSpec};

    fn chain3() -> ControlFlowGraph {
        let mut spec = GraphSpec::new();
        spec.push(NodeSpec::alloc(0, 1));
        spec.push(NodeSpec::neutral(0));
        spec.push(NodeSpec::release(0, 1));
        spec.edge(0, 1, 1).edge(1, 2, 1);
        spec.build().unwrap()
    }

    #[test]
    fn chain_closure_is_transitive() {
        let g = chain3();
        let c = restricted_transitive_closure(&g, &[NodeId(0), NodeId(2)]).unwrap();
        assert_eq!(c.edges(), vec![(NodeId(0), NodeId(2))]);
        assert_eq!(c.in_degree(NodeId(2)), 1);
        assert_eq!(c.in_degree(NodeId(0)), 0);
    }

    #[test]
    fn singleton_subset_has_no_edges() {
        let g = chain3();
        let c = restricted_transitive_closure(&g, &[NodeId(2)]).unwrap();
        assert!(c.edges().is_empty());
        assert_eq!(c.members(), &[NodeId(2)]);
    }

    #[test]
    fn ancestry_of_source_is_itself() {
        let g = chain3();
        assert_eq!(ancestry(&g, NodeId(0)).unwrap(), vec![NodeId(0)]);
        assert_eq!(ancestry(&g, NodeId(2)).unwrap(), vec![NodeId(0), NodeId(1), NodeId(2)]);
        assert!(ancestry(&g, NodeId(3)).is_err());
    }

    #[test]
    fn ancestor_index_answers_descendant_queries() {
        let g = chain3();
        let idx = ReachIndex::ancestors_within(&g, &[NodeId(0)]).unwrap();
        assert!(idx.reaches(NodeId(0), NodeId(2)));
        assert!(!idx.reaches(NodeId(0), NodeId(0)));
        assert!(!idx.reaches(NodeId(1), NodeId(2)));
    }
}
