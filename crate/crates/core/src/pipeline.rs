use crate::exec::Execution;
use crate::graph::ControlFlowGraph;
use crate::reuse::{apply_reuse, check_depth_data, PathSemantics, ReuseError, ReuseOptions, Schedule, Strategy};
use crate::sort::{smart_sort, SortOptions};

/// Settings for a full sort-then-reuse run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub strategy: Strategy,
    pub prioritize_aux: bool,
    pub semantics: PathSemantics,
    /// Only affects partitioned solving, where blocks are independent.
    pub execution: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            strategy: Strategy::Greedy,
            prioritize_aux: true,
            semantics: PathSemantics::Longest,
            execution: Execution::Parallel,
        }
    }
}

impl SolveOptions {
    pub fn with_strategy(strategy: Strategy) -> Self {
        SolveOptions {
            strategy,
            ..Default::default()
        }
    }

    pub fn sort_options(&self) -> SortOptions {
        SortOptions {
            prioritize_aux: self.prioritize_aux,
        }
    }

    pub fn reuse_options(&self) -> ReuseOptions {
        ReuseOptions {
            strategy: self.strategy,
            semantics: self.semantics,
        }
    }
}

/// Sorts `graph` and applies reuse to the resulting order.
pub fn solve(graph: &ControlFlowGraph, options: &SolveOptions) -> Result<Schedule, ReuseError> {
    if options.strategy == Strategy::DepthPreserving {
        check_depth_data(graph)?;
    }
    let sort = smart_sort(graph, options.sort_options());
    apply_reuse(graph, &sort, &options.reuse_options())
}
