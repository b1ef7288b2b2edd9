use crate::graph::DepthDescriptor;

/// How intra-node depth entries combine along a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PathSemantics {
    /// Critical path: an output is ready once its slowest input has arrived.
    #[default]
    Longest,
    /// An output is ready once its fastest input has arrived.
    Shortest,
}

/// Output depths of a node: `post[k]` combines `pre[j] + dep(j, k)` over all
/// inputs `j` with a path to `k` (max for longest, min for shortest).
pub fn post_deps(desc: &DepthDescriptor, pre: &[u64], semantics: PathSemantics, post: &mut Vec<u64>) {
    post.clear();
    let pick = |a: Option<u64>, b: u64| match (a, semantics) {
        (None, _) => Some(b),
        (Some(a), PathSemantics::Longest) => Some(a.max(b)),
        (Some(a), PathSemantics::Shortest) => Some(a.min(b)),
    };
    match desc {
        DepthDescriptor::Scalar(d) => {
            if let Some(best) = pre.iter().fold(None, |acc, &p| pick(acc, p)) {
                post.resize(pre.len(), best + d);
            }
        }
        DepthDescriptor::Matrix(m) => {
            for k in 0..pre.len() {
                let mut best = None;
                for (j, &p) in pre.iter().enumerate() {
                    if let Some(d) = m.get(j, k) {
                        best = pick(best, p + d);
                    }
                }
                // the diagonal is always finite in a validated graph
                post.push(best.unwrap_or(pre[k]));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DepMatrix;

    #[test]
    fn scalar_takes_slowest_or_fastest_input() {
        let mut out = Vec::new();
        post_deps(&DepthDescriptor::Scalar(2), &[1, 5, 0], PathSemantics::Longest, &mut out);
        assert_eq!(out, vec![7, 7, 7]);
        post_deps(&DepthDescriptor::Scalar(2), &[1, 5, 0], PathSemantics::Shortest, &mut out);
        assert_eq!(out, vec![2, 2, 2]);
        post_deps(&DepthDescriptor::Scalar(2), &[], PathSemantics::Longest, &mut out);
        assert!(out.is_empty());
    }

    #[test]
    fn matrix_skips_missing_paths() {
        let m = DepMatrix::new(vec![vec![Some(1), None], vec![Some(4), Some(0)]]).unwrap();
        let mut out = Vec::new();
        post_deps(&DepthDescriptor::Matrix(m), &[10, 3], PathSemantics::Longest, &mut out);
        // qubit 0: max(10 + 1, 3 + 4); qubit 1: only its own input
        assert_eq!(out, vec![11, 3]);
    }
}
