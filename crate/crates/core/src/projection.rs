//! Euclidean projection onto `{x >= 0, ||x||_0 <= s}`.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Edge budget: the maximum number of nonzero weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SparsityBudget(usize);

impl SparsityBudget {
    /// A budget usable on `p` vertices: between a spanning tree and the complete graph.
    pub fn new(s: usize, p: usize) -> Result<Self> {
        let d = crate::laplacian::edge_count(p);
        if s + 1 < p {
            return Err(Error::invalid(format!(
                "sparsity budget s = {s} is below p - 1 = {}; no connected graph fits",
                p.saturating_sub(1)
            )));
        }
        if s > d {
            return Err(Error::invalid(format!(
                "sparsity budget s = {s} exceeds the {d} candidate edges"
            )));
        }
        Ok(SparsityBudget(s))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Clamp `z` at zero and keep its `s` largest entries.
///
/// Ties for the last slot go to the smaller index, so the result is
/// deterministic. Runs in expected linear time.
pub fn project_sparse_nonneg(z: &[f64], s: usize) -> Result<Vec<f64>> {
    if s > z.len() {
        return Err(Error::invalid(format!(
            "cannot keep {s} entries of a length-{} vector",
            z.len()
        )));
    }
    let mut out: Vec<f64> = z.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
    let mut positive: Vec<usize> = (0..out.len()).filter(|&k| out[k] > 0.0).collect();
    if positive.len() <= s {
        return Ok(out);
    }
    let by_rank =
        |&a: &usize, &b: &usize| -> Ordering { out[b].total_cmp(&out[a]).then(a.cmp(&b)) };
    if s > 0 {
        positive.select_nth_unstable_by(s - 1, by_rank);
    }
    for &k in &positive[s..] {
        out[k] = 0.0;
    }
    Ok(out)
}
