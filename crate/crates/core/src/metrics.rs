//! Edge-recovery F-score and weighted Newman modularity.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::laplacian::{pairs, WeightVector};

/// Default support threshold. Estimates carry exact zeros; this absorbs rounding.
pub const DEFAULT_THRESHOLD: f64 = 1e-8;

/// Unordered vertex pairs, stored 1-based as `(i, j)` with `i > j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    p: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl EdgeSet {
    pub fn new(p: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges = BTreeSet::new();
        for (a, b) in pairs {
            let (i, j) = if a > b { (a, b) } else { (b, a) };
            if i == j {
                return Err(Error::invalid(format!("self-loop at vertex {i}")));
            }
            if j < 1 || i > p {
                return Err(Error::invalid(format!("edge ({a}, {b}) outside 1..={p}")));
            }
            edges.insert((i, j));
        }
        Ok(EdgeSet { p, edges })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let key = if i > j { (i, j) } else { (j, i) };
        self.edges.contains(&key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }
}

/// Pairs whose weight exceeds `threshold`.
pub fn edge_set_from_weights(x: &WeightVector, threshold: f64) -> EdgeSet {
    let edges = pairs(x.p())
        .zip(x.as_slice())
        .filter(|(_, &w)| w > threshold)
        .map(|((i, j), _)| (i + 1, j + 1))
        .collect();
    EdgeSet { p: x.p(), edges }
}

/// Counts behind an F-score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

pub fn confusion(truth: &EdgeSet, estimate: &EdgeSet) -> Result<Confusion> {
    if truth.p != estimate.p {
        return Err(Error::invalid(format!(
            "edge sets on different vertex counts: {} vs {}",
            truth.p, estimate.p
        )));
    }
    let tp = truth.edges.intersection(&estimate.edges).count();
    Ok(Confusion {
        tp,
        fp: estimate.len() - tp,
        fn_: truth.len() - tp,
    })
}

/// `2tp / (2tp + fp + fn)`; two empty sets score 1.
pub fn f_score(truth: &EdgeSet, estimate: &EdgeSet) -> Result<f64> {
    let c = confusion(truth, estimate)?;
    let denom = 2 * c.tp + c.fp + c.fn_;
    if denom == 0 {
        return Ok(1.0);
    }
    Ok((2 * c.tp) as f64 / denom as f64)
}

/// Community label for every vertex, e.g. a stock's sector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorLabeling {
    labels: Vec<String>,
}

impl SectorLabeling {
    pub fn new(labels: Vec<String>) -> Self {
        SectorLabeling { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Label of 1-based vertex `v`.
    pub fn label(&self, v: usize) -> &str {
        &self.labels[v - 1]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Weighted modularity
/// `Q = (1/2m) sum_ij (A_ij - k_i k_j / 2m) [c_i = c_j]`,
/// evaluated per community as `sum_c in_c/2m - (tot_c/2m)^2`.
pub fn modularity(x: &WeightVector, labeling: &SectorLabeling) -> Result<f64> {
    let p = x.p();
    if labeling.len() != p {
        return Err(Error::invalid(format!(
            "labeling covers {} vertices, graph has {p}",
            labeling.len()
        )));
    }
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let community: Vec<usize> = labeling
        .labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(l.as_str()).or_insert(next)
        })
        .collect();

    let mut inside = vec![0.0; ids.len()];
    let mut total = vec![0.0; ids.len()];
    let mut two_m = 0.0;
    for ((i, j), &w) in pairs(p).zip(x.as_slice()) {
        if w == 0.0 {
            continue;
        }
        two_m += 2.0 * w;
        total[community[i]] += w;
        total[community[j]] += w;
        if community[i] == community[j] {
            inside[community[i]] += 2.0 * w;
        }
    }
    if !(two_m > 0.0) {
        return Err(Error::invalid("modularity of a graph with no edge weight"));
    }
    Ok(inside
        .iter()
        .zip(&total)
        .map(|(in_c, tot_c)| in_c / two_m - (tot_c / two_m).powi(2))
        .sum())
}
