//! Synthetic ground truth: weighted Erdos-Renyi graphs and samples from the
//! Gaussian model whose precision matrix is their Laplacian.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::laplacian::{edge_count, laplacian_from_weights, WeightVector};
use crate::objective::SampleCovariance;
use crate::support::is_connected;

/// Whole-graph redraws allowed before giving up on connectivity.
pub const MAX_CONNECT_ATTEMPTS: usize = 50;

/// Eigenvalues below this fraction of the largest are treated as the null space.
const NULL_RTOL: f64 = 1e-10;

/// Edge probability comfortably above the connectivity threshold `ln(p)/p`.
pub fn default_edge_prob(p: usize) -> f64 {
    (2.0 * (p as f64).ln() / p as f64).min(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthGraph {
    weights: WeightVector,
}

impl GroundTruthGraph {
    pub fn new(weights: WeightVector) -> Result<Self> {
        if weights
            .as_slice()
            .iter()
            .any(|&w| !(w >= 0.0 && w.is_finite()))
        {
            return Err(Error::invalid(
                "ground-truth weights must be finite and nonnegative",
            ));
        }
        if !is_connected(&weights) {
            return Err(Error::invalid("ground-truth graph is disconnected"));
        }
        Ok(GroundTruthGraph { weights })
    }

    pub fn p(&self) -> usize {
        self.weights.p()
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn edge_count(&self) -> usize {
        self.weights.nnz()
    }

    /// Weighted adjacency `W`.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = -laplacian_from_weights(&self.weights);
        a.fill_diagonal(0.0);
        a
    }

    /// Diagonal of `D`, the weighted degrees.
    pub fn degrees(&self) -> Vec<f64> {
        self.adjacency().row_iter().map(|r| r.sum()).collect()
    }

    /// `L = D - W`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        laplacian_from_weights(&self.weights)
    }

    /// Moore-Penrose pseudo-inverse of the Laplacian: the model covariance.
    pub fn covariance(&self) -> DMatrix<f64> {
        let eig = SymmetricEigen::new(self.laplacian());
        let cutoff = NULL_RTOL * eig.eigenvalues.amax();
        let p = self.p();
        let mut out = DMatrix::zeros(p, p);
        for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda > cutoff {
                let u = eig.eigenvectors.column(idx);
                out += (u * u.transpose()) / lambda;
            }
        }
        out
    }
}

/// Each pair is an edge with probability `edge_prob`, weight `U(low, high)`.
/// Disconnected draws are discarded whole and redrawn.
pub fn erdos_renyi_weighted(
    p: usize,
    edge_prob: f64,
    weight_low: f64,
    weight_high: f64,
    seed: u64,
) -> Result<GroundTruthGraph> {
    if p < 2 {
        return Err(Error::invalid(format!("need at least 2 vertices, got {p}")));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::invalid(format!(
            "edge_prob must lie in [0, 1], got {edge_prob}"
        )));
    }
    if !(weight_low > 0.0 && weight_low < weight_high && weight_high.is_finite()) {
        return Err(Error::invalid(format!(
            "weight range must satisfy 0 < low < high, got ({weight_low}, {weight_high})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weight = Uniform::new(weight_low, weight_high)
        .map_err(|e| Error::invalid(format!("weight range: {e}")))?;
    for _ in 0..MAX_CONNECT_ATTEMPTS {
        let entries: Vec<f64> = (0..edge_count(p))
            .map(|_| {
                if rng.random_bool(edge_prob) {
                    weight.sample(&mut rng)
                } else {
                    0.0
                }
            })
            .collect();
        let x = WeightVector::new(p, entries)?;
        if is_connected(&x) {
            return Ok(GroundTruthGraph { weights: x });
        }
    }
    Err(Error::GenerationFailure {
        edge_prob,
        attempts: MAX_CONNECT_ATTEMPTS,
    })
}

/// `n` observations, one per row of `samples`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub samples: DMatrix<f64>,
    pub seed: u64,
}

impl SampleSet {
    pub fn n(&self) -> usize {
        self.samples.nrows()
    }

    pub fn p(&self) -> usize {
        self.samples.ncols()
    }
}

/// Draw `y = sum_i lambda_i^{-1/2} z_i u_i` over the nonzero eigenpairs of `L`,
/// so that `y` has covariance `L^+` and sums to zero.
pub fn sample_lggm(graph: &GroundTruthGraph, n: usize, seed: u64) -> Result<SampleSet> {
    if !is_connected(graph.weights()) {
        return Err(Error::invalid("cannot sample from a disconnected graph"));
    }
    let p = graph.p();
    let eig = SymmetricEigen::new(graph.laplacian());
    let cutoff = NULL_RTOL * eig.eigenvalues.amax();
    // Columns u_i / sqrt(lambda_i) for the nonzero spectrum.
    let basis: Vec<_> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > cutoff)
        .map(|(idx, &l)| eig.eigenvectors.column(idx) / l.sqrt())
        .collect();
    let scaled = DMatrix::from_columns(&basis);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DMatrix::<f64>::from_fn(scaled.ncols(), n, |_, _| rng.sample(StandardNormal));
    let samples = (scaled * z).transpose();
    debug_assert_eq!(samples.ncols(), p);
    Ok(SampleSet { samples, seed })
}

/// `S = (1/n) sum_k y_k y_kᵀ`, no centering.
pub fn sample_covariance(set: &SampleSet) -> Result<SampleCovariance> {
    let n = set.n();
    if n == 0 {
        return Err(Error::invalid("sample covariance of an empty sample set"));
    }
    let y = &set.samples;
    let mut s = (y.transpose() * y) / n as f64;
    // Exact symmetry regardless of the product's rounding.
    s = (&s + s.transpose()) * 0.5;
    SampleCovariance::new(s, n)
}
