//! Sparse graph topology inference under Laplacian and edge-budget constraints.
//!
//! The estimator minimizes the Gaussian negative log-likelihood
//! `-log det(Lx + J) + tr(S Lx)` over edge weights `x >= 0` with at most `s`
//! nonzeros, where `Lx` is the graph Laplacian built from `x` and
//! `J = (1/p) 11ᵀ`. The solver is gradient projection: a gradient step, then
//! clamping at zero and keeping the `s` largest weights, with backtracking
//! until the step is both feasible (`Lx + J` positive definite) and
//! sufficiently decreasing.
//!
//! ```
//! use nalgebra::DMatrix;
//! use sparselap_core::{solve, SampleCovariance, SolverConfig};
//!
//! let s = SampleCovariance::new(DMatrix::identity(2, 2), 1).unwrap();
//! let result = solve(&s, &SolverConfig::new(1), None).unwrap();
//! assert!((result.x.as_slice()[0] - 0.5).abs() < 1e-6);
//! ```
//!
//! Modules:
//! - [`laplacian`]: `x ↦ Lx`, its adjoint, edge indexing.
//! - [`objective`]: value, gradient and feasibility of the likelihood.
//! - [`projection`]: projection onto nonnegative `s`-sparse vectors.
//! - [`solver`]: the line-search gradient projection loop.
//! - [`datagen`]: Erdos-Renyi ground truths and model samples.
//! - [`metrics`]: F-score and modularity.
//! - [`ingest`]: price tables to covariance.

// `!(v >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod error;
pub mod ingest;
pub mod laplacian;
pub mod metrics;
pub mod objective;
pub mod projection;
pub mod solver;
pub mod support;

pub use datagen::{
    default_edge_prob, erdos_renyi_weighted, sample_covariance, sample_lggm, GroundTruthGraph,
    SampleSet,
};
pub use error::{Error, Result};
pub use ingest::{
    covariance_from_returns, load_prices, load_sectors, log_returns, LoadOptions, PriceMatrix,
    ReturnsMatrix,
};
pub use laplacian::{
    adjoint, edge_count, edge_index, edge_pair, laplacian_from_weights, shift_matrix,
    weights_from_laplacian, WeightVector,
};
pub use metrics::{edge_set_from_weights, f_score, modularity, EdgeSet, SectorLabeling};
pub use objective::{Objective, ObjectiveEvaluation, SampleCovariance};
pub use projection::{project_sparse_nonneg, SparsityBudget};
pub use solver::{
    gradient_mapping, line_search, mean_variance, solve, solve_normalized, solve_observed,
    trial_point, Iterate, LineSearchOutcome, SolveStatus, SolverConfig, SolverResult, StartPoint,
};
pub use support::is_connected;

pub use nalgebra::DMatrix;
