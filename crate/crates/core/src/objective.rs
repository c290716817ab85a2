//! Negative log-likelihood `f(x) = -log det(Lx + J) + tr(S Lx)` and its gradient.
//!
//! The Cholesky factorization of `Lx + J` does double duty: its diagonal gives
//! the log-determinant, and its failure is the signal that `x` lies outside the
//! feasible region (for `x >= 0`, exactly when the support graph is
//! disconnected). No ridge is ever added.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};
use crate::laplacian::{adjoint, edge_count, laplacian_from_weights, shift_matrix, WeightVector};

/// Smallest accepted squared Cholesky pivot, relative to `p * max_diag`.
/// Exactly singular inputs produce pivots at rounding level, a few ulps.
const PIVOT_RTOL: f64 = 8.0 * f64::EPSILON;

/// Symmetric `p x p` second-moment matrix and the number of observations behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCovariance {
    matrix: DMatrix<f64>,
    n: usize,
}

impl SampleCovariance {
    pub fn new(matrix: DMatrix<f64>, n: usize) -> Result<Self> {
        let p = matrix.nrows();
        if matrix.ncols() != p || p < 2 {
            return Err(Error::invalid(format!(
                "covariance must be square with p >= 2, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let scale = matrix.amax().max(1.0);
        for i in 0..p {
            if !(matrix[(i, i)] >= 0.0) {
                return Err(Error::invalid(format!(
                    "covariance diagonal entry {} is {}",
                    i + 1,
                    matrix[(i, i)]
                )));
            }
            for j in 0..i {
                let (a, b) = (matrix[(i, j)], matrix[(j, i)]);
                if !a.is_finite() || (a - b).abs() > 1e-12 * scale {
                    return Err(Error::invalid(format!(
                        "covariance is not symmetric at ({}, {}): {a} vs {b}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(SampleCovariance { matrix, n })
    }

    pub fn p(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SampleCovariance {
            matrix: &self.matrix * factor,
            n: self.n,
        }
    }
}

/// Result of [`Objective::evaluate`]. `value` is `+inf` exactly when no factor exists.
#[derive(Debug, Clone)]
pub struct ObjectiveEvaluation {
    pub value: f64,
    factor: Option<Cholesky<f64, Dyn>>,
}

impl ObjectiveEvaluation {
    pub fn is_positive_definite(&self) -> bool {
        self.factor.is_some()
    }

    /// Lower-triangular factor of `Lx + J`, when it is positive definite.
    pub fn factor(&self) -> Option<DMatrix<f64>> {
        self.factor.as_ref().map(|c| c.l())
    }
}

/// Objective bound to one covariance, with the linear term `L*S` computed once.
#[derive(Debug, Clone)]
pub struct Objective {
    covariance: SampleCovariance,
    linear: Vec<f64>,
    shift: DMatrix<f64>,
}

impl Objective {
    pub fn new(covariance: SampleCovariance) -> Self {
        let p = covariance.p();
        let linear = adjoint(covariance.matrix()).expect("covariance is square with p >= 2");
        Objective {
            covariance,
            linear,
            shift: shift_matrix(p),
        }
    }

    pub fn p(&self) -> usize {
        self.covariance.p()
    }

    pub fn covariance(&self) -> &SampleCovariance {
        &self.covariance
    }

    /// `L*S`, so that `tr(S Lx) = <L*S, x>`.
    pub fn linear_term(&self) -> &[f64] {
        &self.linear
    }

    fn check(&self, x: &WeightVector) -> Result<()> {
        if x.p() != self.p() {
            return Err(Error::invalid(format!(
                "weight vector is for p = {} but covariance has p = {}",
                x.p(),
                self.p()
            )));
        }
        debug_assert_eq!(x.len(), edge_count(self.p()));
        Ok(())
    }

    pub fn evaluate(&self, x: &WeightVector) -> Result<ObjectiveEvaluation> {
        self.check(x)?;
        let p = self.p();
        let shifted = laplacian_from_weights(x) + &self.shift;
        let max_diag = shifted.diagonal().max();
        let factor = Cholesky::new(shifted).filter(|c| {
            let floor = PIVOT_RTOL * p as f64 * max_diag;
            c.l_dirty().diagonal().iter().all(|&d| d * d > floor)
        });
        let value = match &factor {
            Some(c) => {
                let log_det: f64 = c.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
                -log_det + x.dot(&self.linear)
            }
            None => f64::INFINITY,
        };
        Ok(ObjectiveEvaluation { value, factor })
    }

    /// `L*(S - (Lx + J)^{-1})`, with the inverse taken from `eval`'s factor.
    pub fn gradient(&self, x: &WeightVector, eval: &ObjectiveEvaluation) -> Result<Vec<f64>> {
        self.check(x)?;
        let factor = eval.factor.as_ref().ok_or(Error::MissingFactorization)?;
        let inverse = factor.inverse();
        let curvature = adjoint(&inverse)?;
        Ok(self
            .linear
            .iter()
            .zip(&curvature)
            .map(|(s, c)| s - c)
            .collect())
    }
}
