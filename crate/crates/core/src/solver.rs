//! Gradient projection with an Armijo-type backtracking line search.
//!
//! Each outer iteration tries step sizes `sigma * beta^m` for `m = 0, 1, ...`.
//! A trial point `P(x - eta * grad)` is accepted once `L(trial) + J` factors
//! (the trial is feasible) and
//!
//! ```text
//! f(trial) <= f(x) - alpha * eta * ||G||^2,   G = (x - trial) / eta
//! ```
//!
//! with the same `eta` on both sides. `m` restarts at zero every iteration.

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::laplacian::{pairs, WeightVector};
use crate::objective::{Objective, ObjectiveEvaluation, SampleCovariance};
use crate::projection::{project_sparse_nonneg, SparsityBudget};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Initial step scale.
    pub sigma: f64,
    /// Backtracking factor in (0, 1).
    pub beta: f64,
    /// Sufficient-decrease constant in (0, 1).
    pub alpha: f64,
    /// Maximum number of edges.
    pub s: usize,
    /// Stop once `||G|| <= tol * (1 + ||x||)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Backtracking steps tried per iteration before giving up.
    pub m_max: usize,
}

impl SolverConfig {
    pub fn new(s: usize) -> Self {
        SolverConfig {
            sigma: 1.0,
            beta: 0.5,
            alpha: 1e-4,
            s,
            tol: 1e-6,
            max_iter: 10_000,
            m_max: 60,
        }
    }

    pub fn validate(&self, p: usize) -> Result<SparsityBudget> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::invalid(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.m_max < 1 {
            return Err(Error::invalid("m_max must be at least 1"));
        }
        SparsityBudget::new(self.s, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    LineSearchStalled,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "max-iterations",
            SolveStatus::LineSearchStalled => "line-search-stalled",
        }
    }
}

/// Where the iteration started.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartPoint {
    /// Caller-supplied `x0`.
    Given,
    /// Complete graph with every weight `1/p`.
    Uniform,
    /// Spanning tree, used when no feasible step leaves the uniform start.
    SpanningTree,
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub x: WeightVector,
    /// Objective at the start point followed by every accepted iterate.
    pub objective_trace: Vec<f64>,
    /// Accepted steps.
    pub iterations: usize,
    pub status: SolveStatus,
    pub final_gradient_mapping_norm: f64,
    pub start: StartPoint,
}

impl SolverResult {
    pub fn objective(&self) -> f64 {
        *self
            .objective_trace
            .last()
            .expect("trace holds the start point")
    }
}

/// An accepted iterate, as reported to observers.
#[derive(Debug)]
pub struct Iterate<'a> {
    pub iteration: usize,
    pub x: &'a WeightVector,
    pub value: f64,
    pub eta: f64,
    pub gradient_mapping_norm: f64,
}

pub fn trial_point(
    x: &WeightVector,
    eta: f64,
    grad: &[f64],
    s: SparsityBudget,
) -> Result<WeightVector> {
    if grad.len() != x.len() {
        return Err(Error::invalid(format!(
            "gradient has {} entries, weights have {}",
            grad.len(),
            x.len()
        )));
    }
    let z: Vec<f64> = x
        .as_slice()
        .iter()
        .zip(grad)
        .map(|(xi, gi)| xi - eta * gi)
        .collect();
    WeightVector::new(x.p(), project_sparse_nonneg(&z, s.get())?)
}

pub fn gradient_mapping(x: &WeightVector, trial: &WeightVector, eta: f64) -> Vec<f64> {
    x.as_slice()
        .iter()
        .zip(trial.as_slice())
        .map(|(a, b)| (a - b) / eta)
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[derive(Debug, Clone)]
pub struct AcceptedStep {
    pub m: usize,
    pub eta: f64,
    pub x: WeightVector,
    pub value: f64,
    pub gradient_mapping_norm: f64,
    evaluation: ObjectiveEvaluation,
}

#[derive(Debug, Clone)]
pub enum LineSearchOutcome {
    Accepted(AcceptedStep),
    /// No step up to `m_max` was accepted. Carries `||G||` of the last
    /// feasible trial (the smallest feasible step), if any trial was feasible.
    Stalled {
        last_feasible_mapping_norm: Option<f64>,
    },
}

impl LineSearchOutcome {
    /// Stationarity measure at the point the search started from.
    pub fn gradient_mapping_norm(&self) -> f64 {
        match self {
            LineSearchOutcome::Accepted(step) => step.gradient_mapping_norm,
            LineSearchOutcome::Stalled {
                last_feasible_mapping_norm,
            } => last_feasible_mapping_norm.unwrap_or(f64::INFINITY),
        }
    }
}

pub fn line_search(
    objective: &Objective,
    x: &WeightVector,
    f_x: f64,
    grad: &[f64],
    cfg: &SolverConfig,
) -> Result<LineSearchOutcome> {
    let budget = cfg.validate(objective.p())?;
    let mut last_feasible = None;
    let mut eta = cfg.sigma;
    for m in 0..=cfg.m_max {
        let trial = trial_point(x, eta, grad, budget)?;
        let evaluation = objective.evaluate(&trial)?;
        if evaluation.is_positive_definite() {
            let g_norm = norm(&gradient_mapping(x, &trial, eta));
            last_feasible = Some(g_norm);
            if evaluation.value <= f_x - cfg.alpha * eta * g_norm * g_norm {
                return Ok(LineSearchOutcome::Accepted(AcceptedStep {
                    m,
                    eta,
                    value: evaluation.value,
                    x: trial,
                    gradient_mapping_norm: g_norm,
                    evaluation,
                }));
            }
        }
        eta *= cfg.beta;
    }
    Ok(LineSearchOutcome::Stalled {
        last_feasible_mapping_norm: last_feasible,
    })
}

pub fn solve(
    covariance: &SampleCovariance,
    cfg: &SolverConfig,
    x0: Option<&WeightVector>,
) -> Result<SolverResult> {
    solve_observed(covariance, cfg, x0, &mut |_| {})
}

/// [`solve`], calling `observer` on every accepted iterate.
pub fn solve_observed(
    covariance: &SampleCovariance,
    cfg: &SolverConfig,
    x0: Option<&WeightVector>,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<SolverResult> {
    let p = covariance.p();
    let budget = cfg.validate(p)?;
    let objective = Objective::new(covariance.clone());

    let (x, start) = match x0 {
        Some(x0) => {
            if x0.p() != p {
                return Err(Error::invalid(format!(
                    "x0 is for p = {} but covariance has p = {p}",
                    x0.p()
                )));
            }
            if x0.as_slice().iter().any(|&v| !(v >= 0.0)) {
                return Err(Error::invalid("x0 has negative or NaN entries"));
            }
            (x0.clone(), StartPoint::Given)
        }
        None => (
            WeightVector::constant(p, 1.0 / p as f64)?,
            StartPoint::Uniform,
        ),
    };
    let eval = objective.evaluate(&x)?;
    if !eval.is_positive_definite() {
        return Err(Error::invalid(
            "x0 is infeasible: L(x0) + J is not positive definite (disconnected support)",
        ));
    }

    let first = run(&objective, cfg, x, eval, start, observer)?;
    if first.x.nnz() > budget.get() {
        // No step out of a start denser than the budget was accepted,
        // typically because every trial had a disconnected support.
        let tree = spanning_tree_start(&objective, &first.x, cfg.sigma)?;
        let eval = objective.evaluate(&tree)?;
        debug_assert!(eval.is_positive_definite());
        debug_assert!(tree.nnz() <= budget.get());
        return run(
            &objective,
            cfg,
            tree,
            eval,
            StartPoint::SpanningTree,
            observer,
        );
    }
    Ok(first)
}

/// `tr S / p`, or 1 when that is not a usable scale.
pub fn mean_variance(covariance: &SampleCovariance) -> f64 {
    let c = covariance.matrix().trace() / covariance.p() as f64;
    if c > 0.0 && c.is_finite() {
        c
    } else {
        1.0
    }
}

/// [`solve_observed`] on `S / c` with `c = tr S / p`, reported in the units of
/// `S`. Weights scale like `1/S`, so the estimate for `cS` is the estimate for
/// `S` divided by `c`; `sigma`, `tol` and the uniform start all act on
/// unit-variance data. The objective trace is shifted by `(p - 1) ln c`,
/// `eta` by `1/c^2` and `G` by `c`, which keeps every logged quantity exact for `S`.
pub fn solve_normalized(
    covariance: &SampleCovariance,
    cfg: &SolverConfig,
    x0: Option<&WeightVector>,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<SolverResult> {
    let c = mean_variance(covariance);
    let shift = (covariance.p() as f64 - 1.0) * c.ln();
    let unit = covariance.scaled(1.0 / c);
    let x0 = x0.map(|x| x.scaled(c));
    let mut res = solve_observed(&unit, cfg, x0.as_ref(), &mut |it| {
        let x = it.x.scaled(1.0 / c);
        observer(&Iterate {
            iteration: it.iteration,
            x: &x,
            value: it.value + shift,
            eta: it.eta / (c * c),
            gradient_mapping_norm: it.gradient_mapping_norm * c,
        });
    })?;
    res.x = res.x.scaled(1.0 / c);
    for v in &mut res.objective_trace {
        *v += shift;
    }
    res.final_gradient_mapping_norm *= c;
    Ok(res)
}

fn run(
    objective: &Objective,
    cfg: &SolverConfig,
    mut x: WeightVector,
    mut eval: ObjectiveEvaluation,
    start: StartPoint,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<SolverResult> {
    let mut trace = vec![eval.value];
    let mut g_norm = f64::INFINITY;
    for k in 0..cfg.max_iter {
        let grad = objective.gradient(&x, &eval)?;
        let outcome = line_search(objective, &x, eval.value, &grad, cfg)?;
        g_norm = outcome.gradient_mapping_norm();
        let threshold = cfg.tol * (1.0 + x.norm());
        let step = match outcome {
            _ if g_norm <= threshold && x.nnz() <= cfg.s => {
                return Ok(finish(x, trace, k, SolveStatus::Converged, g_norm, start));
            }
            LineSearchOutcome::Stalled { .. } => {
                return Ok(finish(
                    x,
                    trace,
                    k,
                    SolveStatus::LineSearchStalled,
                    g_norm,
                    start,
                ));
            }
            LineSearchOutcome::Accepted(step) => step,
        };
        trace.push(step.value);
        observer(&Iterate {
            iteration: k + 1,
            x: &step.x,
            value: step.value,
            eta: step.eta,
            gradient_mapping_norm: step.gradient_mapping_norm,
        });
        x = step.x;
        eval = step.evaluation;
    }
    Ok(finish(
        x,
        trace,
        cfg.max_iter,
        SolveStatus::MaxIterations,
        g_norm,
        start,
    ))
}

fn finish(
    x: WeightVector,
    objective_trace: Vec<f64>,
    iterations: usize,
    status: SolveStatus,
    final_gradient_mapping_norm: f64,
    start: StartPoint,
) -> SolverResult {
    SolverResult {
        x,
        objective_trace,
        iterations,
        status,
        final_gradient_mapping_norm,
        start,
    }
}

/// Maximum spanning tree of the first gradient step out of `x`, weighted by
/// `1 / (L*S)_k`. On a tree `det(Lx + J) = p * prod(w)`, so these weights
/// minimize the objective over that tree.
fn spanning_tree_start(
    objective: &Objective,
    x: &WeightVector,
    sigma: f64,
) -> Result<WeightVector> {
    let p = x.p();
    let eval = objective.evaluate(x)?;
    let grad = objective.gradient(x, &eval)?;
    let score: Vec<f64> = x
        .as_slice()
        .iter()
        .zip(&grad)
        .map(|(xi, gi)| xi - sigma * gi)
        .collect();
    let mut order: Vec<usize> = (0..score.len()).collect();
    order.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));

    // (L*S)_k is the variance of y_i - y_j, zero only for identical signals.
    let linear = objective.linear_term();
    let positive: Vec<f64> = linear.iter().copied().filter(|&v| v > 0.0).collect();
    let fallback = if positive.is_empty() {
        1.0
    } else {
        positive.len() as f64 / positive.iter().sum::<f64>()
    };

    let pair_of: Vec<(usize, usize)> = pairs(p).collect();
    let mut components = UnionFind::<usize>::new(p);
    let mut entries = vec![0.0; score.len()];
    let mut added = 0;
    for k in order {
        let (i, j) = pair_of[k];
        if components.union(i, j) {
            entries[k] = if linear[k] > 0.0 {
                1.0 / linear[k]
            } else {
                fallback
            };
            added += 1;
            if added + 1 == p {
                break;
            }
        }
    }
    WeightVector::new(p, entries)
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use super::*;

    fn identity2() -> SampleCovariance {
        SampleCovariance::new(DMatrix::identity(2, 2), 1).unwrap()
    }

    fn w(v: f64) -> WeightVector {
        WeightVector::new(2, vec![v]).unwrap()
    }

    #[test]
    fn trial_point_cases() {
        let b = SparsityBudget::new(1, 2).unwrap();
        assert_eq!(trial_point(&w(1.0), 0.25, &[0.0], b).unwrap(), w(1.0));
        assert_eq!(trial_point(&w(1.0), 0.25, &[1.0], b).unwrap(), w(0.75));
        assert_eq!(trial_point(&w(1.0), 10.0, &[1.0], b).unwrap(), w(0.0));
    }

    #[test]
    fn gradient_mapping_cases() {
        assert_eq!(gradient_mapping(&w(1.0), &w(1.0), 0.3), vec![0.0]);
        assert_eq!(gradient_mapping(&w(1.0), &w(0.75), 0.25), vec![1.0]);
    }

    #[test]
    fn gradient_mapping_equals_gradient_when_constraints_inactive() {
        let p = 4;
        let s = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { 0.2 });
        let obj = Objective::new(SampleCovariance::new(s, 1).unwrap());
        let x = WeightVector::new(p, vec![0.7, 0.9, 1.1, 0.8, 1.3, 0.6]).unwrap();
        let eval = obj.evaluate(&x).unwrap();
        let grad = obj.gradient(&x, &eval).unwrap();
        let eta = 1e-3;
        let budget = SparsityBudget::new(6, p).unwrap();
        let trial = trial_point(&x, eta, &grad, budget).unwrap();
        let g = gradient_mapping(&x, &trial, eta);
        for (a, b) in g.iter().zip(&grad) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn line_search_two_vertex_example() {
        let obj = Objective::new(identity2());
        let x = w(1.0);
        let eval = obj.evaluate(&x).unwrap();
        let grad = obj.gradient(&x, &eval).unwrap();
        assert!((grad[0] - 1.0).abs() < 1e-15);
        let cfg = SolverConfig::new(1);
        // eta = 1 lands on w = 0, which is infeasible; eta = 0.5 lands on 0.5.
        match line_search(&obj, &x, eval.value, &grad, &cfg).unwrap() {
            LineSearchOutcome::Accepted(step) => {
                assert_eq!(step.m, 1);
                assert_eq!(step.eta, 0.5);
                assert_eq!(step.x, w(0.5));
                assert!((step.value - 1.0).abs() < 1e-12);
                assert!((step.gradient_mapping_norm - 1.0).abs() < 1e-12);
            }
            other => panic!("expected acceptance, got {other:?}"),
        }
    }

    #[test]
    fn line_search_zero_gradient_accepts_immediately() {
        let obj = Objective::new(identity2());
        let x = w(0.5);
        let eval = obj.evaluate(&x).unwrap();
        let cfg = SolverConfig::new(1);
        match line_search(&obj, &x, eval.value, &[0.0], &cfg).unwrap() {
            LineSearchOutcome::Accepted(step) => {
                assert_eq!(step.m, 0);
                assert_eq!(step.x, x);
                assert_eq!(step.gradient_mapping_norm, 0.0);
            }
            other => panic!("expected acceptance, got {other:?}"),
        }
    }

    #[test]
    fn line_search_rejects_disconnecting_trials() {
        let obj = Objective::new(identity2());
        let x = w(1.0);
        let eval = obj.evaluate(&x).unwrap();
        // A huge gradient pushes every trial to zero until eta is tiny.
        let cfg = SolverConfig {
            m_max: 3,
            ..SolverConfig::new(1)
        };
        let out = line_search(&obj, &x, eval.value, &[1e6], &cfg).unwrap();
        assert!(matches!(
            out,
            LineSearchOutcome::Stalled {
                last_feasible_mapping_norm: None
            }
        ));
        assert_eq!(out.gradient_mapping_norm(), f64::INFINITY);
    }

    #[test]
    fn solves_two_vertex_problem() {
        let res = solve(&identity2(), &SolverConfig::new(1), None).unwrap();
        assert_eq!(res.status, SolveStatus::Converged);
        assert!((res.x.as_slice()[0] - 0.5).abs() <= 1e-6);
        assert!(res.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn config_validation() {
        let p = 4;
        assert!(SolverConfig::new(2).validate(p).is_err());
        assert!(SolverConfig {
            sigma: 0.0,
            ..SolverConfig::new(3)
        }
        .validate(p)
        .is_err());
        assert!(SolverConfig {
            beta: 1.0,
            ..SolverConfig::new(3)
        }
        .validate(p)
        .is_err());
        assert!(SolverConfig {
            alpha: 0.0,
            ..SolverConfig::new(3)
        }
        .validate(p)
        .is_err());
        assert!(SolverConfig {
            tol: 0.0,
            ..SolverConfig::new(3)
        }
        .validate(p)
        .is_err());
        assert!(SolverConfig {
            m_max: 0,
            ..SolverConfig::new(3)
        }
        .validate(p)
        .is_err());
        assert!(SolverConfig::new(3).validate(p).is_ok());
    }

    #[test]
    fn infeasible_start_rejected() {
        let s = SampleCovariance::new(DMatrix::identity(3, 3), 1).unwrap();
        let x0 = WeightVector::new(3, vec![1.0, 0.0, 0.0]).unwrap();
        assert!(solve(&s, &SolverConfig::new(2), Some(&x0)).is_err());
        assert!(solve(&s, &SolverConfig::new(1), None).is_err());
    }

    fn spread_covariance(p: usize) -> SampleCovariance {
        let a = DMatrix::from_fn(p, p, |i, j| {
            ((i * 7 + j * 3) % 5) as f64 - 2.0 + if i == j { 3.0 } else { 0.0 }
        });
        SampleCovariance::new(&a * a.transpose() / p as f64, 10).unwrap()
    }

    #[test]
    fn tree_start_is_stationary_on_its_edges() {
        let cov = spread_covariance(5);
        let objective = Objective::new(cov);
        let x0 = WeightVector::constant(5, 0.2).unwrap();
        let tree = spanning_tree_start(&objective, &x0, 1.0).unwrap();
        assert_eq!(tree.nnz(), 4);
        let eval = objective.evaluate(&tree).unwrap();
        assert!(eval.is_positive_definite());
        let grad = objective.gradient(&tree, &eval).unwrap();
        for (w, g) in tree.as_slice().iter().zip(&grad) {
            if *w > 0.0 {
                assert!(
                    g.abs() <= 1e-9 * (1.0 + w.recip()),
                    "gradient {g} on a tree edge"
                );
            }
        }
    }

    #[test]
    fn normalized_estimate_follows_data_scale() {
        let cov = spread_covariance(6);
        let cfg = SolverConfig::new(7);
        let base = solve_normalized(&cov, &cfg, None, &mut |_| {}).unwrap();
        for c in [1e-4, 1e3] {
            let scaled = cov.scaled(c);
            let r = solve_normalized(&scaled, &cfg, None, &mut |_| {}).unwrap();
            assert_eq!(r.status, base.status);
            for (a, b) in r.x.as_slice().iter().zip(base.x.as_slice()) {
                assert!((a * c - b).abs() <= 1e-6 * (1.0 + b), "c = {c}: {a} vs {b}");
            }
            let shifted = base.objective() + 5.0 * c.ln();
            assert!((r.objective() - shifted).abs() <= 1e-8 * (1.0 + shifted.abs()));
            let direct = Objective::new(scaled).evaluate(&r.x).unwrap().value;
            assert!((r.objective() - direct).abs() <= 1e-8 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn result_always_respects_the_budget() {
        let cov = spread_covariance(5);
        let dense = WeightVector::constant(5, 0.3).unwrap();
        let cfg = SolverConfig {
            max_iter: 0,
            ..SolverConfig::new(4)
        };
        for x0 in [None, Some(&dense)] {
            let r = solve(&cov, &cfg, x0).unwrap();
            assert_eq!(r.status, SolveStatus::MaxIterations);
            assert_eq!(r.start, StartPoint::SpanningTree);
            assert!(r.x.nnz() <= 4);
        }
    }
}
