//! Reference computations for the acceptance suite. Nothing here calls the
//! library's objective, projection or solver code.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use sparselap_core::DMatrix;

/// All 0-based pairs `(i, j)`, `i > j`, in column-major lower-triangle order.
pub fn pair_list(p: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..p {
        for i in j + 1..p {
            out.push((i, j));
        }
    }
    out
}

pub fn laplacian(p: usize, x: &[f64]) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(p, p);
    for (&(i, j), &w) in pair_list(p).iter().zip(x) {
        l[(i, j)] -= w;
        l[(j, i)] -= w;
        l[(i, i)] += w;
        l[(j, j)] += w;
    }
    l
}

/// `-ln det(Lx + J) + tr(S Lx)` through an LU determinant, or `None` when the
/// determinant is not positive.
pub fn objective(p: usize, x: &[f64], s: &DMatrix<f64>) -> Option<f64> {
    let m = laplacian(p, x) + DMatrix::from_element(p, p, 1.0 / p as f64);
    let det = m.clone().lu().determinant();
    if det.is_nan() || det <= 0.0 {
        return None;
    }
    let trace = (s * laplacian(p, x)).trace();
    Some(-det.ln() + trace)
}

/// Gradient through an explicit inverse.
pub fn gradient(p: usize, x: &[f64], s: &DMatrix<f64>) -> Vec<f64> {
    let m = laplacian(p, x) + DMatrix::from_element(p, p, 1.0 / p as f64);
    let inv = m.try_inverse().expect("invertible");
    pair_list(p)
        .iter()
        .map(|&(i, j)| {
            let sk = s[(i, i)] + s[(j, j)] - 2.0 * s[(i, j)];
            let ik = inv[(i, i)] + inv[(j, j)] - 2.0 * inv[(i, j)];
            sk - ik
        })
        .collect()
}

/// Breadth-first connectivity of the support of `x`.
pub fn support_connected(p: usize, x: &[f64]) -> bool {
    let pairs = pair_list(p);
    let mut seen = vec![false; p];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for (&(i, j), &w) in pairs.iter().zip(x) {
            if w == 0.0 {
                continue;
            }
            let other = if i == v {
                j
            } else if j == v {
                i
            } else {
                continue;
            };
            if !seen[other] {
                seen[other] = true;
                stack.push(other);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// All `k`-subsets of `0..n`.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            if n - v < k - cur.len() {
                break;
            }
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Minimize the objective over `x >= 0` supported on `support`, by projected
/// gradient descent with backtracking run to a tight tolerance.
pub fn minimize_on_support(
    p: usize,
    support: &[usize],
    s: &DMatrix<f64>,
) -> Option<(f64, Vec<f64>)> {
    let d = p * (p - 1) / 2;
    let mut x = vec![0.0; d];
    for &k in support {
        x[k] = 1.0;
    }
    if !support_connected(p, &x) {
        return None;
    }
    let mut f = objective(p, &x, s)?;
    let mut step: f64 = 1.0;
    for _ in 0..200_000 {
        let g = gradient(p, &x, s);
        let mut accepted = None;
        let mut eta = (step * 4.0).min(1e6);
        for _ in 0..80 {
            let mut trial = vec![0.0; d];
            for &k in support {
                trial[k] = (x[k] - eta * g[k]).max(0.0);
            }
            let diff2: f64 = support.iter().map(|&k| (x[k] - trial[k]).powi(2)).sum();
            if let Some(ft) = objective(p, &trial, s) {
                if ft <= f - 1e-4 * diff2 / eta {
                    accepted = Some((trial, ft, diff2));
                    break;
                }
            }
            eta *= 0.5;
        }
        let Some((trial, ft, diff2)) = accepted else {
            break;
        };
        step = eta;
        x = trial;
        let done = (diff2.sqrt() / eta) < 1e-11 || f - ft < 1e-15;
        f = ft;
        if done {
            break;
        }
    }
    Some((f, x))
}

/// Exhaustive minimum of the objective over all supports of size `s`.
pub fn exhaustive_minimum(p: usize, budget: usize, cov: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let d = p * (p - 1) / 2;
    subsets(d, budget)
        .iter()
        .filter_map(|supp| minimize_on_support(p, supp, cov))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("some support is connected")
}

pub fn random_matrix(rng: &mut impl Rng, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0))
}

/// A random positive definite covariance.
pub fn random_covariance(rng: &mut impl Rng, p: usize) -> DMatrix<f64> {
    let a = random_matrix(rng, p);
    &a * a.transpose() / p as f64 + DMatrix::identity(p, p) * 0.1
}

/// Uniformly chosen connected support with exactly `m` edges, weights `U(2, 5)`.
pub fn random_connected_weights(rng: &mut impl Rng, p: usize, m: usize) -> Vec<f64> {
    let d = p * (p - 1) / 2;
    loop {
        let mut idx: Vec<usize> = (0..d).collect();
        idx.shuffle(rng);
        let mut v = vec![0.0; d];
        for &k in &idx[..m] {
            v[k] = rng.random_range(2.0..5.0);
        }
        if support_connected(p, &v) {
            return v;
        }
    }
}

/// Smallest squared distance from `z` to a nonnegative vector with at most
/// `s` nonzeros, by enumerating every support.
pub fn projection_distance(z: &[f64], s: usize) -> f64 {
    let d = z.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize > s {
            continue;
        }
        let dist: f64 = z
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                if mask >> k & 1 == 1 {
                    v.min(0.0).powi(2)
                } else {
                    v * v
                }
            })
            .sum();
        best = best.min(dist);
    }
    best
}
