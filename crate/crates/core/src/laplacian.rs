//! The Laplacian operator `x ↦ Lx`, its adjoint, and the edge indexing that
//! links the two domains.
//!
//! A graph on `p` vertices has `d = p(p-1)/2` candidate edges. Edge `(i, j)`
//! with `i > j` (1-based) lives at vector position
//! `k = i - j + (j-1)(2p-j)/2`, so the vector walks the strict lower triangle
//! column by column. Only [`edge_index`] and [`edge_pair`] speak 1-based
//! indices; everything that touches storage goes through [`pairs`].

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Number of candidate edges on `p` vertices.
pub fn edge_count(p: usize) -> usize {
    p * p.saturating_sub(1) / 2
}

/// 1-based vector index of the edge between vertices `i > j` (both 1-based).
pub fn edge_index(i: usize, j: usize, p: usize) -> Result<usize> {
    if j < 1 || i <= j || i > p {
        return Err(Error::invalid(format!(
            "edge ({i}, {j}) is not a valid pair with 1 <= j < i <= p = {p}"
        )));
    }
    Ok(i - j + (j - 1) * (2 * p - j) / 2)
}

/// Inverse of [`edge_index`]: the 1-based pair `(i, j)`, `i > j`, stored at
/// 1-based position `k`.
pub fn edge_pair(k: usize, p: usize) -> Result<(usize, usize)> {
    let d = edge_count(p);
    if k < 1 || k > d {
        return Err(Error::invalid(format!(
            "edge index {k} outside 1..={d} for p = {p}"
        )));
    }
    // Column j holds p - j entries.
    let mut offset = 0;
    for j in 1..p {
        let len = p - j;
        if k <= offset + len {
            return Ok((j + (k - offset), j));
        }
        offset += len;
    }
    unreachable!("k was range-checked against d")
}

/// 0-based `(row, col)` pairs, `row > col`, in storage order.
pub fn pairs(p: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..p).flat_map(move |j| (j + 1..p).map(move |i| (i, j)))
}

/// Nonnegative edge weights of a graph on `p` vertices, one per vertex pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    p: usize,
    entries: Vec<f64>,
}

impl WeightVector {
    pub fn new(p: usize, entries: Vec<f64>) -> Result<Self> {
        if p < 2 {
            return Err(Error::invalid(format!("need at least 2 vertices, got {p}")));
        }
        if entries.len() != edge_count(p) {
            return Err(Error::invalid(format!(
                "weight vector for p = {p} needs {} entries, got {}",
                edge_count(p),
                entries.len()
            )));
        }
        Ok(WeightVector { p, entries })
    }

    pub fn zeros(p: usize) -> Result<Self> {
        Self::new(p, vec![0.0; edge_count(p)])
    }

    /// Every pair carries weight `value`, i.e. a complete graph.
    pub fn constant(p: usize, value: f64) -> Result<Self> {
        Self::new(p, vec![value; edge_count(p)])
    }

    /// Build from 1-based `(i, j, weight)` triples; unlisted pairs are zero.
    pub fn from_edges(p: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut x = Self::zeros(p)?;
        for &(i, j, w) in edges {
            let (hi, lo) = if i > j { (i, j) } else { (j, i) };
            let k = edge_index(hi, lo, p)?;
            x.entries[k - 1] = w;
        }
        Ok(x)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.entries.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    /// Nonzero edges as 1-based `(i, j, weight)` with `i > j`, in storage order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        pairs(self.p)
            .zip(&self.entries)
            .filter(|(_, &w)| w != 0.0)
            .map(|((i, j), &w)| (i + 1, j + 1, w))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        WeightVector {
            p: self.p,
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }
}

/// `Lx`: off-diagonals `-x_k`, diagonal the negated off-diagonal row sum.
pub fn laplacian_from_weights(x: &WeightVector) -> DMatrix<f64> {
    let p = x.p();
    let mut m = DMatrix::zeros(p, p);
    for ((i, j), &w) in pairs(p).zip(x.as_slice()) {
        m[(i, j)] = -w;
        m[(j, i)] = -w;
        m[(i, i)] += w;
        m[(j, j)] += w;
    }
    m
}

/// `L*Y`, entry `k` is `Y_ii - Y_ij - Y_ji + Y_jj`. `Y` need not be symmetric.
pub fn adjoint(y: &DMatrix<f64>) -> Result<Vec<f64>> {
    let p = y.nrows();
    if y.ncols() != p || p < 2 {
        return Err(Error::invalid(format!(
            "adjoint needs a square matrix with p >= 2, got {}x{}",
            y.nrows(),
            y.ncols()
        )));
    }
    Ok(pairs(p)
        .map(|(i, j)| y[(i, i)] - y[(i, j)] - y[(j, i)] + y[(j, j)])
        .collect())
}

/// The constant matrix `J = (1/p) 11ᵀ`.
pub fn shift_matrix(p: usize) -> DMatrix<f64> {
    DMatrix::from_element(p, p, 1.0 / p as f64)
}

const LAPLACIAN_TOL: f64 = 1e-9;

/// Recover `x` from a Laplacian, so that `laplacian_from_weights(x)` gives it back.
pub fn weights_from_laplacian(m: &DMatrix<f64>) -> Result<WeightVector> {
    let p = m.nrows();
    if m.ncols() != p {
        return Err(Error::invalid(format!(
            "Laplacian must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let bad = |row, col, value, reason| Error::NotALaplacian {
        row: row + 1,
        col: col + 1,
        value,
        reason,
    };
    for i in 0..p {
        let mut row_sum = 0.0;
        for j in 0..p {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(bad(i, j, v, "non-finite entry"));
            }
            if i != j {
                if v > LAPLACIAN_TOL {
                    return Err(bad(i, j, v, "positive off-diagonal"));
                }
                if (v - m[(j, i)]).abs() > LAPLACIAN_TOL {
                    return Err(bad(i, j, v, "not symmetric"));
                }
            }
            row_sum += v;
        }
        if row_sum.abs() > LAPLACIAN_TOL {
            return Err(bad(i, i, m[(i, i)], "row does not sum to zero"));
        }
    }
    // Rounding within tolerance is clipped so the result stays nonnegative.
    let entries = pairs(p).map(|(i, j)| (-m[(i, j)]).max(0.0)).collect();
    WeightVector::new(p, entries)
}
