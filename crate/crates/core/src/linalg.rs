//! Dense matrix and vector arithmetic for square linear systems `Ax = b`.
//!
//! The diagonal/strictly-lower/strictly-upper split of `A` is never stored;
//! the iteration routines read it directly from the row-major entries.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// Smallest diagonal magnitude a [`LinearSystem`] accepts.
pub const MIN_DIAGONAL: f64 = 1e-12;

/// A real vector of length `n`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    /// Wraps `values`, rejecting NaN or infinite components.
    pub fn try_finite(values: Vec<f64>) -> Result<Self> {
        if values.iter().all(|v| v.is_finite()) {
            Ok(Vector(values))
        } else {
            Err(Error::NonFinite { what: "vector" })
        }
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }
}

impl From<Vec<f64>> for Vector {
    fn from(values: Vec<f64>) -> Self {
        Vector(values)
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Square dense matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    /// Builds an `n x n` matrix from row-major entries.
    pub fn from_row_major(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("matrix order must be positive".into()));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: entries.len() });
        }
        if !entries.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { what: "matrix" });
        }
        Ok(DenseMatrix { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            entries.extend_from_slice(row);
        }
        Self::from_row_major(n, entries)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        DenseMatrix { n, entries }
    }

    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, entries: vec![0.0; n * n] }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn diag(&self, i: usize) -> f64 {
        self.entries[i * self.n + i]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.entries
    }

    /// Returns `c * self`.
    pub fn scaled(&self, c: f64) -> Self {
        DenseMatrix { n: self.n, entries: self.entries.iter().map(|v| c * v).collect() }
    }
}

/// A square system `Ax = b` with a safely nonzero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    a: DenseMatrix,
    b: Vector,
}

impl LinearSystem {
    pub fn new(a: DenseMatrix, b: Vector) -> Result<Self> {
        let n = a.order();
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        if !b.is_finite() {
            return Err(Error::NonFinite { what: "right-hand side" });
        }
        for i in 0..n {
            let d = a.diag(i);
            if d.abs() < MIN_DIAGONAL {
                return Err(Error::SmallDiagonal { row: i, value: d });
            }
        }
        Ok(LinearSystem { a, b })
    }

    pub fn n(&self) -> usize {
        self.a.order()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &Vector {
        &self.b
    }

    /// Scales both `A` and `b` by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        LinearSystem::new(self.a.scaled(c), self.b.iter().map(|v| c * v).collect::<Vec<_>>().into())
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Dot product over eight independent partial sums so the loop vectorizes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    const LANES: usize = 8;
    let len = a.len().min(b.len());
    let (a, b) = (&a[..len], &b[..len]);
    let mut acc = [0.0; LANES];
    let mut ca = a.chunks_exact(LANES);
    let mut cb = b.chunks_exact(LANES);
    for (xa, xb) in (&mut ca).zip(&mut cb) {
        for k in 0..LANES {
            acc[k] += xa[k] * xb[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    let pairs = [acc[0] + acc[4], acc[1] + acc[5], acc[2] + acc[6], acc[3] + acc[7]];
    (pairs[0] + pairs[2]) + (pairs[1] + pairs[3]) + tail
}

/// Computes `Ax`.
pub fn matvec(a: &DenseMatrix, x: &[f64]) -> Result<Vector> {
    let n = a.order();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    Ok((0..n).map(|i| dot(a.row(i), x)).collect::<Vec<_>>().into())
}

/// Euclidean norm of the residual `Ax - b`.
pub fn residual_norm(sys: &LinearSystem, x: &[f64]) -> Result<f64> {
    let n = sys.n();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    Ok(residual_norm_unchecked(sys, x))
}

pub(crate) fn residual_norm_unchecked(sys: &LinearSystem, x: &[f64]) -> f64 {
    let a = sys.matrix();
    let b = sys.rhs();
    (0..sys.n())
        .map(|i| {
            let r = dot(a.row(i), x) - b[i];
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Solves the system by Gaussian elimination with partial pivoting.
///
/// Used as a verification oracle for the iterative solvers.
pub fn direct_solve(sys: &LinearSystem) -> Result<Vector> {
    let n = sys.n();
    let mut m = sys.matrix().as_row_major().to_vec();
    let mut rhs = sys.rhs().to_vec();
    let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let tol = scale * f64::EPSILON * n as f64;

    for k in 0..n {
        let (pivot_row, pivot_abs) =
            (k..n)
                .map(|i| (i, m[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs <= tol {
            return Err(Error::Singular { column: k });
        }
        if pivot_row != k {
            for j in 0..n {
                m.swap(k * n + j, pivot_row * n + j);
            }
            rhs.swap(k, pivot_row);
        }
        let pivot = m[k * n + k];
        for i in k + 1..n {
            let factor = m[i * n + k] / pivot;
            if factor == 0.0 {
                continue;
            }
            m[i * n + k] = 0.0;
            for j in k + 1..n {
                m[i * n + j] -= factor * m[k * n + j];
            }
            rhs[i] -= factor * rhs[k];
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|j| m[i * n + j] * x[j]).sum();
        x[i] = (rhs[i] - tail) / m[i * n + i];
    }
    Ok(x.into())
}
