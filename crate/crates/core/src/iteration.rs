//! Relaxed Jacobi (JOR) and relaxed Gauss-Seidel (SOR) steps.
//!
//! Both steps are affine maps `x -> Hx + V`. The sweeps never form `H`;
//! [`explicit_operator`] builds it densely so small systems can be checked
//! against the sweeps.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix, LinearSystem, Vector};

/// A relaxation factor strictly inside its admissible interval.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RelaxationFactor(f64);

impl RelaxationFactor {
    pub fn new(omega: f64, lo: f64, hi: f64) -> Result<Self> {
        if omega > lo && omega < hi {
            Ok(RelaxationFactor(omega))
        } else {
            Err(Error::InvalidConfig(format!("relaxation factor {omega} outside ({lo}, {hi})")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Which classical iteration a sweep relaxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Jacobi,
    GaussSeidel,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Jacobi => "jacobi",
            Method::GaussSeidel => "gauss_seidel",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jacobi" => Ok(Method::Jacobi),
            "gauss_seidel" | "gauss-seidel" | "gs" => Ok(Method::GaussSeidel),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

/// Dense iteration matrix `h` and offset `v` with `step(x) = h x + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationOperator {
    pub h: DenseMatrix,
    pub v: Vector,
}

impl IterationOperator {
    pub fn apply(&self, x: &[f64]) -> Result<Vector> {
        let mut out = crate::linalg::matvec(&self.h, x)?;
        for (o, v) in out.iter_mut().zip(self.v.iter()) {
            *o += v;
        }
        Ok(out)
    }
}

fn check_len(sys: &LinearSystem, x: &[f64]) -> Result<()> {
    if x.len() == sys.n() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: sys.n(), found: x.len() })
    }
}

/// One relaxed Jacobi step; every component is computed from the old `x`.
pub fn jacobi_sr_step(sys: &LinearSystem, x: &[f64], omega: f64) -> Result<Vector> {
    check_len(sys, x)?;
    let mut out = vec![0.0; x.len()];
    jacobi_sweep_into(sys, x, omega, &mut out);
    Ok(out.into())
}

/// One forward relaxed Gauss-Seidel sweep; updated components are used as
/// soon as they are available.
pub fn gauss_seidel_sr_step(sys: &LinearSystem, x: &[f64], omega: f64) -> Result<Vector> {
    check_len(sys, x)?;
    let mut out = x.to_vec();
    gauss_seidel_sweep_in_place(sys, &mut out, omega);
    Ok(out.into())
}

pub fn sr_step(sys: &LinearSystem, x: &[f64], omega: f64, method: Method) -> Result<Vector> {
    match method {
        Method::Jacobi => jacobi_sr_step(sys, x, omega),
        Method::GaussSeidel => gauss_seidel_sr_step(sys, x, omega),
    }
}

pub(crate) fn jacobi_sweep_into(sys: &LinearSystem, x: &[f64], omega: f64, out: &mut [f64]) {
    let a = sys.matrix();
    let b = sys.rhs();
    for i in 0..x.len() {
        let row = a.row(i);
        let d = row[i];
        let off = dot(row, x) - d * x[i];
        out[i] = (1.0 - omega) * x[i] + omega / d * (b[i] - off);
    }
}

pub(crate) fn gauss_seidel_sweep_in_place(sys: &LinearSystem, x: &mut [f64], omega: f64) {
    let a = sys.matrix();
    let b = sys.rhs();
    for i in 0..x.len() {
        let row = a.row(i);
        let d = row[i];
        // x[..i] already holds the new iterate, x[i + 1..] the old one
        let off = dot(&row[..i], &x[..i]) + dot(&row[i + 1..], &x[i + 1..]);
        x[i] = (1.0 - omega) * x[i] + omega / d * (b[i] - off);
    }
}

/// Builds the dense operator `(H, V)` realized by the corresponding sweep.
///
/// Jacobi: `H = (1-w)I - w D^-1 (L+U)`, `V = w D^-1 b`.
/// Gauss-Seidel: `H = (I + w D^-1 L)^-1 ((1-w)I - w D^-1 U)`,
/// `V = w (I + w D^-1 L)^-1 D^-1 b`, with the unit lower-triangular inverse
/// applied by forward substitution. Intended for small `n` only.
pub fn explicit_operator(sys: &LinearSystem, omega: f64, method: Method) -> IterationOperator {
    let n = sys.n();
    let a = sys.matrix();
    let b = sys.rhs();

    let mut h = vec![0.0; n * n];
    let mut v = vec![0.0; n];
    match method {
        Method::Jacobi => {
            for i in 0..n {
                let d = a.diag(i);
                for j in 0..n {
                    h[i * n + j] = if i == j { 1.0 - omega } else { -omega * a.get(i, j) / d };
                }
                v[i] = omega * b[i] / d;
            }
        }
        Method::GaussSeidel => {
            // K = (1-w)I - w D^-1 U and c = w D^-1 b
            let mut k = vec![0.0; n * n];
            let mut c = vec![0.0; n];
            for i in 0..n {
                let d = a.diag(i);
                k[i * n + i] = 1.0 - omega;
                for j in i + 1..n {
                    k[i * n + j] = -omega * a.get(i, j) / d;
                }
                c[i] = omega * b[i] / d;
            }
            // Solve (I + w D^-1 L) [H | V] = [K | c] row by row.
            for i in 0..n {
                let d = a.diag(i);
                for col in 0..n {
                    let mut s = k[i * n + col];
                    for j in 0..i {
                        s -= omega * a.get(i, j) / d * h[j * n + col];
                    }
                    h[i * n + col] = s;
                }
                let mut s = c[i];
                for (j, &vj) in v[..i].iter().enumerate() {
                    s -= omega * a.get(i, j) / d * vj;
                }
                v[i] = s;
            }
        }
    }
    IterationOperator { h: DenseMatrix::from_row_major(n, h).expect("operator entries are finite"), v: v.into() }
}
