//! Dense linear-system solvers built on relaxed Jacobi and Gauss-Seidel
//! sweeps, with hybrid evolutionary variants that self-adapt the
//! relaxation factor through a time-variant stochastic rule.
//!
//! - [`linalg`]: dense matrices, residuals, a direct-solve oracle
//! - [`iteration`]: relaxed Jacobi / Gauss-Seidel steps and their operators
//! - [`evolution`]: the JBTVA/GSBTVA family and fixed-factor baselines
//! - [`problems`]: the P1-P11 generators and the problem-spec format
//! - [`bench`]: seeded benchmark plans, CSV output and SVG traces

pub mod bench;
pub mod error;
pub mod evolution;
pub mod iteration;
pub mod linalg;
pub mod problems;
pub mod seeding;

pub use error::{Error, Result};
pub use evolution::{run_solver, RunResult, SolverConfig, Variant};
pub use linalg::{DenseMatrix, LinearSystem, Vector};
