//! Hybrid evolutionary solvers that self-adapt the relaxation factor.
//!
//! Each generation runs: optional recombination with a fresh random
//! stochastic matrix, one relaxed sweep per slot (mutation), pairwise
//! time-variant adaptation of the slot factors, then truncation selection.
//! The modified variants (`MJBTVA`, `MGSBTVA`) skip recombination and are
//! otherwise identical.
//!
//! Random draws come from one ChaCha8 stream per run, consumed in a fixed
//! order: the initial states slot by slot, then per generation the
//! stochastic matrix row by row (recombining variants only) followed by
//! `(g_x, g_y)` for each adaptation pair in slot order.

mod adapt;
mod population;

pub use adapt::{
    adapt_pair, apply_adaptation, basic_time_variant, draw_gaussians, init_relaxation_factors, TvaProbabilities,
    NOISE_STD_DEV, OMEGA_MARGIN,
};
pub use population::{
    init_population, make_stochastic_matrix, mutate_and_evaluate, recombine, select_and_reproduce, Individual,
    Population, Slot, StochasticMatrix,
};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iteration::{sr_step, Method, RelaxationFactor};
use crate::linalg::{residual_norm_unchecked, LinearSystem, Vector};
use crate::seeding::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Variant {
    /// Jacobi-SR based time-variant adaptive, with recombination.
    Jbtva,
    /// Gauss-Seidel-SR based time-variant adaptive, with recombination.
    Gsbtva,
    /// `Jbtva` without recombination.
    Mjbtva,
    /// `Gsbtva` without recombination.
    Mgsbtva,
    /// Plain relaxed Jacobi with a fixed factor.
    FixedJacobiSr,
    /// Plain relaxed Gauss-Seidel with a fixed factor.
    FixedGsSr,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Jbtva,
        Variant::Gsbtva,
        Variant::Mjbtva,
        Variant::Mgsbtva,
        Variant::FixedJacobiSr,
        Variant::FixedGsSr,
    ];

    pub fn method(self) -> Method {
        match self {
            Variant::Jbtva | Variant::Mjbtva | Variant::FixedJacobiSr => Method::Jacobi,
            Variant::Gsbtva | Variant::Mgsbtva | Variant::FixedGsSr => Method::GaussSeidel,
        }
    }

    pub fn recombines(self) -> bool {
        matches!(self, Variant::Jbtva | Variant::Gsbtva)
    }

    pub fn is_fixed(self) -> bool {
        matches!(self, Variant::FixedJacobiSr | Variant::FixedGsSr)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Jbtva => "JBTVA",
            Variant::Gsbtva => "GSBTVA",
            Variant::Mjbtva => "MJBTVA",
            Variant::Mgsbtva => "MGSBTVA",
            Variant::FixedJacobiSr => "FIXED_JACOBI_SR",
            Variant::FixedGsSr => "FIXED_GS_SR",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_uppercase().replace('-', "_");
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == wanted)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown variant '{}'", s.trim())))
    }
}

/// Constants of the time-variant adaptation rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveParams {
    pub e_x: f64,
    pub e_y: f64,
    pub lambda: f64,
    pub omega_lo: f64,
    pub omega_hi: f64,
}

impl Default for AdaptiveParams {
    fn default() -> Self {
        AdaptiveParams { e_x: 0.125, e_y: 0.03125, lambda: 50.0, omega_lo: 0.0, omega_hi: 2.0 }
    }
}

impl AdaptiveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.e_x > 0.0 && self.e_y > 0.0) {
            return Err(Error::InvalidConfig("e_x and e_y must be positive".into()));
        }
        if self.lambda.is_nan() || self.lambda <= 10.0 {
            return Err(Error::InvalidConfig(format!("lambda must exceed 10, got {}", self.lambda)));
        }
        if !self.omega_lo.is_finite()
            || !self.omega_hi.is_finite()
            || self.omega_hi - self.omega_lo <= 2.0 * OMEGA_MARGIN
        {
            return Err(Error::InvalidConfig("omega bounds must satisfy lo < hi".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub variant: Variant,
    pub population_size: usize,
    pub threshold: f64,
    pub max_generations: u64,
    pub divergence_bound: f64,
    pub seed: u64,
    pub adaptive: AdaptiveParams,
    /// Relaxation factor for the `Fixed*` variants.
    pub fixed_omega: f64,
    pub init_lo: f64,
    pub init_hi: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            variant: Variant::Jbtva,
            population_size: 2,
            threshold: 1e-7,
            max_generations: 10_000,
            divergence_bound: 1e12,
            seed: 0,
            adaptive: AdaptiveParams::default(),
            fixed_omega: 1.0,
            init_lo: -30.0,
            init_hi: 30.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.adaptive.validate()?;
        if self.threshold.is_nan() || self.threshold <= 0.0 {
            return Err(Error::InvalidConfig("threshold must be positive".into()));
        }
        if self.divergence_bound.is_nan() || self.divergence_bound <= 0.0 {
            return Err(Error::InvalidConfig("divergence bound must be positive".into()));
        }
        if !self.init_lo.is_finite() || !self.init_hi.is_finite() || self.init_lo >= self.init_hi {
            return Err(Error::InvalidConfig("initialization bounds must satisfy lo < hi".into()));
        }
        if self.variant.is_fixed() {
            RelaxationFactor::new(self.fixed_omega, self.adaptive.omega_lo, self.adaptive.omega_hi)?;
        } else if self.population_size < 2 || !self.population_size.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "population size must be even and >= 2, got {}",
                self.population_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub generations: u64,
    /// Wall time of the generation loop in milliseconds.
    pub elapsed_ms: f64,
    pub final_residual: f64,
    pub converged: bool,
    /// Stopped because the best residual exceeded the divergence bound or
    /// became NaN.
    pub diverged: bool,
    /// `(generation, best residual)` starting at generation 0.
    pub trace: Vec<(u64, f64)>,
    pub final_omegas: Vec<f64>,
    pub best_state: Vector,
    /// Number of recombination steps performed.
    pub recombinations: u64,
}

enum Stop {
    Converged,
    Capped,
    Diverged,
}

fn check_stop(best: f64, t: u64, cfg: &SolverConfig) -> Option<Stop> {
    if best < cfg.threshold {
        Some(Stop::Converged)
    } else if best.is_nan() || best > cfg.divergence_bound {
        Some(Stop::Diverged)
    } else if t >= cfg.max_generations {
        Some(Stop::Capped)
    } else {
        None
    }
}

/// Runs the configured solver on `sys`.
pub fn run_solver(sys: &LinearSystem, cfg: &SolverConfig) -> Result<RunResult> {
    cfg.validate()?;
    if cfg.variant.is_fixed() {
        Ok(run_fixed(sys, cfg))
    } else {
        run_hybrid(sys, cfg)
    }
}

fn run_hybrid(sys: &LinearSystem, cfg: &SolverConfig) -> Result<RunResult> {
    let mut rng = seeded_rng(cfg.seed);
    let method = cfg.variant.method();
    let mut pop = init_population(sys, cfg, &mut rng);
    let mut recombinations = 0u64;

    let (_, mut best) = pop.best().expect("population is non-empty");
    let mut trace = vec![(0, best)];

    let start = Instant::now();
    let stop = loop {
        if let Some(stop) = check_stop(best, pop.generation, cfg) {
            break stop;
        }
        if cfg.variant.recombines() {
            let r = make_stochastic_matrix(pop.len(), &mut rng);
            pop = recombine(&pop, &r)?;
            recombinations += 1;
        }
        pop = mutate_and_evaluate(pop, sys, method);

        let t = pop.generation;
        for pair in pop.slots.chunks_exact_mut(2) {
            let (x, y) = (&pair[0], &pair[1]);
            let (wx, wy) = adapt_pair(
                x.omega.value(),
                y.omega.value(),
                x.individual.fitness.unwrap_or(f64::NAN),
                y.individual.fitness.unwrap_or(f64::NAN),
                t,
                &cfg.adaptive,
                &mut rng,
            );
            let (lo, hi) = (cfg.adaptive.omega_lo, cfg.adaptive.omega_hi);
            pair[0].omega = RelaxationFactor::new(wx, lo, hi)?;
            pair[1].omega = RelaxationFactor::new(wy, lo, hi)?;
        }

        pop = select_and_reproduce(pop)?;
        pop.generation += 1;
        best = pop.best().expect("population is non-empty").1;
        trace.push((pop.generation, best));
    };
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    let (best_idx, _) = pop.best().expect("population is non-empty");
    Ok(RunResult {
        generations: pop.generation,
        elapsed_ms,
        final_residual: best,
        converged: matches!(stop, Stop::Converged),
        diverged: matches!(stop, Stop::Diverged),
        trace,
        final_omegas: pop.omegas(),
        best_state: pop.slots[best_idx].individual.state.clone(),
        recombinations,
    })
}

/// Classical relaxed iteration from the zero vector with a fixed factor.
fn run_fixed(sys: &LinearSystem, cfg: &SolverConfig) -> RunResult {
    let method = cfg.variant.method();
    let mut x = Vector::zeros(sys.n());
    let mut residual = residual_norm_unchecked(sys, &x);
    let mut trace = vec![(0, residual)];
    let mut t = 0u64;

    let start = Instant::now();
    let stop = loop {
        if let Some(stop) = check_stop(residual, t, cfg) {
            break stop;
        }
        x = sr_step(sys, &x, cfg.fixed_omega, method).expect("state length matches system");
        residual = residual_norm_unchecked(sys, &x);
        t += 1;
        trace.push((t, residual));
    };
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;

    RunResult {
        generations: t,
        elapsed_ms,
        final_residual: residual,
        converged: matches!(stop, Stop::Converged),
        diverged: matches!(stop, Stop::Diverged),
        trace,
        final_omegas: vec![cfg.fixed_omega],
        best_state: x,
        recombinations: 0,
    }
}
