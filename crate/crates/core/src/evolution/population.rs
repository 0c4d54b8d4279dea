//! Population state and the recombination, mutation and selection operators.

use rand::Rng;

use crate::error::{Error, Result};
use crate::iteration::{gauss_seidel_sweep_in_place, jacobi_sweep_into, Method, RelaxationFactor};
use crate::linalg::{residual_norm_unchecked, LinearSystem, Vector};
use crate::seeding::uniform_open;

use super::adapt::init_relaxation_factors;
use super::SolverConfig;

/// A candidate solution and, once evaluated, its residual norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub state: Vector,
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn unevaluated(state: Vector) -> Self {
        Individual { state, fitness: None }
    }

    pub fn evaluated(sys: &LinearSystem, state: Vector) -> Self {
        let fitness = residual_norm_unchecked(sys, &state);
        Individual { state, fitness: Some(fitness) }
    }
}

/// One population position. The relaxation factor belongs to the slot, not
/// to the individual occupying it.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub individual: Individual,
    pub omega: RelaxationFactor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub slots: Vec<Slot>,
    pub generation: u64,
}

impl Population {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.slots.iter().map(|s| s.omega.value()).collect()
    }

    /// Index and fitness of the best evaluated individual; lower index wins
    /// ties and NaN ranks last.
    pub fn best(&self) -> Option<(usize, f64)> {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.individual.fitness.map(|f| (i, f)))
            .min_by(|a, b| rank_key(a.1).total_cmp(&rank_key(b.1)).then(a.0.cmp(&b.0)))
    }
}

fn rank_key(fitness: f64) -> f64 {
    if fitness.is_nan() {
        f64::INFINITY
    } else {
        fitness
    }
}

/// Draws `N` uniform states over `(init_lo, init_hi)`, assigns the evenly
/// spaced slot factors, and evaluates every individual.
pub fn init_population<R: Rng + ?Sized>(sys: &LinearSystem, cfg: &SolverConfig, rng: &mut R) -> Population {
    let n = sys.n();
    let omegas = init_relaxation_factors(cfg.population_size, &cfg.adaptive);
    let slots = omegas
        .into_iter()
        .map(|w| {
            let state: Vec<f64> = (0..n).map(|_| uniform_open(rng, cfg.init_lo, cfg.init_hi)).collect();
            Slot {
                individual: Individual::evaluated(sys, state.into()),
                omega: RelaxationFactor::new(w, cfg.adaptive.omega_lo, cfg.adaptive.omega_hi)
                    .expect("midpoints lie inside the interval"),
            }
        })
        .collect();
    Population { slots, generation: 0 }
}

/// Row-stochastic `N x N` mixing matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl StochasticMatrix {
    /// Validates nonnegativity and unit row sums (within `1e-12`).
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: entries.len() });
        }
        for row in entries.chunks(n.max(1)) {
            if row.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return Err(Error::InvalidConfig("stochastic matrix entries must be nonnegative".into()));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!("stochastic matrix row sums to {sum}")));
            }
        }
        Ok(StochasticMatrix { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        StochasticMatrix { n, entries }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }
}

/// Uniform `(0, 1)` entries with each row normalized to sum to one.
pub fn make_stochastic_matrix<R: Rng + ?Sized>(n_pop: usize, rng: &mut R) -> StochasticMatrix {
    let mut entries: Vec<f64> = (0..n_pop * n_pop).map(|_| uniform_open(rng, 0.0, 1.0)).collect();
    for row in entries.chunks_mut(n_pop) {
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= sum);
    }
    StochasticMatrix { n: n_pop, entries }
}

/// Replaces every state by the convex combination `sum_j r_ij * state_j`.
/// Slot factors and the generation counter are kept; fitnesses are cleared.
pub fn recombine(pop: &Population, r: &StochasticMatrix) -> Result<Population> {
    let size = pop.len();
    if r.order() != size {
        return Err(Error::DimensionMismatch { expected: size, found: r.order() });
    }
    let n = pop.slots.first().map_or(0, |s| s.individual.state.len());
    let slots = (0..size)
        .map(|i| {
            let mut child = vec![0.0; n];
            for (weight, parent) in r.row(i).iter().zip(&pop.slots) {
                for (c, p) in child.iter_mut().zip(parent.individual.state.iter()) {
                    *c += weight * p;
                }
            }
            Slot { individual: Individual::unevaluated(child.into()), omega: pop.slots[i].omega }
        })
        .collect();
    Ok(Population { slots, generation: pop.generation })
}

/// Applies one relaxed sweep to every slot with that slot's factor and
/// re-evaluates the residual.
pub fn mutate_and_evaluate(mut pop: Population, sys: &LinearSystem, method: Method) -> Population {
    let mut scratch = vec![0.0; sys.n()];
    for slot in &mut pop.slots {
        let omega = slot.omega.value();
        let state = &mut slot.individual.state;
        match method {
            Method::Jacobi => {
                jacobi_sweep_into(sys, state, omega, &mut scratch);
                state.copy_from_slice(&scratch);
            }
            Method::GaussSeidel => gauss_seidel_sweep_in_place(sys, state, omega),
        }
        slot.individual.fitness = Some(residual_norm_unchecked(sys, state));
    }
    pop
}

/// Keeps the best `N/2` individuals and copies each into two consecutive
/// slots (best into slots 0 and 1, runner-up into 2 and 3, ...). Slot
/// factors stay where they are.
pub fn select_and_reproduce(pop: Population) -> Result<Population> {
    let size = pop.len();
    if size < 2 || !size.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!("population size {size} must be even and >= 2")));
    }
    let mut ranked: Vec<(usize, f64)> = Vec::with_capacity(size);
    for (i, slot) in pop.slots.iter().enumerate() {
        let f =
            slot.individual.fitness.ok_or_else(|| Error::InvalidConfig(format!("slot {i} has not been evaluated")))?;
        ranked.push((i, rank_key(f)));
    }
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let survivors: Vec<Individual> = ranked[..size / 2].iter().map(|&(i, _)| pop.slots[i].individual.clone()).collect();
    let slots = pop
        .slots
        .iter()
        .enumerate()
        .map(|(i, slot)| Slot { individual: survivors[i / 2].clone(), omega: slot.omega })
        .collect();
    Ok(Population { slots, generation: pop.generation })
}
