//! Seeded benchmark repetitions across problems and solver variants.
//!
//! For every `(problem, repetition)` one system is generated and shared by
//! all variants, so a recombining variant and its modified twin always see
//! the same instance. Seeds are pure functions of the base seed and the
//! `(problem, variant, repetition)` labels:
//!
//! ```text
//! instance seed = base ^ splitmix64(fnv1a(problem) ^ splitmix64(rep ^ INSTANCE_TAG))
//! run seed      = base ^ splitmix64(fnv1a(problem) ^ splitmix64(fnv1a(variant) ^ splitmix64(rep)))
//! ```

mod csv_io;
mod svg;

pub use csv_io::{read_csv, write_csv, CSV_HEADER};
pub use svg::{emit_trace_svg, LabeledTrace, MIN_PLOT_RESIDUAL};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{run_solver, SolverConfig, Variant};
use crate::linalg::LinearSystem;
use crate::problems::{self, generate_problem, last_line, ProblemFields, ProblemSpec};
use crate::seeding::{fnv1a64, splitmix64, Fnv1a};

const INSTANCE_TAG: u64 = 0x1d57_a11c_e5ee_d000;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    /// Problem recipes; their own `seed` fields are ignored in favour of
    /// derived instance seeds.
    pub problems: Vec<ProblemSpec>,
    pub variants: Vec<Variant>,
    pub repetitions: u32,
    pub base_seed: u64,
    /// Template for every run; `variant` and `seed` are overwritten.
    pub solver_defaults: SolverConfig,
    /// Run the independent solver runs on the rayon pool. Off by default so
    /// wall times are not disturbed by sibling runs.
    pub parallel: bool,
}

impl BenchPlan {
    pub fn new(problems: Vec<ProblemSpec>, variants: Vec<Variant>) -> Self {
        BenchPlan {
            problems,
            variants,
            repetitions: 10,
            base_seed: 0,
            solver_defaults: SolverConfig::default(),
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.problems.is_empty() || self.variants.is_empty() {
            return Err(Error::InvalidConfig("plan needs at least one problem and one variant".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("repetitions must be at least 1".into()));
        }
        for p in &self.problems {
            p.validate()?;
        }
        for &variant in &self.variants {
            SolverConfig { variant, ..self.solver_defaults.clone() }.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    #[serde(rename = "problem")]
    pub problem_id: String,
    pub variant: Variant,
    pub seed: u64,
    pub generations: u64,
    pub elapsed_ms: f64,
    pub final_residual: f64,
    pub converged: bool,
    pub problem_hash: u64,
}

/// A row together with the residual trace of its run.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub row: BenchRow,
    pub repetition: u32,
    pub trace: Vec<(u64, f64)>,
}

fn problem_key(spec: &ProblemSpec) -> u64 {
    fnv1a64(spec.id.to_string().as_bytes())
}

/// Seed of the system shared by all variants of one repetition.
pub fn instance_seed(base_seed: u64, spec: &ProblemSpec, repetition: u32) -> u64 {
    base_seed ^ splitmix64(problem_key(spec) ^ splitmix64(u64::from(repetition) ^ INSTANCE_TAG))
}

/// Seed of one solver run.
pub fn run_seed(base_seed: u64, spec: &ProblemSpec, variant: Variant, repetition: u32) -> u64 {
    let v = fnv1a64(variant.name().as_bytes());
    base_seed ^ splitmix64(problem_key(spec) ^ splitmix64(v ^ splitmix64(u64::from(repetition))))
}

/// FNV-1a over the little-endian bytes of `A` (row-major) followed by `b`.
pub fn problem_hash(sys: &LinearSystem) -> u64 {
    let mut h = Fnv1a::default();
    for v in sys.matrix().as_row_major().iter().chain(sys.rhs().iter()) {
        h.write(&v.to_le_bytes());
    }
    h.finish()
}

/// Runs the plan and returns rows ordered by problem, variant, repetition.
pub fn run_benchmark(plan: &BenchPlan) -> Result<Vec<BenchRow>> {
    Ok(run_benchmark_detailed(plan)?.into_iter().map(|r| r.row).collect())
}

/// Like [`run_benchmark`] but keeps each run's residual trace.
pub fn run_benchmark_detailed(plan: &BenchPlan) -> Result<Vec<BenchRecord>> {
    plan.validate()?;
    let reps = plan.repetitions;

    let mut instances = Vec::with_capacity(plan.problems.len() * reps as usize);
    for spec in &plan.problems {
        for r in 0..reps {
            let sys = generate_problem(&spec.with_seed(instance_seed(plan.base_seed, spec, r)))?;
            let hash = problem_hash(&sys);
            instances.push((sys, hash));
        }
    }

    let jobs: Vec<(usize, usize, u32)> = (0..plan.problems.len())
        .flat_map(|p| (0..plan.variants.len()).flat_map(move |v| (0..reps).map(move |r| (p, v, r))))
        .collect();

    let run_job = |&(p, v, r): &(usize, usize, u32)| -> Result<BenchRecord> {
        let spec = &plan.problems[p];
        let variant = plan.variants[v];
        let (sys, hash) = &instances[p * reps as usize + r as usize];
        let seed = run_seed(plan.base_seed, spec, variant, r);
        let cfg = SolverConfig { variant, seed, ..plan.solver_defaults.clone() };
        let res = run_solver(sys, &cfg)?;
        Ok(BenchRecord {
            row: BenchRow {
                problem_id: spec.id.to_string(),
                variant,
                seed,
                generations: res.generations,
                elapsed_ms: res.elapsed_ms,
                final_residual: res.final_residual,
                converged: res.converged,
                problem_hash: *hash,
            },
            repetition: r,
            trace: res.trace,
        })
    };

    if plan.parallel {
        jobs.par_iter().map(run_job).collect()
    } else {
        jobs.iter().map(run_job).collect()
    }
}

/// Per `(problem, variant)` averages over the repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub problem_id: String,
    pub variant: Variant,
    pub runs: usize,
    pub converged: usize,
    pub mean_generations: f64,
    pub mean_elapsed_ms: f64,
    pub mean_final_residual: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

/// Groups rows by `(problem, variant)` in first-appearance order.
pub fn summarize(rows: &[BenchRow]) -> Vec<Summary> {
    let mut keys: Vec<(String, Variant)> = Vec::new();
    for row in rows {
        let key = (row.problem_id.clone(), row.variant);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(problem_id, variant)| {
            let group: Vec<&BenchRow> =
                rows.iter().filter(|r| r.problem_id == problem_id && r.variant == variant).collect();
            Summary {
                runs: group.len(),
                converged: group.iter().filter(|r| r.converged).count(),
                mean_generations: mean(group.iter().map(|r| r.generations as f64)),
                mean_elapsed_ms: mean(group.iter().map(|r| r.elapsed_ms)),
                mean_final_residual: mean(group.iter().map(|r| r.final_residual)),
                problem_id,
                variant,
            }
        })
        .collect()
}

/// Parses a plan file: the problem keys (`id` may list several problems,
/// `n` defaults to 200) plus `variants` (required), `repetitions`,
/// `base_seed`, `threshold` and `max_generations`.
pub fn parse_bench_plan(text: &str) -> Result<BenchPlan> {
    let mut fields = ProblemFields::default();
    let mut variants = None;
    let mut plan = BenchPlan::new(Vec::new(), Vec::new());
    for entry in problems::parse_entries(text)? {
        if fields.accept(&entry, true)? {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: entry.line, message };
        match entry.key.as_str() {
            "variants" => {
                let list = entry
                    .value
                    .split(',')
                    .map(|s| s.parse::<Variant>().map_err(|e| parse_err(e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                variants = Some(list);
            }
            "repetitions" => {
                let reps = problems::parse_u64(&entry)?;
                plan.repetitions = u32::try_from(reps)
                    .ok()
                    .filter(|&r| r >= 1)
                    .ok_or_else(|| parse_err("repetitions must be between 1 and 2^32-1".into()))?;
            }
            "base_seed" => plan.base_seed = problems::parse_u64(&entry)?,
            "threshold" => {
                let t: f64 = entry.value.parse().map_err(|_| parse_err(format!("bad threshold '{}'", entry.value)))?;
                if !(t > 0.0 && t.is_finite()) {
                    return Err(parse_err("threshold must be positive".into()));
                }
                plan.solver_defaults.threshold = t;
            }
            "max_generations" => plan.solver_defaults.max_generations = problems::parse_u64(&entry)?,
            "seed" => return Err(parse_err("plans derive instance seeds from base_seed; use base_seed".into())),
            other => return Err(parse_err(format!("unknown key '{other}'"))),
        }
    }
    let end = last_line(text);
    plan.variants = variants.ok_or(Error::Parse { line: end, message: "missing required key 'variants'".into() })?;
    plan.problems = fields.into_specs(0, end, false)?;
    Ok(plan)
}
