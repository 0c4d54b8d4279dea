//! Acceptance suite. Every criterion runs sequentially inside one test so
//! the wall-clock comparison is not perturbed by sibling test threads; each
//! prints a PASS/FAIL line and the test fails if any criterion fails.

use std::time::Instant;

use hybrid_sr::bench::{
    instance_seed, problem_hash, read_csv, run_benchmark, run_seed, write_csv, BenchPlan, BenchRow, CSV_HEADER,
};
use hybrid_sr::evolution::{
    adapt_pair, apply_adaptation, basic_time_variant, init_population, make_stochastic_matrix, mutate_and_evaluate,
    recombine, select_and_reproduce, TvaProbabilities, OMEGA_MARGIN,
};
use hybrid_sr::iteration::{explicit_operator, sr_step, Method, RelaxationFactor};
use hybrid_sr::linalg::{direct_solve, residual_norm, DenseMatrix, LinearSystem};
use hybrid_sr::problems::{generate_problem, ProblemSpec};
use hybrid_sr::seeding::seeded_rng;
use hybrid_sr::{run_solver, SolverConfig, Variant};
use rand::Rng;

const HYBRIDS: [Variant; 4] = [Variant::Jbtva, Variant::Gsbtva, Variant::Mjbtva, Variant::Mgsbtva];
const BASE_SEED: u64 = 20_240_601;
const SEEDS: u32 = 10;
/// Interleaved replays per paired run; the fastest replay is kept.
const TIMING_REPLAYS: usize = 41;

/// Set to make wall-clock criteria fail the test instead of only reporting.
const STRICT_TIMING_ENV: &str = "HYBRID_SR_STRICT_TIMING";

struct Report {
    failures: Vec<String>,
    timing_failures: Vec<String>,
}

impl Report {
    fn check(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {id}: {name} -- {detail}");
        if !ok {
            self.failures.push(format!("criterion {id}: {name}"));
        }
    }

    /// Like `check`, but a failure only fails the test under strict timing.
    fn check_timing(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {id}: {name} -- {detail}");
        if !ok {
            self.timing_failures.push(format!("criterion {id}: {name}"));
        }
    }
}

fn dominant_system(n: usize, seed: u64) -> LinearSystem {
    let mut rng = seeded_rng(seed);
    let entries: Vec<f64> =
        (0..n * n).map(|k| if k / n == k % n { 50.0 } else { rng.random_range(-1.0..1.0) }).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    LinearSystem::new(DenseMatrix::from_row_major(n, entries).unwrap(), b.into()).unwrap()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn classical_correctness(report: &mut Report) {
    let start = Instant::now();
    let mut ok_runs = 0;
    let mut worst_dx = 0.0f64;
    for seed in 0..20u64 {
        let sys = dominant_system(50, 1000 + seed);
        let star = direct_solve(&sys).unwrap();
        for variant in [Variant::FixedJacobiSr, Variant::FixedGsSr] {
            let cfg = SolverConfig { variant, fixed_omega: 1.0, ..SolverConfig::default() };
            let res = run_solver(&sys, &cfg).unwrap();
            let dx = distance(&res.best_state, &star);
            worst_dx = worst_dx.max(dx);
            if res.converged && res.final_residual < 1e-7 && dx <= 1e-5 {
                ok_runs += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report.check(
        1,
        "fixed-factor Jacobi/Gauss-Seidel match direct solve",
        ok_runs == 40 && secs < 5.0,
        format!("{ok_runs}/40 runs ok, max |dx| = {worst_dx:.3e}, {secs:.2}s"),
    );
}

fn sweep_operator_equivalence(report: &mut Report) {
    let mut rng = seeded_rng(77);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = 6;
        let entries: Vec<f64> = (0..n * n)
            .map(|k| if k / n == k % n { rng.random_range(2.0..8.0) } else { rng.random_range(-2.0..2.0) })
            .collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let sys = LinearSystem::new(DenseMatrix::from_row_major(n, entries).unwrap(), b.into()).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let w = rng.random_range(0.0..2.0);
        for method in [Method::Jacobi, Method::GaussSeidel] {
            let swept = sr_step(&sys, &x, w, method).unwrap();
            let applied = explicit_operator(&sys, w, method).apply(&x).unwrap();
            for i in 0..n {
                worst = worst.max((swept[i] - applied[i]).abs());
            }
        }
    }
    report.check(2, "sweeps equal H x + V", worst <= 1e-10, format!("max abs diff {worst:.3e} over 50 draws"));
}

/// Shared P1 instances at n = 200, all four hybrids, ten repetitions.
fn p1_ablation() -> (BenchPlan, Vec<BenchRow>, f64) {
    let mut plan = BenchPlan::new(vec![ProblemSpec::family(1, 200, 0).unwrap()], HYBRIDS.to_vec());
    plan.repetitions = SEEDS;
    plan.base_seed = BASE_SEED;
    plan.solver_defaults.max_generations = 2000;
    let start = Instant::now();
    let rows = run_benchmark(&plan).unwrap();
    (plan, rows, start.elapsed().as_secs_f64())
}

fn rows_of(rows: &[BenchRow], variant: Variant) -> Vec<&BenchRow> {
    rows.iter().filter(|r| r.variant == variant).collect()
}

fn mean_generations(rows: &[BenchRow], variant: Variant) -> f64 {
    mean(&rows_of(rows, variant).iter().map(|r| r.generations as f64).collect::<Vec<_>>())
}

fn hybrid_convergence(report: &mut Report, rows: &[BenchRow], secs: f64) {
    let mut ok = secs < 60.0;
    let mut parts = Vec::new();
    for variant in HYBRIDS {
        let solved = rows_of(rows, variant)
            .iter()
            .filter(|r| r.converged && r.final_residual < 1e-7 && r.generations <= 2000)
            .count();
        ok &= solved >= 9;
        parts.push(format!("{variant} {solved}/10"));
    }
    report.check(
        3,
        "hybrids solve P1 (n=200) within 2000 generations",
        ok,
        format!("{}, {secs:.2}s", parts.join(", ")),
    );
}

fn ablation_parity(report: &mut Report, rows: &[BenchRow]) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (modified, original) in [(Variant::Mjbtva, Variant::Jbtva), (Variant::Mgsbtva, Variant::Gsbtva)] {
        let (m, o) = (mean_generations(rows, modified), mean_generations(rows, original));
        let rel = (m - o).abs() / o;
        ok &= rel <= 0.25;
        parts.push(format!("{modified} {m:.1} vs {original} {o:.1} (rel {rel:.3})"));
    }
    report.check(4, "modified variants need comparable generations", ok, parts.join("; "));
}

/// Best-of-`replays` mean wall time per generation for one run.
fn ms_per_generation(sys: &LinearSystem, cfg: &SolverConfig, replays: usize) -> f64 {
    (0..replays)
        .map(|_| {
            let res = run_solver(sys, cfg).unwrap();
            res.elapsed_ms / res.generations.max(1) as f64
        })
        .fold(f64::INFINITY, f64::min)
}

fn ablation_work_reduction(report: &mut Report, plan: &BenchPlan) {
    let spec = &plan.problems[0];
    let mut wins = [0u32; 2];
    let mut ratios = [Vec::new(), Vec::new()];
    for r in 0..SEEDS {
        let sys = generate_problem(&spec.with_seed(instance_seed(plan.base_seed, spec, r))).unwrap();
        for (k, (modified, original)) in
            [(Variant::Mjbtva, Variant::Jbtva), (Variant::Mgsbtva, Variant::Gsbtva)].into_iter().enumerate()
        {
            let cfg = |variant| SolverConfig {
                variant,
                seed: run_seed(plan.base_seed, spec, variant, r),
                ..plan.solver_defaults.clone()
            };
            // warm up, then interleave replays so drift hits both alike
            ms_per_generation(&sys, &cfg(original), 1);
            let mut best_m = f64::INFINITY;
            let mut best_o = f64::INFINITY;
            for _ in 0..TIMING_REPLAYS {
                best_o = best_o.min(ms_per_generation(&sys, &cfg(original), 1));
                best_m = best_m.min(ms_per_generation(&sys, &cfg(modified), 1));
            }
            if best_m < best_o {
                wins[k] += 1;
            }
            ratios[k].push(best_m / best_o);
        }
    }
    report.check_timing(
        5,
        "modified variants spend less wall time per generation",
        wins[0] >= 8 && wins[1] >= 8,
        format!(
            "MJBTVA<JBTVA {}/10 (mean ratio {:.4}), MGSBTVA<GSBTVA {}/10 (mean ratio {:.4})",
            wins[0],
            mean(&ratios[0]),
            wins[1],
            mean(&ratios[1])
        ),
    );
}

fn method_ordering(report: &mut Report, rows: &[BenchRow]) {
    let (gs, j) = (mean_generations(rows, Variant::Gsbtva), mean_generations(rows, Variant::Jbtva));
    report.check(6, "GSBTVA needs fewer generations than JBTVA", gs < j, format!("GSBTVA {gs:.1} vs JBTVA {j:.1}"));
}

fn magnitude_band(report: &mut Report, rows: &[BenchRow]) {
    let j = mean_generations(rows, Variant::Jbtva);
    report.check(
        7,
        "JBTVA mean generations on P1 within [15, 250]",
        (15.0..=250.0).contains(&j),
        format!("mean {j:.1}"),
    );
}

fn invariant_suite(report: &mut Report) {
    let mut problems = Vec::new();

    // omega containment and selection dominance along instrumented runs
    let sys = generate_problem(&ProblemSpec::family(1, 60, 3).unwrap()).unwrap();
    for variant in HYBRIDS {
        for pop_size in [2usize, 4, 6] {
            let cfg = SolverConfig { variant, population_size: pop_size, seed: 5, ..SolverConfig::default() };
            let mut rng = seeded_rng(cfg.seed);
            let mut pop = init_population(&sys, &cfg, &mut rng);
            for _ in 0..150 {
                if variant.recombines() {
                    let r = make_stochastic_matrix(pop.len(), &mut rng);
                    pop = recombine(&pop, &r).unwrap();
                }
                pop = mutate_and_evaluate(pop, &sys, variant.method());
                let t = pop.generation;
                for pair in pop.slots.chunks_exact_mut(2) {
                    let (wx, wy) = adapt_pair(
                        pair[0].omega.value(),
                        pair[1].omega.value(),
                        pair[0].individual.fitness.unwrap(),
                        pair[1].individual.fitness.unwrap(),
                        t,
                        &cfg.adaptive,
                        &mut rng,
                    );
                    for w in [wx, wy] {
                        if !(OMEGA_MARGIN..=2.0 - OMEGA_MARGIN).contains(&w) {
                            problems.push(format!("omega {w} escaped at t={t}"));
                        }
                    }
                    pair[0].omega = RelaxationFactor::new(wx, 0.0, 2.0).unwrap();
                    pair[1].omega = RelaxationFactor::new(wy, 0.0, 2.0).unwrap();
                }
                let before = pop.best().unwrap().1;
                pop = select_and_reproduce(pop).unwrap();
                if pop.best().unwrap().1 != before {
                    problems.push(format!("selection lost the best at t={t}"));
                }
                pop.generation += 1;
            }
        }
    }

    // extreme injected noise is clamped
    let params = SolverConfig::default().adaptive;
    for (px, py) in [(10.0, 1.0), (-10.0, 1.0)] {
        let (a, b) = apply_adaptation(1.9, 0.1, 1.0, 2.0, TvaProbabilities { p_x: px, p_y: py }, &params);
        if !(OMEGA_MARGIN..=2.0 - OMEGA_MARGIN).contains(&a) || !(OMEGA_MARGIN..=2.0 - OMEGA_MARGIN).contains(&b) {
            problems.push(format!("clamping failed for p_x={px}"));
        }
    }

    // time-variant factor strictly decreasing on [0, 10^4]
    if (0..10_000u64).any(|t| basic_time_variant(t + 1, 50.0) >= basic_time_variant(t, 50.0)) {
        problems.push("T_omega not strictly decreasing".into());
    }

    // equal errors: no adaptation
    let mut rng = seeded_rng(1);
    for &(x, y) in &[(0.5, 1.5), (0.2, 0.3), (1.7, 1.1)] {
        if adapt_pair(x, y, 4.0, 4.0, 3, &params, &mut rng) != (x, y) {
            problems.push("equal-error case adapted".into());
        }
    }

    // recombining exact solutions yields exact solutions
    let small = generate_problem(&ProblemSpec::family(6, 12, 8).unwrap()).unwrap();
    let star = direct_solve(&small).unwrap();
    let cfg = SolverConfig { population_size: 4, ..SolverConfig::default() };
    let mut pop = init_population(&small, &cfg, &mut seeded_rng(2));
    for slot in &mut pop.slots {
        slot.individual.state = star.clone();
    }
    for seed in 0..20 {
        let r = make_stochastic_matrix(4, &mut seeded_rng(seed));
        for slot in recombine(&pop, &r).unwrap().slots {
            if residual_norm(&small, &slot.individual.state).unwrap() > 1e-10 {
                problems.push("recombination broke a common solution".into());
            }
        }
    }

    // stochastic matrix rows
    for seed in 0..100 {
        let n = 1 + (seed as usize % 8);
        let r = make_stochastic_matrix(n, &mut seeded_rng(seed));
        for i in 0..n {
            if (r.row(i).iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                problems.push("stochastic row sum off".into());
            }
        }
    }

    // seeded determinism: identical trace bytes
    for variant in HYBRIDS {
        let cfg = SolverConfig { variant, seed: 99, ..SolverConfig::default() };
        let bytes = |r: hybrid_sr::RunResult| -> Vec<u8> {
            r.trace.iter().flat_map(|&(g, v)| g.to_le_bytes().into_iter().chain(v.to_le_bytes())).collect()
        };
        let a = bytes(run_solver(&sys, &cfg).unwrap());
        let b = bytes(run_solver(&sys, &cfg).unwrap());
        if a != b {
            problems.push(format!("{variant} trace not reproducible"));
        }
    }

    problems.dedup();
    let detail = if problems.is_empty() { "all invariants hold".to_string() } else { problems.join("; ") };
    report.check(8, "invariant suite", problems.is_empty(), detail);
}

fn csv_contract(report: &mut Report) {
    let mut plan = BenchPlan::new(
        vec![ProblemSpec::family(6, 20, 0).unwrap(), ProblemSpec::family(5, 20, 0).unwrap()],
        vec![Variant::Jbtva, Variant::Mjbtva, Variant::Gsbtva, Variant::Mgsbtva],
    );
    plan.repetitions = 3;
    let rows = run_benchmark(&plan).unwrap();

    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let header_ok = text.lines().next() == Some(CSV_HEADER)
        && CSV_HEADER == "problem,variant,seed,generations,elapsed_ms,final_residual,converged,problem_hash";
    let round_trip = read_csv(text.as_bytes()).unwrap() == rows;

    let mut shared = true;
    for row in &rows {
        for twin in rows.iter().filter(|t| t.problem_id == row.problem_id && t.seed != row.seed) {
            let same_rep = {
                let rep = |r: &BenchRow| {
                    rows.iter().filter(|x| x.problem_id == r.problem_id && x.variant == r.variant).position(|x| x == r)
                };
                rep(row) == rep(twin)
            };
            if same_rep && twin.problem_hash != row.problem_hash {
                shared = false;
            }
        }
    }
    // hash really identifies the generated system
    let spec = &plan.problems[0];
    let sys = generate_problem(&spec.with_seed(instance_seed(plan.base_seed, spec, 0))).unwrap();
    shared &= rows[0].problem_hash == problem_hash(&sys);

    report.check(
        9,
        "CSV schema, round trip and shared problem hashes",
        header_ok && round_trip && shared,
        format!("header {header_ok}, round trip {round_trip}, paired hashes {shared}"),
    );
}

#[test]
fn acceptance_criteria() {
    let mut report = Report { failures: Vec::new(), timing_failures: Vec::new() };
    classical_correctness(&mut report);
    sweep_operator_equivalence(&mut report);
    let (plan, rows, secs) = p1_ablation();
    hybrid_convergence(&mut report, &rows, secs);
    ablation_parity(&mut report, &rows);
    ablation_work_reduction(&mut report, &plan);
    method_ordering(&mut report, &rows);
    magnitude_band(&mut report, &rows);
    invariant_suite(&mut report);
    csv_contract(&mut report);
    if !report.timing_failures.is_empty() {
        println!("timing-sensitive failures (set {STRICT_TIMING_ENV}=1 to enforce): {:?}", report.timing_failures);
        if std::env::var_os(STRICT_TIMING_ENV).is_some() {
            report.failures.extend(report.timing_failures.iter().cloned());
        }
    }
    assert!(report.failures.is_empty(), "failed: {:?}", report.failures);
}
