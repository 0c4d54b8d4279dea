//! `hybrid-sr` command-line front end: solve, bench and generate.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hybrid_sr::bench::{
    emit_trace_svg, parse_bench_plan, run_benchmark_detailed, summarize, write_csv, BenchRow, LabeledTrace,
};
use hybrid_sr::problems::{generate_problem, parse_problem_spec, ProblemSpec, DEFAULT_N};
use hybrid_sr::{run_solver, Error, LinearSystem, SolverConfig, Variant};

const EXIT_NOT_CONVERGED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "hybrid-sr",
    version,
    about = "Hybrid evolutionary Jacobi/Gauss-Seidel solvers for dense linear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one system and print generations, elapsed_ms and final_residual.
    Solve(SolveArgs),
    /// Run a benchmark plan and write one CSV row per run.
    Bench(BenchArgs),
    /// Write a generated problem as a spec file with an entry dump.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Built-in family `P1`..`P11` or a path to a problem spec file.
    #[arg(long)]
    problem: String,
    /// Solver variant, e.g. JBTVA, MGSBTVA or FIXED_GS_SR.
    #[arg(long)]
    variant: Variant,
    /// Solver seed; for built-in families it also seeds the generated system.
    #[arg(long)]
    seed: u64,
    /// System order for built-in families.
    #[arg(long)]
    n: Option<usize>,
    /// Stop once the best residual drops below this value.
    #[arg(long, default_value_t = 1e-7)]
    threshold: f64,
    /// Generation cap.
    #[arg(long = "max-gens", default_value_t = 10_000)]
    max_gens: u64,
    /// Relaxation factor of the fixed-factor variants.
    #[arg(long)]
    omega: Option<f64>,
    /// Write the residual trace as an SVG chart.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark plan file.
    #[arg(long)]
    plan: PathBuf,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// Directory for one SVG trace chart per problem and variant.
    #[arg(long)]
    traces: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Built-in family `P1`..`P11` or a path to a problem spec file.
    #[arg(long)]
    problem: String,
    /// System order for built-in families.
    #[arg(long)]
    n: Option<usize>,
    /// Generator seed for built-in families.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = if matches!(err, Error::Io(_)) { EXIT_IO } else { EXIT_USAGE };
        Failure { code, message: err.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn io_failure(path: &Path, err: io::Error) -> Failure {
    Failure { code: EXIT_IO, message: format!("{}: {err}", path.display()) }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

/// Writes `bytes` to a sibling temp file and renames it over `path`, so a
/// failed run never leaves a truncated file behind.
fn write_atomically(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let result = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_failure(path, e));
    }
    Ok(())
}

fn builtin_family(name: &str) -> Option<u8> {
    let digits = name.strip_prefix('P').or_else(|| name.strip_prefix('p'))?;
    if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Resolves `--problem`: a family name builds a spec from `n` and `seed`,
/// anything else is read as a spec file that carries its own order and seed.
fn resolve_problem(problem: &str, n: Option<usize>, seed: Option<u64>) -> Result<ProblemSpec, Failure> {
    if let Some(k) = builtin_family(problem) {
        return Ok(ProblemSpec::family(k, n.unwrap_or(DEFAULT_N), seed.unwrap_or(0))?);
    }
    if n.is_some() {
        return Err(usage("--n applies only to built-in problem families; set n in the spec file"));
    }
    Ok(parse_problem_spec(&read_file(Path::new(problem))?)?)
}

fn trace_chart(path: &Path, traces: &[LabeledTrace]) -> Result<(), Failure> {
    let mut buf = Vec::new();
    emit_trace_svg(traces, &mut buf)?;
    write_atomically(path, &buf)
}

fn solve(args: SolveArgs) -> Result<u8, Failure> {
    let spec = resolve_problem(&args.problem, args.n, Some(args.seed))?;
    let sys = generate_problem(&spec)?;
    let mut cfg = SolverConfig {
        variant: args.variant,
        threshold: args.threshold,
        max_generations: args.max_gens,
        seed: args.seed,
        ..SolverConfig::default()
    };
    if let Some(omega) = args.omega {
        cfg.fixed_omega = omega;
    }
    let res = run_solver(&sys, &cfg)?;
    println!(
        "generations={} elapsed_ms={:.3} final_residual={:e}",
        res.generations, res.elapsed_ms, res.final_residual
    );
    if let Some(path) = &args.trace {
        let label = format!("{} {} seed {}", spec.id, args.variant, args.seed);
        trace_chart(path, &[LabeledTrace { label, points: res.trace.clone() }])?;
    }
    Ok(if res.converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn bench(args: BenchArgs) -> Result<u8, Failure> {
    let plan = parse_bench_plan(&read_file(&args.plan)?)?;
    let records = run_benchmark_detailed(&plan)?;
    let rows: Vec<BenchRow> = records.iter().map(|r| r.row.clone()).collect();

    let mut csv = Vec::new();
    write_csv(&rows, &mut csv)?;
    write_atomically(&args.out, &csv)?;

    if let Some(dir) = &args.traces {
        fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
        for spec in &plan.problems {
            let problem = spec.id.to_string();
            for &variant in &plan.variants {
                let traces: Vec<LabeledTrace> = records
                    .iter()
                    .filter(|r| r.row.problem_id == problem && r.row.variant == variant)
                    .map(|r| LabeledTrace { label: format!("rep {}", r.repetition), points: r.trace.clone() })
                    .collect();
                trace_chart(&dir.join(format!("{problem}_{variant}.svg")), &traces)?;
            }
        }
    }

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let report = (|| -> io::Result<()> {
        writeln!(out, "problem variant runs converged mean_generations mean_elapsed_ms mean_final_residual")?;
        for s in summarize(&rows) {
            writeln!(
                out,
                "{} {} {} {} {:.2} {:.3} {:e}",
                s.problem_id,
                s.variant,
                s.runs,
                s.converged,
                s.mean_generations,
                s.mean_elapsed_ms,
                s.mean_final_residual
            )?;
        }
        out.flush()
    })();
    report.map_err(|e| Failure { code: EXIT_IO, message: format!("stdout: {e}") })?;
    Ok(0)
}

fn generate(args: GenerateArgs) -> Result<u8, Failure> {
    let spec = resolve_problem(&args.problem, args.n, args.seed)?;
    let sys = generate_problem(&spec)?;
    write_atomically(&args.out, render_system(&spec, &sys).as_bytes())?;
    Ok(0)
}

/// The spec lines followed by the entries as comments, one row of `A` per
/// `# a` line and `b` on the `# b` line, so the file still parses as a spec.
fn render_system(spec: &ProblemSpec, sys: &LinearSystem) -> String {
    let join = |values: &[f64]| values.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
    let mut text = spec.to_text();
    for i in 0..sys.n() {
        text += &format!("# a {}\n", join(sys.matrix().row(i)));
    }
    text += &format!("# b {}\n", join(sys.rhs()));
    text
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Bench(args) => bench(args),
        Command::Generate(args) => generate(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("hybrid-sr: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
