//! Seeded generators for the benchmark problem families P1-P11 and custom
//! problems described in a line-oriented `key=value` format.
//!
//! ```text
//! # P6 written out by hand
//! id=custom
//! n=10
//! diag=const:50
//! offdiag=uniform:-1,1
//! rhs=const:2
//! seed=1
//! ```
//!
//! Formula indices are 1-based. Generation draws from the spec seed in a
//! fixed order: the matrix row by row (only interval rules consume draws),
//! then the right-hand side.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, LinearSystem};
use crate::seeding::{seeded_rng, uniform_open};

/// Default problem dimension.
pub const DEFAULT_N: usize = 200;

/// Interval diagonals that straddle zero are redrawn until `|a_ii|` reaches this.
pub const MIN_RANDOM_DIAGONAL: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formula {
    /// `20 i`
    P7Diag,
    /// `(100 - j) / 20`
    P7Offdiag,
    /// `10 i`
    P7Rhs,
    /// `20 n`
    P8Diag,
    /// `j`
    P8Offdiag,
    /// `i`
    P8Rhs,
}

impl Formula {
    const NAMES: [(Formula, &'static str); 6] = [
        (Formula::P7Diag, "p7-diag"),
        (Formula::P7Offdiag, "p7-offdiag"),
        (Formula::P7Rhs, "p7-rhs"),
        (Formula::P8Diag, "p8-diag"),
        (Formula::P8Offdiag, "p8-offdiag"),
        (Formula::P8Rhs, "p8-rhs"),
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES.iter().find(|(f, _)| *f == self).map(|(_, s)| *s).unwrap()
    }

    /// Value at 1-based row `i`, column `j` of an order-`n` system.
    pub fn eval(self, i: usize, j: usize, n: usize) -> f64 {
        match self {
            Formula::P7Diag => 20.0 * i as f64,
            Formula::P7Offdiag => (100.0 - j as f64) / 20.0,
            Formula::P7Rhs => 10.0 * i as f64,
            Formula::P8Diag => 20.0 * n as f64,
            Formula::P8Offdiag => j as f64,
            Formula::P8Rhs => i as f64,
        }
    }
}

/// How the entries of one part of the system are produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    Const(f64),
    /// Uniform over the open interval `(lo, hi)`.
    Uniform {
        lo: f64,
        hi: f64,
    },
    Formula(Formula),
}

impl Rule {
    fn uniform(lo: f64, hi: f64) -> Rule {
        Rule::Uniform { lo, hi }
    }

    fn sample<R: Rng + ?Sized>(&self, i: usize, j: usize, n: usize, rng: &mut R) -> f64 {
        match *self {
            Rule::Const(c) => c,
            Rule::Uniform { lo, hi } => uniform_open(rng, lo, hi),
            Rule::Formula(f) => f.eval(i, j, n),
        }
    }

    fn sample_diagonal<R: Rng + ?Sized>(&self, i: usize, n: usize, rng: &mut R) -> f64 {
        match *self {
            Rule::Uniform { lo, hi } if lo < 0.0 && hi > 0.0 => loop {
                let v = uniform_open(rng, lo, hi);
                if v.abs() >= MIN_RANDOM_DIAGONAL {
                    return v;
                }
            },
            _ => self.sample(i, i, n, rng),
        }
    }

    /// Parses `const:<x>`, `uniform:<lo>,<hi>` or `formula:<name>`. The bare
    /// `formula:p7` / `formula:p8` pick the formula for `part`.
    fn parse(value: &str, part: Part) -> std::result::Result<Rule, String> {
        let (kind, arg) = value.split_once(':').ok_or_else(|| format!("rule '{value}' must look like kind:args"))?;
        match kind.trim() {
            "const" => {
                let c = parse_real(arg)?;
                Ok(Rule::Const(c))
            }
            "uniform" => {
                let (lo, hi) =
                    arg.split_once(',').ok_or_else(|| format!("malformed interval '{arg}', expected lo,hi"))?;
                let (lo, hi) = (parse_real(lo)?, parse_real(hi)?);
                if lo.is_nan() || hi.is_nan() || lo >= hi {
                    return Err(format!("malformed interval '{arg}': lo must be below hi"));
                }
                Ok(Rule::Uniform { lo, hi })
            }
            "formula" => {
                let name = arg.trim().to_ascii_lowercase();
                let full = match name.as_str() {
                    "p7" | "p8" => format!("{name}-{}", part.suffix()),
                    _ => name,
                };
                Formula::NAMES
                    .iter()
                    .find(|(_, s)| *s == full)
                    .map(|(f, _)| Rule::Formula(*f))
                    .ok_or_else(|| format!("unknown formula '{}'", arg.trim()))
            }
            other => Err(format!("unknown rule kind '{other}'")),
        }
    }
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{}' is not a number", s.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{}' is not finite", s.trim()))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Const(c) => write!(f, "const:{c}"),
            Rule::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            Rule::Formula(x) => write!(f, "formula:{}", x.name()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Part {
    Diag,
    Offdiag,
    Rhs,
}

impl Part {
    fn suffix(self) -> &'static str {
        match self {
            Part::Diag => "diag",
            Part::Offdiag => "offdiag",
            Part::Rhs => "rhs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemId {
    /// One of the eleven benchmark families, numbered 1 to 11.
    Family(u8),
    Custom,
}

impl ProblemId {
    pub fn family(k: u8) -> Result<Self> {
        if (1..=11).contains(&k) {
            Ok(ProblemId::Family(k))
        } else {
            Err(Error::InvalidConfig(format!("problem P{k} does not exist (P1..P11)")))
        }
    }

    /// `(diag, offdiag, rhs)` rules of a benchmark family.
    pub fn family_rules(k: u8) -> Option<(Rule, Rule, Rule)> {
        use Rule::{Const, Formula as F};
        let u = Rule::uniform;
        Some(match k {
            1 => (u(100.0, 200.0), u(-10.0, 10.0), u(100.0, 200.0)),
            2 => (u(1.0, 400.0), u(-4.0, 4.0), Const(100.0)),
            3 | 11 => (u(-50.0, 50.0), u(-1.0, 1.0), u(-1.0, 1.0)),
            4 => (Const(100.0), u(-1.0, 1.0), u(0.0, 100.0)),
            5 => (Const(50.0), u(-10.0, 10.0), u(-5.0, 5.0)),
            6 => (Const(50.0), u(-1.0, 1.0), Const(2.0)),
            7 => (F(Formula::P7Diag), F(Formula::P7Offdiag), F(Formula::P7Rhs)),
            8 => (F(Formula::P8Diag), F(Formula::P8Offdiag), F(Formula::P8Rhs)),
            9 => (u(-20.0, 200.0), u(-2.0, 3.0), u(-2.0, 3.0)),
            10 => (Const(40.0), u(-4.0, 4.0), Const(200.0)),
            _ => return None,
        })
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemId::Family(k) => write!(f, "P{k}"),
            ProblemId::Custom => f.write_str("custom"),
        }
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("custom") {
            return Ok(ProblemId::Custom);
        }
        match s.strip_prefix(['P', 'p']).and_then(|k| k.parse::<u8>().ok()) {
            Some(k) => ProblemId::family(k),
            None => Err(Error::InvalidConfig(format!("unknown problem id '{s}'"))),
        }
    }
}

/// A fully specified problem instance recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub id: ProblemId,
    pub n: usize,
    pub diag: Rule,
    pub offdiag: Rule,
    pub rhs: Rule,
    pub seed: u64,
}

impl ProblemSpec {
    /// Benchmark family `Pk` at order `n`.
    pub fn family(k: u8, n: usize, seed: u64) -> Result<Self> {
        let id = ProblemId::family(k)?;
        let (diag, offdiag, rhs) = ProblemId::family_rules(k).expect("validated id");
        let spec = ProblemSpec { id, n, diag, offdiag, rhs, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn custom(n: usize, diag: Rule, offdiag: Rule, rhs: Rule, seed: u64) -> Result<Self> {
        let spec = ProblemSpec { id: ProblemId::Custom, n, diag, offdiag, rhs, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        ProblemSpec { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        for rule in [self.diag, self.offdiag, self.rhs] {
            match rule {
                Rule::Uniform { lo, hi } if lo.is_nan() || hi.is_nan() || lo >= hi => {
                    return Err(Error::InvalidConfig(format!("empty interval ({lo}, {hi})")));
                }
                Rule::Const(c) if !c.is_finite() => {
                    return Err(Error::InvalidConfig("constant rule is not finite".into()));
                }
                _ => {}
            }
        }
        match self.diag {
            Rule::Const(c) if c.abs() < crate::linalg::MIN_DIAGONAL => {
                Err(Error::InvalidConfig("constant diagonal must be nonzero".into()))
            }
            Rule::Uniform { lo, hi }
                if lo < 0.0 && hi > 0.0 && lo > -MIN_RANDOM_DIAGONAL && hi < MIN_RANDOM_DIAGONAL =>
            {
                Err(Error::InvalidConfig(format!(
                    "diagonal interval ({lo}, {hi}) has no values with magnitude >= {MIN_RANDOM_DIAGONAL}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Renders the spec in the `key=value` file format.
    pub fn to_text(&self) -> String {
        let mut out = format!("id={}\nn={}\n", self.id, self.n);
        if self.id == ProblemId::Custom {
            out += &format!("diag={}\noffdiag={}\nrhs={}\n", self.diag, self.offdiag, self.rhs);
        }
        out += &format!("seed={}\n", self.seed);
        out
    }
}

/// Builds the system described by `spec` from its own seeded stream.
pub fn generate_problem(spec: &ProblemSpec) -> Result<LinearSystem> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = seeded_rng(spec.seed);
    let mut entries = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in 1..=n {
            let v =
                if i == j { spec.diag.sample_diagonal(i, n, &mut rng) } else { spec.offdiag.sample(i, j, n, &mut rng) };
            entries.push(v);
        }
    }
    let b: Vec<f64> = (1..=n).map(|i| spec.rhs.sample(i, i, n, &mut rng)).collect();
    LinearSystem::new(DenseMatrix::from_row_major(n, entries)?, b.into())
}

/// One non-comment `key=value` line.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits text into `key=value` entries, skipping blank lines and `#`
/// comments. Duplicate keys are rejected.
pub(crate) fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::Parse { line, message: format!("expected key=value, found '{content}'") })?;
        let key = key.trim().to_ascii_lowercase();
        if let Some(first) = seen.insert(key.clone(), line) {
            return Err(Error::Parse { line, message: format!("duplicate key '{key}' (first on line {first})") });
        }
        out.push(Entry { line, key, value: value.trim().to_string() });
    }
    Ok(out)
}

pub(crate) fn last_line(text: &str) -> usize {
    text.lines().count().max(1)
}

pub(crate) fn parse_u64(entry: &Entry) -> Result<u64> {
    entry.value.parse().map_err(|_| Error::Parse {
        line: entry.line,
        message: format!("{} must be a non-negative integer, found '{}'", entry.key, entry.value),
    })
}

pub(crate) fn parse_usize(entry: &Entry) -> Result<usize> {
    entry.value.parse().map_err(|_| Error::Parse {
        line: entry.line,
        message: format!("{} must be a non-negative integer, found '{}'", entry.key, entry.value),
    })
}

/// Problem-related fields collected from `key=value` entries; shared by
/// problem-spec files and benchmark plans.
#[derive(Debug, Default)]
pub(crate) struct ProblemFields {
    pub ids: Option<(usize, Vec<ProblemId>)>,
    pub n: Option<usize>,
    pub diag: Option<(usize, Rule)>,
    pub offdiag: Option<(usize, Rule)>,
    pub rhs: Option<(usize, Rule)>,
}

impl ProblemFields {
    /// Consumes `entry` if it is a problem key. `allow_list` permits a
    /// comma-separated id list.
    pub fn accept(&mut self, entry: &Entry, allow_list: bool) -> Result<bool> {
        let parse_err = |message: String| Error::Parse { line: entry.line, message };
        match entry.key.as_str() {
            "id" => {
                let ids = entry
                    .value
                    .split(',')
                    .map(|s| s.parse::<ProblemId>().map_err(|e| parse_err(e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                if ids.len() != 1 && !allow_list {
                    return Err(parse_err("id takes a single problem".into()));
                }
                self.ids = Some((entry.line, ids));
            }
            "n" => {
                let n = parse_usize(entry)?;
                if n == 0 {
                    return Err(parse_err("n must be positive".into()));
                }
                self.n = Some(n);
            }
            "diag" => self.diag = Some((entry.line, Rule::parse(&entry.value, Part::Diag).map_err(parse_err)?)),
            "offdiag" => {
                self.offdiag = Some((entry.line, Rule::parse(&entry.value, Part::Offdiag).map_err(parse_err)?))
            }
            "rhs" => self.rhs = Some((entry.line, Rule::parse(&entry.value, Part::Rhs).map_err(parse_err)?)),
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Resolves into one spec per id, all sharing `n` and `seed`.
    pub fn into_specs(self, seed: u64, end_line: usize, require_n: bool) -> Result<Vec<ProblemSpec>> {
        let (id_line, ids) =
            self.ids.ok_or(Error::Parse { line: end_line, message: "missing required key 'id'".into() })?;
        let n = match self.n {
            Some(n) => n,
            None if require_n => {
                return Err(Error::Parse { line: end_line, message: "missing required key 'n'".into() })
            }
            None => DEFAULT_N,
        };
        let has_custom = ids.contains(&ProblemId::Custom);
        let rule_lines: Vec<usize> =
            [self.diag.map(|r| r.0), self.offdiag.map(|r| r.0), self.rhs.map(|r| r.0)].into_iter().flatten().collect();
        if !has_custom {
            if let Some(&line) = rule_lines.first() {
                return Err(Error::Parse { line, message: "rule keys are only allowed with id=custom".into() });
            }
        }
        let mut specs = Vec::with_capacity(ids.len());
        for id in ids {
            let spec = match id {
                ProblemId::Family(k) => ProblemSpec::family(k, n, seed),
                ProblemId::Custom => {
                    let missing =
                        |key: &str| Error::Parse { line: end_line, message: format!("id=custom requires key '{key}'") };
                    ProblemSpec::custom(
                        n,
                        self.diag.ok_or_else(|| missing("diag"))?.1,
                        self.offdiag.ok_or_else(|| missing("offdiag"))?.1,
                        self.rhs.ok_or_else(|| missing("rhs"))?.1,
                        seed,
                    )
                }
            }
            .map_err(|e| Error::Parse { line: id_line, message: e.to_string() })?;
            specs.push(spec);
        }
        Ok(specs)
    }
}

/// Parses a problem-spec file. `id` and `n` are required, `seed` defaults
/// to 0, and `diag`/`offdiag`/`rhs` are required exactly when `id=custom`.
pub fn parse_problem_spec(text: &str) -> Result<ProblemSpec> {
    let mut fields = ProblemFields::default();
    let mut seed = 0;
    for entry in parse_entries(text)? {
        if fields.accept(&entry, false)? {
            continue;
        }
        match entry.key.as_str() {
            "seed" => seed = parse_u64(&entry)?,
            other => return Err(Error::Parse { line: entry.line, message: format!("unknown key '{other}'") }),
        }
    }
    let mut specs = fields.into_specs(seed, last_line(text), true)?;
    Ok(specs.remove(0))
}
