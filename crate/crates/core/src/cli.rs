//! The `kreg` command line: parse a representation file, run one command,
//! print JSON, CSV or DOT.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::classify::{classify, ClassifyOptions};
use crate::error::{Error, Result};
use crate::ghost::{
    approximant, cdf_grid, check_reduced, coding_of_rational, convolution_approximant, fourier_coefficient,
    ghost_family, interval_mass, level_masses, mass_table, point_mass, IntervalIndex,
};
use crate::graphfin::{build_graph, construct_delta, finiteness_check, rational_support_verdict, scc, DEFAULT_BUDGET};
use crate::io::{parse_representation, to_json, AnyRep, NumericMode};
use crate::linrep::{change_of_basis, is_identity, recurrence_holds, LinearRepresentation};
use crate::scalar::{format_rational, parse_rational, Scalar};
use crate::semigroup::{fundamental_inequality, BoundsOptions};
use crate::spectral::{GroupElement, LimitData};
use crate::subspace::compute_v;

/// Largest interval depth accepted on the command line.
pub const MAX_DEPTH: u32 = 16;

#[derive(Parser, Debug)]
#[command(name = "kreg", version, about = "Linear representations of k-regular sequences and their limit measures")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Rational,
    Float,
}

impl From<ModeArg> for NumericMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Auto => NumericMode::Auto,
            ModeArg::Rational => NumericMode::Rational,
            ModeArg::Float => NumericMode::Float,
        }
    }
}

/// Options shared by every command that reads a representation.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Representation file (JSON).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: ModeArg,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 8)]
    pub max_word_length: usize,
    #[arg(long, default_value_t = 10)]
    pub lyapunov_length: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u128,
    #[arg(long, default_value_t = 1e-6)]
    pub tau: f64,
    /// Monte-Carlo samples for the Lyapunov estimate (0 disables it).
    #[arg(long, default_value_t = 0)]
    pub mc_samples: usize,
    /// Word length of the Monte-Carlo estimate.
    #[arg(long, default_value_t = 64)]
    pub mc_length: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Use the family on V instead of V̂.
    #[arg(long)]
    pub use_v: bool,
}

impl BoundsArgs {
    fn options(&self) -> Result<BoundsOptions> {
        positive("tau", self.tau)?;
        Ok(BoundsOptions {
            max_word_length: self.max_word_length,
            lyapunov_length: self.lyapunov_length,
            budget: self.budget,
            tau: self.tau,
            monte_carlo: (self.mc_samples > 0).then_some((self.mc_length, self.mc_samples, self.seed)),
            use_v: self.use_v,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MeasureKind {
    Intervals,
    Cdf,
    Fourier,
    Approximant,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate f(n), or f on a range of n.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: u64,
        /// Evaluate every n up to this value (inclusive).
        #[arg(long)]
        to: Option<u64>,
    },
    /// Block sum Σ_f(N) by closed form and by direct summation.
    Sum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: u32,
    },
    /// Forward and backward ranks.
    Minimality {
        #[command(flatten)]
        common: Common,
    },
    /// The subspaces V and V̂.
    Subspace {
        #[command(flatten)]
        common: Common,
    },
    /// Peripheral spectrum, rotation group and nondegeneracy.
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Joint spectral radius and Lyapunov bounds with the inequality verdicts.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Spectral type of the limit measures.
    Classify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Interval masses, distribution function or Fourier coefficients.
    Measure {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "intervals")]
        kind: MeasureKind,
        #[arg(long, default_value_t = 4)]
        depth: u32,
        /// Group element g^j selecting the limit measure.
        #[arg(long, default_value_t = 0)]
        residue: u64,
        /// Block length for `--kind approximant`.
        #[arg(long, default_value_t = 10)]
        n: u32,
        /// Largest |m| for `--kind fourier`.
        #[arg(long, default_value_t = 8)]
        m_max: i64,
        #[arg(long, default_value_t = 20)]
        truncation: u32,
    },
    /// Mass of the limit measure at a rational point.
    Pointmass {
        #[command(flatten)]
        common: Common,
        /// The point, as "p/q".
        y: String,
        #[arg(long, default_value_t = 0)]
        residue: u64,
    },
    /// Labeled digraph of the digit matrices.
    Graph {
        #[command(flatten)]
        common: Common,
        /// Entries at or below this magnitude are not edges (float mode).
        #[arg(long, default_value_t = 0.0)]
        tau_edge: f64,
    },
    /// Dominance analysis and the finiteness certificate.
    Finiteness {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Write a representation whose limit measure is the unit atom at y.
    ConstructDelta {
        /// The point, as "p/q".
        y: String,
        k: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Compare closed forms against brute force on the input.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Largest block length checked.
        #[arg(long, default_value_t = 12)]
        max_n: u32,
    },
}

/// What a command produced.
#[derive(Debug)]
pub enum Report {
    Json(Value),
    Csv(String),
    Dot(String),
    Text(String),
}

impl Report {
    fn render(&self) -> String {
        match self {
            Report::Json(v) => serde_json::to_string_pretty(v).unwrap_or_default() + "\n",
            Report::Csv(s) | Report::Dot(s) | Report::Text(s) => s.clone(),
        }
    }
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => 4,
        Error::Mismatch(_) => 3,
        _ => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::Mismatch(_) => "mismatch",
        Error::Budget { .. } => "budget",
        Error::DegenerateBlock { .. } => "degenerate_block",
        _ => "precondition",
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} must be positive, got {x}")))
    }
}

fn scalar_json<T: Scalar>(x: &T) -> Value {
    match x.to_rational() {
        Some(q) if q.is_integer() => serde_json::from_str(&q.numer().to_string()).unwrap_or(Value::Null),
        Some(q) => Value::String(format_rational(&q)),
        None => json!(x.to_f64()),
    }
}

fn vec_json<T: Scalar>(xs: &[T]) -> Value {
    Value::Array(xs.iter().map(scalar_json).collect())
}

fn to_value<S: Serialize>(s: &S) -> Value {
    serde_json::to_value(s).unwrap_or(Value::Null)
}

fn csv_table<R: Serialize>(rows: impl IntoIterator<Item = R>, header: &[&str]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Numerical(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Numerical(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn load(common: &Common) -> Result<AnyRep> {
    let text = std::fs::read_to_string(&common.input)
        .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", common.input.display())))?;
    parse_representation(&text, common.mode.into())
}

fn parse_point(y: &str) -> Result<crate::Q> {
    parse_rational(y).ok_or_else(|| Error::Parse {
        line: 1,
        column: 1,
        message: format!("expected a rational \"p/q\", found \"{y}\""),
    })
}

fn with_mode(mode: &str, mut v: Value) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("mode".into(), Value::String(mode.into()));
    }
    v
}

macro_rules! dispatch {
    ($rep:expr, $r:ident => $body:expr) => {
        match &$rep {
            AnyRep::Exact($r) => $body,
            AnyRep::Float($r) => $body,
        }
    };
}

fn unsupported(format: Format, command: &str) -> Error {
    Error::Precondition(format!("{command} does not produce {format:?} output"))
}

/// Runs one command and returns its report.
pub fn execute(config: &RunConfig) -> Result<(Report, Option<PathBuf>)> {
    match &config.command {
        Command::ConstructDelta { y, k, output } => {
            let y = parse_point(y)?;
            let rep = construct_delta(&y, *k)?;
            Ok((Report::Text(to_json(&rep)), output.clone()))
        }
        Command::Eval { common, n, to } => run(common, Format::Json, |rep, f| dispatch!(rep, r => eval(r, *n, *to, f))),
        Command::Sum { common, n } => run(common, Format::Json, |rep, f| dispatch!(rep, r => sum(r, *n, f))),
        Command::Minimality { common } => run(common, Format::Json, |rep, f| {
            json_only(f, "minimality")?;
            Ok(Report::Json(dispatch!(rep, r => to_value(&r.minimality()))))
        }),
        Command::Subspace { common } => run(common, Format::Json, |rep, f| {
            json_only(f, "subspace")?;
            dispatch!(rep, r => subspace_report(r))
        }),
        Command::Spectrum { common } => run(common, Format::Json, |rep, f| {
            json_only(f, "spectrum")?;
            dispatch!(rep, r => spectrum_report(r))
        }),
        Command::Bounds { common, bounds } => run(common, Format::Json, |rep, f| {
            json_only(f, "bounds")?;
            let opts = bounds.options()?;
            Ok(Report::Json(dispatch!(rep, r => to_value(&fundamental_inequality(r, &opts)?))))
        }),
        Command::Classify { common, bounds } => run(common, Format::Json, |rep, f| {
            json_only(f, "classify")?;
            let opts = ClassifyOptions { bounds: bounds.options()?, tau: bounds.tau, ..ClassifyOptions::default() };
            Ok(Report::Json(dispatch!(rep, r => to_value(&classify(r, &opts)?))))
        }),
        Command::Measure { common, kind, depth, residue, n, m_max, truncation } => {
            if *depth > MAX_DEPTH {
                return Err(Error::Precondition(format!("depth {depth} exceeds the limit {MAX_DEPTH}")));
            }
            run(
                common,
                Format::Csv,
                |rep, f| dispatch!(rep, r => measure(r, *kind, *depth, *residue, *n, *m_max, *truncation, f)),
            )
        }
        Command::Pointmass { common, y, residue } => run(common, Format::Json, |rep, f| {
            json_only(f, "pointmass")?;
            let y = parse_point(y)?;
            dispatch!(rep, r => pointmass_report(r, &y, *residue))
        }),
        Command::Graph { common, tau_edge } => run(common, Format::Dot, |rep, f| {
            let g = dispatch!(rep, r => build_graph(r.mats(), *tau_edge)?);
            match f {
                Format::Dot => Ok(Report::Dot(g.to_dot())),
                Format::Json => {
                    let s = scc(&g.adjacency());
                    Ok(Report::Json(json!({ "graph": to_value(&g), "scc": to_value(&s) })))
                }
                Format::Csv => csv_table(
                    g.edges.iter().map(|e| (e.src + 1, e.dst + 1, e.label, &e.weight)),
                    &["src", "dst", "digit", "weight"],
                )
                .map(Report::Csv),
            }
        }),
        Command::Finiteness { common, budget } => run(common, Format::Json, |rep, f| {
            json_only(f, "finiteness")?;
            dispatch!(rep, r => {
                let report = finiteness_check(r.mats(), *budget)?;
                let support = rational_support_verdict(r, *budget)?;
                Ok(Report::Json(json!({ "dominance": to_value(&report), "rational_support": to_value(&support) })))
            })
        }),
        Command::Verify { common, max_n } => run(common, Format::Json, |rep, f| {
            json_only(f, "verify")?;
            dispatch!(rep, r => verify(r, *max_n))
        }),
    }
}

fn json_only(f: Format, command: &str) -> Result<()> {
    if f == Format::Json {
        Ok(())
    } else {
        Err(unsupported(f, command))
    }
}

fn run(
    common: &Common,
    default: Format,
    body: impl FnOnce(&AnyRep, Format) -> Result<Report>,
) -> Result<(Report, Option<PathBuf>)> {
    let rep = load(common)?;
    let report = body(&rep, common.format.unwrap_or(default))?;
    let report = match report {
        Report::Json(v) => Report::Json(with_mode(rep.mode_name(), v)),
        other => other,
    };
    Ok((report, common.output.clone()))
}

fn eval<T: Scalar>(rep: &LinearRepresentation<T>, n: u64, to: Option<u64>, f: Format) -> Result<Report> {
    let last = to.unwrap_or(n);
    if last < n {
        return Err(Error::Precondition(format!("--to {last} is below --n {n}")));
    }
    let values: Vec<(u64, T)> = (n..=last).map(|i| (i, rep.evaluate(i))).collect();
    match f {
        Format::Json => {
            let rows: Vec<Value> = values.iter().map(|(i, x)| json!({ "n": i, "value": scalar_json(x) })).collect();
            if to.is_none() {
                Ok(Report::Json(json!({ "n": n, "value": scalar_json(&values[0].1) })))
            } else {
                Ok(Report::Json(json!({ "values": rows })))
            }
        }
        Format::Csv => csv_table(values.iter().map(|(i, x)| (i, x.to_string())), &["n", "value"]).map(Report::Csv),
        Format::Dot => Err(unsupported(f, "eval")),
    }
}

fn agree<T: Scalar>(a: &T, b: &T) -> bool {
    if T::EXACT {
        a == b
    } else {
        (a.to_f64() - b.to_f64()).abs() <= 1e-10 * a.to_f64().abs().max(b.to_f64().abs()).max(1e-300)
    }
}

fn sum<T: Scalar>(rep: &LinearRepresentation<T>, n: u32, f: Format) -> Result<Report> {
    json_only(f, "sum")?;
    let closed = rep.sum_block(n);
    let count = (rep.k() as u128).checked_pow(n + 1).unwrap_or(u128::MAX);
    if count > DEFAULT_BUDGET {
        return Ok(Report::Json(json!({ "n": n, "closed": scalar_json(&closed), "brute": Value::Null })));
    }
    let brute = rep.sum_block_brute(n);
    if !agree(&closed, &brute) {
        return Err(Error::Mismatch(format!("Σ_f({n}): closed form {closed} but direct sum {brute}")));
    }
    Ok(Report::Json(json!({ "n": n, "closed": scalar_json(&closed), "brute": scalar_json(&brute), "agree": true })))
}

fn subspace_report<T: Scalar>(rep: &LinearRepresentation<T>) -> Result<Report> {
    let v = compute_v(rep);
    let basis: Vec<Value> = v.basis().iter().map(|b| vec_json(b)).collect();
    let hat = match LimitData::new(rep).and_then(|ld| ld.hat()) {
        Ok((h, fam)) => json!({ "dim": h.dim, "ambient_dim": h.ambient_dim, "exact": fam.is_exact() }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    Ok(Report::Json(json!({
        "v": { "dim": v.dim(), "ambient_dim": v.ambient_dim(), "iterations": v.iterations(), "basis": basis },
        "vhat": hat,
    })))
}

fn spectrum_report<T: Scalar>(rep: &LinearRepresentation<T>) -> Result<Report> {
    let ld = LimitData::new(rep)?;
    let eig: Vec<[f64; 2]> = ld.pd.eigenvalues.iter().map(|z| [z.re, z.im]).collect();
    let vlim: Vec<Value> = match ld.group().order() {
        Some(_) => ld.v_lim().into_iter().map(|(h, x)| json!({ "h": h.0, "vector": x })).collect(),
        None => Vec::new(),
    };
    let mut out = to_value(&ld.pd.summary());
    if let Value::Object(map) = &mut out {
        map.insert("eigenvalues".into(), to_value(&eig));
        map.insert("margin".into(), to_value(&ld.nondegeneracy()));
        map.insert("v_lim".into(), Value::Array(vlim));
        map.insert("projector".into(), to_value(&ld.pd.projector.to_rows()));
    }
    Ok(Report::Json(out))
}

#[allow(clippy::too_many_arguments)]
fn measure<T: Scalar>(
    rep: &LinearRepresentation<T>,
    kind: MeasureKind,
    depth: u32,
    residue: u64,
    n: u32,
    m_max: i64,
    truncation: u32,
    f: Format,
) -> Result<Report> {
    let k = rep.k();
    let interval_rows = |levels: &[Vec<f64>]| {
        let mut rows = Vec::new();
        for (ell, masses) in levels.iter().enumerate() {
            for (i, mass) in masses.iter().enumerate() {
                let idx = IntervalIndex { ell: ell as u32, m: (k as u64).pow(ell as u32) + i as u64 };
                let (lo, hi) = idx.bounds(k);
                rows.push((ell, idx.m, lo.to_f64(), hi.to_f64(), *mass));
            }
        }
        rows
    };
    let header = ["level", "m", "interval_left", "interval_right", "mass"];
    match kind {
        MeasureKind::Intervals => {
            let ld = LimitData::new(rep)?;
            if f == Format::Json {
                return Ok(Report::Json(to_value(&ghost_family(&ld, depth)?)));
            }
            let h = residue_element(&ld, residue)?;
            let table = mass_table(&ld, h, depth)?;
            csv_or_dot(f, csv_table(interval_rows(&table.levels), &header)?)
        }
        MeasureKind::Approximant => {
            if depth > n {
                return Err(Error::Precondition(format!("depth {depth} exceeds N = {n}")));
            }
            let levels: Vec<Vec<f64>> = (0..=depth)
                .map(|ell| level_masses(rep, n, ell).map(|v| v.iter().map(Scalar::to_f64).collect()))
                .collect::<Result<_>>()?;
            if f == Format::Json {
                return Ok(Report::Json(json!({ "n": n, "levels": levels })));
            }
            csv_or_dot(f, csv_table(interval_rows(&levels), &header)?)
        }
        MeasureKind::Cdf => {
            let ld = LimitData::new(rep)?;
            let h = residue_element(&ld, residue)?;
            let grid = cdf_grid(&mass_table(&ld, h, depth)?, k);
            if f == Format::Json {
                let rows: Vec<Value> = grid.iter().map(|(x, y)| json!({ "x": format_rational(x), "F": y })).collect();
                return Ok(Report::Json(json!({ "residue": residue, "depth": depth, "cdf": rows })));
            }
            csv_or_dot(f, csv_table(grid.iter().map(|(x, y)| (x.to_f64(), *y)), &["x", "F"])?)
        }
        MeasureKind::Fourier => {
            let coeffs =
                (-m_max..=m_max).map(|m| fourier_coefficient(rep, m, truncation)).collect::<Result<Vec<_>>>()?;
            if f == Format::Json {
                return Ok(Report::Json(json!({ "truncation": truncation, "coefficients": to_value(&coeffs) })));
            }
            csv_or_dot(
                f,
                csv_table(coeffs.iter().map(|c| (c.m, c.re, c.im, c.err_est)), &["m", "re", "im", "err_est"])?,
            )
        }
    }
}

fn csv_or_dot(f: Format, table: String) -> Result<Report> {
    match f {
        Format::Dot => Err(unsupported(f, "measure")),
        _ => Ok(Report::Csv(table)),
    }
}

fn residue_element<T: Scalar>(ld: &LimitData<T>, residue: u64) -> Result<GroupElement> {
    match ld.group().order() {
        Some(q) if residue < q as u64 => Ok(GroupElement(residue)),
        Some(q) => Err(Error::Precondition(format!("residue {residue} out of range for a group of order {q}"))),
        None => Ok(GroupElement(residue)),
    }
}

fn pointmass_report<T: Scalar>(rep: &LinearRepresentation<T>, y: &crate::Q, residue: u64) -> Result<Report> {
    let ld = LimitData::new(rep)?;
    let h = residue_element(&ld, residue)?;
    let codings = coding_of_rational(y, rep.k())?;
    let pm = point_mass(&ld, h, y)?;
    Ok(Report::Json(json!({
        "y": format_rational(y),
        "residue": residue,
        "codings": to_value(&codings),
        "point_mass": to_value(&pm),
        "value": pm.value(),
    })))
}

#[derive(Serialize)]
struct CheckRow {
    name: String,
    passed: bool,
    detail: String,
}

/// The oracle suite behind `verify`.
pub fn verify_checks<T: Scalar>(rep: &LinearRepresentation<T>, max_n: u32) -> Vec<(String, bool, String)> {
    let mut out = Vec::new();
    let k = rep.k() as u128;

    // (n, j) = (0, 0) would compare f(0) = uᵀv with uᵀA_0v, which only
    // canonical representations satisfy.
    let bad = (0..=200u64)
        .flat_map(|n| (0..rep.k()).map(move |j| (n, j)))
        .filter(|&(n, j)| n > 0 || j > 0)
        .find(|&(n, j)| !recurrence_holds(rep, n, j));
    out.push((
        "recurrence".to_string(),
        bad.is_none(),
        bad.map_or("kn + j ≤ 200k".into(), |(n, j)| format!("fails at n={n}, j={j}")),
    ));

    for n in 0..=max_n {
        if k.pow(n + 1) > 1 << 18 {
            break;
        }
        let (c, b) = (rep.sum_block(n), rep.sum_block_brute(n));
        out.push((format!("sum_block[{n}]"), agree(&c, &b), format!("closed {c}, direct {b}")));
    }

    for n in 0..=max_n {
        if k.pow(n + 1) > 1 << 16 {
            break;
        }
        let Ok(mu) = approximant(rep, n) else {
            out.push((format!("interval_mass[{n}]"), true, "skipped: block sum not positive".into()));
            continue;
        };
        let mut worst = None;
        for ell in 0..=n {
            for idx in IntervalIndex::level(ell, rep.k()) {
                let closed = interval_mass(rep, n, idx).expect("positive block");
                let atoms = mu.interval_sum(idx);
                if !agree(&closed, &atoms) && worst.is_none() {
                    worst = Some(format!("I({}, {}): closed {closed}, atoms {atoms}", idx.ell, idx.m));
                }
            }
        }
        out.push((format!("interval_mass[{n}]"), worst.is_none(), worst.unwrap_or_else(|| "all levels".into())));
    }

    if check_reduced(rep).is_ok() {
        for n in 0..=max_n.min(6) {
            let ok = match (approximant(rep, n), convolution_approximant(rep, n)) {
                (Ok(a), Ok(c)) => a.masses().iter().zip(c.masses()).all(|(x, y)| agree(x, y)),
                _ => false,
            };
            out.push((format!("convolution[{n}]"), ok, "reduced representation".into()));
        }
    }

    let cob = change_of_basis(rep, rep);
    let ok = matches!(&cob, Ok(m) if is_identity(m) || !T::EXACT);
    out.push(("change_of_basis_self".into(), ok, cob.map_or_else(|e| e.to_string(), |_| "identity".into())));
    out
}

fn verify<T: Scalar>(rep: &LinearRepresentation<T>, max_n: u32) -> Result<Report> {
    let checks = verify_checks(rep, max_n);
    let failed: Vec<&String> = checks.iter().filter(|c| !c.1).map(|c| &c.0).collect();
    let rows: Vec<CheckRow> =
        checks.iter().map(|(n, p, d)| CheckRow { name: n.clone(), passed: *p, detail: d.clone() }).collect();
    if !failed.is_empty() {
        return Err(Error::Mismatch(format!(
            "{} check(s) failed: {}",
            failed.len(),
            failed.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
        )));
    }
    Ok(Report::Json(json!({ "checks": to_value(&rows), "mismatches": 0 })))
}

/// Parses `args`, runs the command and writes its output. Returns the exit
/// status together with everything that went to standard output.
pub fn main_with_args<I, S>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            return (code, e.render().to_string());
        }
    };
    match execute(&config) {
        Ok((report, None)) => (0, report.render()),
        Ok((report, Some(path))) => match std::fs::write(&path, report.render()) {
            Ok(()) => (0, String::new()),
            Err(e) => (2, error_json(&Error::Precondition(format!("cannot write {}: {e}", path.display())))),
        },
        Err(e) => (exit_code(&e), error_json(&e)),
    }
}

fn error_json(e: &Error) -> String {
    let mut body = json!({ "kind": error_kind(e), "message": e.to_string() });
    if let Error::Parse { line, column, .. } = e {
        body["line"] = json!(line);
        body["column"] = json!(column);
    }
    serde_json::to_string_pretty(&json!({ "error": body })).unwrap_or_default() + "\n"
}
