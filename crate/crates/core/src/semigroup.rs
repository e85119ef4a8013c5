//! Growth of matrix products: joint spectral radius bounds, the Lyapunov
//! quantity `ρ̄`, and the chain `ρ̄ ≤ ρ/k ≤ ρ* ≤ ρ`.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ghost::simplest_rational_in;
use crate::graphfin::{finiteness_check, Finiteness, DEFAULT_BUDGET};
use crate::linrep::LinearRepresentation;
use crate::matrix::{sum_all, to_nalgebra, Matrix};
use crate::scalar::{Scalar, Q};
use crate::spectral::{spectral_radius, LimitData};
use crate::subspace::HatFamily;

/// Default margin for strict/equal verdicts.
pub const DEFAULT_TAU: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Spectral,
    MaxColumnSum,
}

impl NormKind {
    /// Max-column-sum for exact inputs, spectral norm for floats.
    pub fn for_scalar<T: Scalar>() -> Self {
        if T::EXACT {
            NormKind::MaxColumnSum
        } else {
            NormKind::Spectral
        }
    }

    pub fn apply(&self, m: &Matrix<f64>) -> f64 {
        match self {
            NormKind::MaxColumnSum => {
                (0..m.ncols()).map(|c| m.col(c).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
            }
            NormKind::Spectral => to_nalgebra(m).singular_values().max(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductCertificate {
    pub word: Vec<usize>,
    /// `ρ(A_w)^{1/|w|}`.
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct JsrBounds {
    pub lower: f64,
    pub upper: f64,
    pub certificate: Option<ProductCertificate>,
    pub norm: NormKind,
    /// Word lengths fully processed; less than the request when the budget ran out.
    pub levels: usize,
    pub products: u128,
}

fn family_f64<T: Scalar>(fam: &[Matrix<T>]) -> Result<Vec<Matrix<f64>>> {
    if fam.is_empty() {
        return Err(Error::Precondition("empty family".into()));
    }
    Ok(fam.iter().map(Matrix::to_f64).collect())
}

/// Submultiplicative completion of the known level bounds `u[0..]`.
fn level_bounds(known: &[f64], up_to: usize) -> Vec<f64> {
    let mut nt = known.to_vec();
    for l in known.len()..=up_to {
        let best = (1..l).map(|a| nt[a] * nt[l - a]).fold(f64::INFINITY, f64::min);
        let fallback = nt[1].powi(l as i32);
        nt.push(best.min(fallback));
    }
    nt
}

/// Bounds on `ρ*` from all words of length at most `l_max`: the best
/// `ρ(A_w)^{1/|w|}` below and `min_n (max_{|w|=n} ‖A_w‖)^{1/n}` above.
/// A prefix is dropped once its norm shows that no extension can beat the
/// current lower bound; its extensions are then covered by a norm bound.
pub fn jsr_bounds<T: Scalar>(fam: &[Matrix<T>], l_max: usize, budget: u128) -> Result<JsrBounds> {
    if l_max == 0 {
        return Err(Error::Precondition("word length must be at least 1".into()));
    }
    let f = family_f64(fam)?;
    let norm = NormKind::for_scalar::<T>();
    let d = f[0].nrows();
    let mut lower: f64 = 0.0;
    let mut certificate = None;
    let mut level_max = vec![1.0];
    let mut pruned_max = vec![0.0; l_max + 1];
    let mut frontier: Vec<(Vec<usize>, Matrix<f64>)> = vec![(Vec::new(), Matrix::identity(d))];
    let mut upper = f64::INFINITY;
    let mut products: u128 = 0;
    let mut levels = 0;
    'levels: for n in 1..=l_max {
        let mut next = Vec::with_capacity(frontier.len() * f.len());
        for (w, p) in &frontier {
            for (i, a) in f.iter().enumerate() {
                products += 1;
                if products > budget {
                    break 'levels;
                }
                let mut word = w.clone();
                word.push(i);
                next.push((word, p * a));
            }
        }
        let norms: Vec<f64> = next.iter().map(|(_, p)| norm.apply(p)).collect();
        for (w, p) in &next {
            let r = spectral_radius(p).powf(1.0 / n as f64);
            if r > lower * (1.0 + 1e-12) {
                lower = r;
                certificate = Some(ProductCertificate { word: w.clone(), value: r });
            }
        }
        let exact = norms.iter().cloned().fold(0.0, f64::max);
        let covered = (1..n).map(|depth| pruned_max[depth] * level_max[n - depth]).fold(0.0, f64::max);
        let un = exact.max(covered);
        level_max.push(un);
        upper = upper.min(un.powf(1.0 / n as f64));
        levels = n;
        if n == l_max {
            break;
        }
        let nt = level_bounds(&level_max, l_max - n);
        let mut kept = Vec::with_capacity(next.len());
        for ((w, p), a) in next.into_iter().zip(norms) {
            let prune = (0..=l_max - n).all(|l| a * nt[l] <= lower.powi((n + l) as i32));
            if prune {
                pruned_max[n] = f64::max(pruned_max[n], a);
            } else {
                kept.push((w, p));
            }
        }
        frontier = kept;
    }
    Ok(JsrBounds { lower, upper, certificate, norm, levels, products })
}

fn check_budget(k: usize, n: usize, budget: u128) -> Result<()> {
    let needed = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    Ok(())
}

/// Sums of `log ‖A_w‖` over all words of each length `1..=n_max`.
fn log_norm_sums(f: &[Matrix<f64>], norm: NormKind, n_max: usize) -> Vec<f64> {
    fn go(f: &[Matrix<f64>], norm: NormKind, acc: &Matrix<f64>, depth: usize, n_max: usize, sums: &mut [f64]) {
        for a in f {
            let p = acc * a;
            sums[depth] += norm.apply(&p).ln();
            if depth + 1 < n_max {
                go(f, norm, &p, depth + 1, n_max, sums);
            }
        }
    }
    let mut sums = vec![0.0; n_max];
    if n_max > 0 {
        go(f, norm, &Matrix::identity(f[0].nrows()), 0, n_max, &mut sums);
    }
    sums
}

/// `(Π_{|w|=n} ‖A_w‖^{1/n})^{1/k^n}`, an upper bound for `ρ̄`.
pub fn lyapunov_upper<T: Scalar>(fam: &[Matrix<T>], n: usize, budget: u128) -> Result<f64> {
    Ok(lyapunov_upper_sequence(fam, n, budget)?.last().map_or(f64::NAN, |x| x.1))
}

/// The bounds for `n = 1..=n_max`, kept as a running minimum (each term
/// bounds `ρ̄` from above).
pub fn lyapunov_upper_sequence<T: Scalar>(fam: &[Matrix<T>], n_max: usize, budget: u128) -> Result<Vec<(usize, f64)>> {
    let f = family_f64(fam)?;
    check_budget(f.len(), n_max, budget)?;
    let sums = log_norm_sums(&f, NormKind::for_scalar::<T>(), n_max);
    let k = f.len() as f64;
    let mut best = f64::INFINITY;
    Ok(sums
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let n = i + 1;
            best = best.min((s / (n as f64 * k.powi(n as i32))).exp());
            (n, best)
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub seed: u64,
    pub n: usize,
    pub samples: usize,
}

/// Mean of `‖A_w‖^{1/n}` over uniformly random words (an estimate, not a
/// bound).
pub fn lyapunov_mc<T: Scalar>(fam: &[Matrix<T>], n: usize, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    let f = family_f64(fam)?;
    if n == 0 || samples == 0 {
        return Err(Error::Precondition("need n ≥ 1 and at least one sample".into()));
    }
    let norm = NormKind::for_scalar::<T>();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = f[0].nrows();
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut p = Matrix::identity(d);
        let mut log_scale = 0.0;
        let mut zero = false;
        for _ in 0..n {
            p = &p * &f[rng.random_range(0..f.len())];
            let s = p.max_abs_f64();
            if s == 0.0 {
                zero = true;
                break;
            }
            if !(0.25..=4.0).contains(&s) {
                p = p.scale(&(1.0 / s));
                log_scale += s.ln();
            }
        }
        values.push(if zero { 0.0 } else { ((log_scale + norm.apply(&p).ln()) / n as f64).exp() });
    }
    let mean = values.iter().sum::<f64>() / samples as f64;
    let var =
        if samples > 1 { values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples - 1) as f64 } else { 0.0 };
    Ok(MonteCarloEstimate { estimate: mean, stderr: (var / samples as f64).sqrt(), seed, n, samples })
}

/// `‖A^n‖ / Σ_{|w|=n} ‖A_w‖` for `n = 1..=n_max`, max-column-sum norm. For
/// nonnegative families these stay at or above `1/d`.
pub fn cone_constants<T: Scalar>(fam: &[Matrix<T>], n_max: usize, budget: u128) -> Result<Vec<(usize, f64)>> {
    let f = family_f64(fam)?;
    check_budget(f.len(), n_max, budget)?;
    let norm = NormKind::MaxColumnSum;
    let a = sum_all(&f);
    let mut level = vec![Matrix::identity(f[0].nrows())];
    let mut out = Vec::new();
    for n in 1..=n_max {
        level = level.iter().flat_map(|p| f.iter().map(move |m| p * m)).collect();
        let total: f64 = level.iter().map(|p| norm.apply(p)).sum();
        out.push((n, norm.apply(&a.pow(n as u64)) / total));
    }
    Ok(out)
}

/// A nonnegative family with a strictly positive left (or right) eigenvector
/// shared by every matrix, eigenvalue `c`; this pins `ρ* = c`.
pub fn common_positive_eigenvector<T: Scalar>(fam: &[Matrix<T>], c: &T) -> Option<Vec<T>> {
    let d = fam[0].nrows();
    let shifted = |m: &Matrix<T>| m - &Matrix::identity(d).scale(c);
    let stacks = [
        fam.iter().map(|m| shifted(&m.transpose())).reduce(|a, b| a.vcat(&b))?,
        fam.iter().map(&shifted).reduce(|a, b| a.vcat(&b))?,
    ];
    for stack in stacks {
        let null = stack.null_space();
        let mut candidates = null.clone();
        if null.len() > 1 {
            candidates.push(
                null.iter()
                    .skip(1)
                    .fold(null[0].clone(), |acc, x| acc.iter().zip(x).map(|(a, b)| a.clone() + b.clone()).collect()),
            );
        }
        for x in candidates {
            let scale = x.iter().map(|e| e.to_f64().abs()).fold(0.0, f64::max);
            let positive = |y: &[T]| y.iter().all(|e| e.is_positive() && !e.is_negligible(scale, 1e-12));
            if positive(&x) {
                return Some(x);
            }
            let neg: Vec<T> = x.iter().map(|e| -e.clone()).collect();
            if positive(&neg) {
                return Some(neg);
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Strict,
    Equal,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationVerdict {
    pub relation: &'static str,
    pub verdict: Relation,
    /// Signed gap in favour of the verdict (or the blocking gap when inconclusive).
    pub margin: f64,
    pub certified: bool,
    pub evidence: String,
}

#[derive(Clone, Debug)]
pub struct BoundsOptions {
    pub max_word_length: usize,
    pub lyapunov_length: usize,
    pub budget: u128,
    pub tau: f64,
    /// `(n, samples, seed)` for an optional Monte-Carlo estimate of `ρ̄`.
    pub monte_carlo: Option<(usize, usize, u64)>,
    /// Work with the family on `V` instead of `V̂`.
    pub use_v: bool,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        BoundsOptions {
            max_word_length: 8,
            lyapunov_length: 10,
            budget: DEFAULT_BUDGET,
            tau: DEFAULT_TAU,
            monte_carlo: None,
            use_v: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub family: &'static str,
    pub dim: usize,
    pub exact: bool,
    pub norm: NormKind,
    pub jsr_lower: f64,
    pub jsr_upper: f64,
    pub jsr_certificate: Option<ProductCertificate>,
    pub lyap_upper_sequence: Vec<(usize, f64)>,
    pub lyap_mc: Option<MonteCarloEstimate>,
    pub rho: f64,
    pub rho_over_k: f64,
    pub relation_verdicts: Vec<RelationVerdict>,
    pub finiteness: Option<Finiteness>,
}

impl BoundsReport {
    pub fn lyap_upper(&self) -> f64 {
        self.lyap_upper_sequence.last().map_or(f64::INFINITY, |x| x.1)
    }

    pub fn verdict(&self, index: usize) -> Relation {
        self.relation_verdicts[index].verdict
    }
}

/// `ρ/k` as an element of `T`: the exact simplest rational within `1e-12`
/// in exact mode.
fn scalar_guess<T: Scalar>(x: f64) -> Option<T> {
    if !T::EXACT {
        return Some(crate::matrix::from_f64(x));
    }
    let tol = 1e-12 * x.abs().max(1.0);
    let lo = Q::from_float(x - tol)?;
    let hi = Q::from_float(x + tol)?;
    let r = simplest_rational_in(&lo, &hi);
    Some(T::from_ratio(r.numer().to_i64()?, r.denom().to_i64()?))
}

fn relation(
    relation: &'static str,
    verdict: Relation,
    margin: f64,
    certified: bool,
    evidence: impl Into<String>,
) -> RelationVerdict {
    RelationVerdict { relation, verdict, margin, certified, evidence: evidence.into() }
}

fn bounds_for_family<T: Scalar>(
    fam: &[Matrix<T>],
    rho: f64,
    family: &'static str,
    opts: &BoundsOptions,
) -> Result<BoundsReport> {
    let k = fam.len();
    let d = fam[0].nrows();
    let rk = rho / k as f64;
    let tau = opts.tau;
    let jsr = jsr_bounds(fam, opts.max_word_length, opts.budget)?;
    let n_lyap = (1..=opts.lyapunov_length).rev().find(|&n| (k as u128).pow(n as u32) <= opts.budget).unwrap_or(1);
    let lyap = lyapunov_upper_sequence(fam, n_lyap, opts.budget)?;
    let lyap_mc = match opts.monte_carlo {
        Some((n, samples, seed)) => Some(lyapunov_mc(fam, n, samples, seed)?),
        None => None,
    };
    let nonnegative = fam.iter().all(Matrix::is_nonnegative);
    let finiteness = if T::EXACT && nonnegative { Some(finiteness_check(fam, opts.budget)?.finiteness) } else { None };
    let lyap_min = lyap.last().map_or(f64::INFINITY, |x| x.1);

    let first = if d == 1 {
        let a: Vec<f64> = fam.iter().map(|m| m[(0, 0)].to_f64()).collect();
        let same = fam.iter().all(|m| m[(0, 0)] == fam[0][(0, 0)]);
        let gm = if a.contains(&0.0) { 0.0 } else { (a.iter().map(|x| x.abs().ln()).sum::<f64>() / k as f64).exp() };
        if same {
            relation("rho_bar <= rho/k", Relation::Equal, 0.0, true, "scalar family with equal entries")
        } else if gm < rk {
            relation(
                "rho_bar <= rho/k",
                Relation::Strict,
                rk - gm,
                true,
                "scalar family: geometric mean below arithmetic mean",
            )
        } else {
            relation("rho_bar <= rho/k", Relation::Inconclusive, rk - gm, false, "scalar family is not sign-coherent")
        }
    } else if fam.iter().all(|m| *m == fam[0]) {
        relation("rho_bar <= rho/k", Relation::Equal, 0.0, true, "all matrices coincide")
    } else if lyap_min < rk - tau {
        relation(
            "rho_bar <= rho/k",
            Relation::Strict,
            rk - lyap_min,
            true,
            format!("finite-n upper bound {lyap_min:.9}"),
        )
    } else {
        relation("rho_bar <= rho/k", Relation::Inconclusive, rk - lyap_min, false, "finite-n bound does not separate")
    };

    let eigen_cert =
        if nonnegative { scalar_guess::<T>(rk).and_then(|c| common_positive_eigenvector(fam, &c)) } else { None };
    let second = if jsr.lower > rk + tau {
        relation("rho/k <= rho*", Relation::Strict, jsr.lower - rk, true, "product spectral radius exceeds rho/k")
    } else if eigen_cert.is_some() {
        relation(
            "rho/k <= rho*",
            Relation::Equal,
            (jsr.upper - rk).abs(),
            true,
            "common positive eigenvector with eigenvalue rho/k",
        )
    } else if !nonnegative && (jsr.upper - rk).abs() <= tau {
        relation("rho/k <= rho*", Relation::Equal, (jsr.upper - rk).abs(), false, "numeric agreement only")
    } else {
        relation("rho/k <= rho*", Relation::Inconclusive, jsr.lower - rk, false, "bounds straddle rho/k")
    };

    let third = if jsr.upper < rho - tau {
        relation("rho* <= rho", Relation::Strict, rho - jsr.upper, true, "norm bound below rho")
    } else {
        match &finiteness {
            Some(Finiteness::Holds { value, word, .. }) if (value - rho).abs() <= tau * rho.max(1.0) => relation(
                "rho* <= rho",
                Relation::Equal,
                (value - rho).abs(),
                true,
                format!("finiteness certificate word {word:?}"),
            ),
            Some(Finiteness::Fails { bound }) if *bound < rho - tau => {
                relation("rho* <= rho", Relation::Strict, rho - bound, true, "reduced dominator bound below rho")
            }
            None if jsr.lower >= rho - tau => {
                relation("rho* <= rho", Relation::Equal, rho - jsr.lower, false, "numeric agreement only")
            }
            _ => relation("rho* <= rho", Relation::Inconclusive, rho - jsr.upper, false, "bounds straddle rho"),
        }
    };

    Ok(BoundsReport {
        family,
        dim: d,
        exact: T::EXACT,
        norm: jsr.norm,
        jsr_lower: jsr.lower,
        jsr_upper: jsr.upper,
        jsr_certificate: jsr.certificate,
        lyap_upper_sequence: lyap,
        lyap_mc,
        rho,
        rho_over_k: rk,
        relation_verdicts: vec![first, second, third],
        finiteness,
    })
}

pub fn fundamental_inequality<T: Scalar>(rep: &LinearRepresentation<T>, opts: &BoundsOptions) -> Result<BoundsReport> {
    let ld = LimitData::new(rep)?;
    bounds_from_limit(&ld, opts)
}

pub fn bounds_from_limit<T: Scalar>(ld: &LimitData<T>, opts: &BoundsOptions) -> Result<BoundsReport> {
    let rho = ld.rho();
    if opts.use_v {
        return bounds_for_family(ld.coords.family.mats(), rho, "v", opts);
    }
    match ld.hat()?.1 {
        HatFamily::Whole(f) => bounds_for_family(f.mats(), rho, "v_hat", opts),
        HatFamily::Projected(f) => bounds_for_family(f.mats(), rho, "v_hat", opts),
    }
}
