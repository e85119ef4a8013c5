//! Approximating measures `μ_N`, their limits `μ_h` on the canonical
//! intervals, atoms, distribution functions, reduced representations and
//! Fourier coefficients.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intform::{dot as int_dot, IntegerForm};
use crate::linrep::{base_k_digits, LinearRepresentation};
use crate::matrix::{dot, Matrix, Span};
use crate::scalar::{Scalar, Q};
use crate::spectral::{eigen_analysis, Group, GroupElement, LimitData, SpectralOptions};

fn pow_u128(k: usize, e: u32) -> u128 {
    (k as u128).pow(e)
}

/// The interval `I_{ℓ,m}` with `k^ℓ ≤ m < k^{ℓ+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct IntervalIndex {
    pub ell: u32,
    pub m: u64,
}

impl IntervalIndex {
    pub fn new(ell: u32, m: u64, k: usize) -> Result<Self> {
        let lo = pow_u128(k, ell);
        if (m as u128) < lo || (m as u128) >= lo * k as u128 {
            return Err(Error::Precondition(format!("m = {m} is not in [k^{ell}, k^{}) for k = {k}", ell + 1)));
        }
        Ok(IntervalIndex { ell, m })
    }

    /// `[(m − k^ℓ)/(k^ℓ(k−1)), (m + 1 − k^ℓ)/(k^ℓ(k−1)))`.
    pub fn bounds(&self, k: usize) -> (Q, Q) {
        let kl = BigInt::from(k).pow(self.ell);
        let den = &kl * BigInt::from(k - 1);
        let off = BigInt::from(self.m) - &kl;
        (Q::new(off.clone(), den.clone()), Q::new(off + 1, den))
    }

    pub fn digits(&self, k: usize) -> Vec<usize> {
        base_k_digits(self.m, k).digits().to_vec()
    }

    /// All intervals of level `ell`, left to right.
    pub fn level(ell: u32, k: usize) -> impl Iterator<Item = IntervalIndex> {
        let lo = pow_u128(k, ell) as u64;
        (lo..lo * k as u64).map(move |m| IntervalIndex { ell, m })
    }
}

/// `μ_N`: masses `f(k^N + i)/Σ_f(N)` at the points `i/(k^N(k−1))`.
#[derive(Clone, Debug)]
pub struct AtomicMeasure<T> {
    k: usize,
    n: u32,
    masses: Vec<T>,
}

impl<T: Scalar> AtomicMeasure<T> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    /// Common denominator `k^N(k−1)` of the atom positions.
    pub fn grid(&self) -> u128 {
        pow_u128(self.k, self.n) * (self.k as u128 - 1)
    }

    pub fn position(&self, i: usize) -> Q {
        Q::new(BigInt::from(i), BigInt::from(self.grid()))
    }

    pub fn atoms(&self) -> impl Iterator<Item = (Q, &T)> + '_ {
        self.masses.iter().enumerate().map(|(i, m)| (self.position(i), m))
    }

    pub fn total(&self) -> T {
        self.masses.iter().fold(T::zero(), |s, x| s + x.clone())
    }

    /// Sum of the masses of atoms inside `I_{ℓ,m}`.
    pub fn interval_sum(&self, idx: IntervalIndex) -> T {
        let kl = pow_u128(self.k, idx.ell);
        // p = i/grid lies in [a/(kl(k−1)), b/(kl(k−1))) iff a·k^{N−ℓ} ≤ i < b·k^{N−ℓ}.
        let scale = pow_u128(self.k, self.n.saturating_sub(idx.ell));
        let a = (idx.m as u128 - kl) * scale;
        let b = (idx.m as u128 + 1 - kl) * scale;
        let hi = (b as usize).min(self.masses.len());
        self.masses[(a as usize).min(hi)..hi].iter().fold(T::zero(), |s, x| s + x.clone())
    }

    /// `Σ_i mass_i e^{−2πi m p_i}`.
    pub fn fourier(&self, m: i64) -> Complex64 {
        let grid = self.grid();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, mass) in self.masses.iter().enumerate() {
            let phase = ((m as i128 * i as i128).rem_euclid(grid as i128)) as f64 / grid as f64;
            acc += Complex64::from_polar(mass.to_f64(), -2.0 * std::f64::consts::PI * phase);
        }
        acc
    }
}

fn positive_block_sum<T: Scalar>(rep: &LinearRepresentation<T>, n: u32) -> Result<T> {
    let sigma = rep.sum_block(n);
    let negligible = !T::EXACT && sigma.to_f64().abs() <= 1e-12 * rep.sum_matrix().max_abs_f64().powi(n as i32 + 1);
    if !sigma.is_positive() || negligible {
        return Err(Error::DegenerateBlock { n, value: sigma.to_string() });
    }
    Ok(sigma)
}

/// `μ_N` by brute-force evaluation of the block.
pub fn approximant<T: Scalar>(rep: &LinearRepresentation<T>, n: u32) -> Result<AtomicMeasure<T>> {
    let sigma = positive_block_sum(rep, n)?;
    if let Some(f) = IntegerForm::of(rep) {
        let mut values = Vec::new();
        for row in f.lead_rows() {
            f.walk(row, n, &mut |r| values.push(int_dot(r, f.v())));
        }
        let total: BigInt = values.iter().sum();
        let masses = values.into_iter().map(|x| T::from_rational(&Q::new(x, total.clone()))).collect();
        return Ok(AtomicMeasure { k: rep.k(), n, masses });
    }
    let masses = rep.block_values(n).into_iter().map(|x| x / sigma.clone()).collect();
    Ok(AtomicMeasure { k: rep.k(), n, masses })
}

/// `μ_N` as the finite convolution `ν_0 ∗ ν_1 ∗ ⋯ ∗ ν_N` of matrix-valued
/// atomic measures, `ν_0 = Σ_{j≥1} δ_{(j−1)/(k−1)} uᵀA_j` and
/// `ν_n = ρ^{-1} Σ_j δ_{j/((k−1)k^n)} A_j`, paired with `v`. Only a reduced
/// representation (`Σ(n) = ρ^n`) gives a probability measure.
pub fn convolution_approximant<T: Scalar>(rep: &LinearRepresentation<T>, n: u32) -> Result<AtomicMeasure<T>> {
    let s0 = rep.sum_block(0);
    if !s0.is_positive() {
        return Err(Error::DegenerateBlock { n: 0, value: s0.to_string() });
    }
    let rho = rep.sum_block(1) / s0;
    let k = rep.k();
    // Atoms indexed by the grid position numerator at the current level.
    let mut rows: Vec<Vec<T>> = (1..k).map(|j| rep.digit_matrix(j).left_mul(rep.u())).collect();
    for _ in 0..n {
        let mut next = Vec::with_capacity(rows.len() * k);
        for row in &rows {
            for a in rep.mats() {
                next.push(a.left_mul(row).into_iter().map(|x| x / rho.clone()).collect());
            }
        }
        rows = next;
    }
    let masses = rows.iter().map(|r| dot(r, rep.v())).collect();
    Ok(AtomicMeasure { k, n, masses })
}

/// `μ_N(I_{ℓ,m}) = uᵀA_{(m)_k}A^{N−ℓ}v / Σ_f(N)`.
pub fn interval_mass<T: Scalar>(rep: &LinearRepresentation<T>, n: u32, idx: IntervalIndex) -> Result<T> {
    if idx.ell > n {
        return Err(Error::Precondition(format!("interval level {} exceeds N = {n}", idx.ell)));
    }
    let sigma = positive_block_sum(rep, n)?;
    let tail = rep.sum_matrix().pow((n - idx.ell) as u64).right_mul(rep.v());
    let row = rep.row_after(&base_k_digits(idx.m, rep.k()))?;
    Ok(dot(&row, &tail) / sigma)
}

/// All level-`ell` masses of `μ_N`, left to right.
pub fn level_masses<T: Scalar>(rep: &LinearRepresentation<T>, n: u32, ell: u32) -> Result<Vec<T>> {
    if ell > n {
        return Err(Error::Precondition(format!("interval level {ell} exceeds N = {n}")));
    }
    let sigma = positive_block_sum(rep, n)?;
    let mut out = Vec::new();
    if let Some(f) = IntegerForm::of(rep) {
        let tail = f.sum_pow_v(n - ell);
        let head = f.sum_pow_v(n);
        let total: BigInt = f.lead_rows().iter().map(|r| int_dot(r, &head)).sum();
        for row in f.lead_rows() {
            f.walk(row, ell, &mut |r| out.push(T::from_rational(&Q::new(int_dot(r, &tail), total.clone()))));
        }
        return Ok(out);
    }
    let tail = rep.sum_matrix().pow((n - ell) as u64).right_mul(rep.v());
    for lead in 1..rep.k() {
        let row = rep.digit_matrix(lead).left_mul(rep.u());
        walk(rep.mats(), row, ell, &mut |r| out.push(dot(r, &tail) / sigma.clone()));
    }
    Ok(out)
}

fn walk<T: Scalar>(mats: &[Matrix<T>], row: Vec<T>, remaining: u32, visit: &mut impl FnMut(&[T])) {
    if remaining == 0 {
        visit(&row);
        return;
    }
    for m in mats {
        walk(mats, m.left_mul(&row), remaining - 1, visit);
    }
}

impl<T: Scalar> LimitData<T> {
    /// `R^ℓ R_h P z / (ρ^ℓ · uᵀ(A − A_0)R_hPv)`, the vector paired with
    /// `c(m)` to give `C_m(h)` at level `ℓ`.
    fn level_vector(&self, h: GroupElement, ell: u32) -> Result<Vec<f64>> {
        let denom = self.denominator(h);
        if denom <= 0.0 {
            return Err(Error::Precondition(format!("degenerate denominator {denom:.3e} at h = g^{}", h.0)));
        }
        let x = self.rotated_limit(h.0 as i64 - ell as i64);
        let s = 1.0 / (self.rho().powi(ell as i32) * denom);
        Ok(x.into_iter().map(|e| e * s).collect())
    }
}

/// `C_m(h)`, the `μ_h`-mass of `I_{ℓ,m}`.
pub fn cm<T: Scalar>(ld: &LimitData<T>, h: GroupElement, idx: IntervalIndex) -> Result<f64> {
    let w = idx.digits(ld.k());
    let mut row = ld.heads[w[0] - 1].clone();
    for &d in &w[1..] {
        row = ld.family.mats()[d].left_mul(&row);
    }
    Ok(dot(&row, &ld.level_vector(h, idx.ell)?))
}

/// Interval-mass tables of `μ_h` for one `h`.
#[derive(Clone, Debug, Serialize)]
pub struct MassTable {
    pub residue: u64,
    /// `levels[ℓ][i]` is the mass of `I_{ℓ, k^ℓ + i}`.
    pub levels: Vec<Vec<f64>>,
}

impl MassTable {
    pub fn mass(&self, idx: IntervalIndex, k: usize) -> f64 {
        self.levels[idx.ell as usize][(idx.m - (k as u64).pow(idx.ell)) as usize]
    }
}

/// The limit measures `μ_{f,j}`, one table per group element.
#[derive(Clone, Debug, Serialize)]
pub struct GhostFamily {
    pub k: usize,
    pub q: usize,
    pub depth: u32,
    pub tables: Vec<MassTable>,
}

/// Masses of `μ_h` on every interval up to level `depth`.
pub fn mass_table<T: Scalar>(ld: &LimitData<T>, h: GroupElement, depth: u32) -> Result<MassTable> {
    let mut levels = Vec::new();
    for ell in 0..=depth {
        let x = ld.level_vector(h, ell)?;
        let mut out = Vec::with_capacity((ld.k() - 1) * ld.k().pow(ell));
        for head in &ld.heads {
            walk(ld.family.mats(), head.clone(), ell, &mut |r| {
                let v = dot(r, &x);
                // Masses are nonnegative; clear rounding noise below zero.
                out.push(if v < 0.0 && v > -1e-12 { 0.0 } else { v });
            });
        }
        levels.push(out);
    }
    Ok(MassTable { residue: h.0, levels })
}

pub fn ghost_family<T: Scalar>(ld: &LimitData<T>, depth: u32) -> Result<GhostFamily> {
    let q =
        ld.group().order().ok_or_else(|| Error::Precondition("infinite rotation group; use sampled tables".into()))?;
    if !ld.nondegeneracy().is_nondegenerate() {
        return Err(Error::Precondition("representation is degenerate".into()));
    }
    let tables = (0..q as u64).map(|j| mass_table(ld, GroupElement(j), depth)).collect::<Result<Vec<_>>>()?;
    Ok(GhostFamily { k: ld.k(), q, depth, tables })
}

impl GhostFamily {
    /// Largest gap between the table for `N mod q` and the exact masses of
    /// `μ_N` on all levels up to `min(depth, N)`.
    pub fn deviation_from<T: Scalar>(&self, rep: &LinearRepresentation<T>, n: u32) -> Result<f64> {
        let table = &self.tables[n as usize % self.q];
        let mut worst: f64 = 0.0;
        for ell in 0..=self.depth.min(n) {
            let exact = level_masses(rep, n, ell)?;
            for (a, b) in exact.iter().zip(&table.levels[ell as usize]) {
                worst = worst.max((a.to_f64() - b).abs());
            }
        }
        Ok(worst)
    }
}

/// `(x, F(x))` at the grid points `i/(k^D(k−1))`, `F(0) = 0`.
pub fn cdf_grid(table: &MassTable, k: usize) -> Vec<(Q, f64)> {
    let depth = table.levels.len() as u32 - 1;
    let masses = &table.levels[depth as usize];
    let den = BigInt::from(pow_u128(k, depth)) * BigInt::from(k - 1);
    let mut out = vec![(Q::zero(), 0.0)];
    let mut acc = 0.0;
    for (i, m) in masses.iter().enumerate() {
        acc += m;
        out.push((Q::new(BigInt::from(i + 1), den.clone()), acc));
    }
    out
}

/// An eventually periodic coding `x = preperiod · period^∞`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Coding {
    pub preperiod: Vec<usize>,
    pub period: Vec<usize>,
}

impl Coding {
    /// The `i`-th digit (0-based).
    pub fn digit(&self, i: usize) -> usize {
        if i < self.preperiod.len() {
            self.preperiod[i]
        } else {
            self.period[(i - self.preperiod.len()) % self.period.len()]
        }
    }

    /// `π(x) = Σ (x_n − δ_{n,1}) / ((k−1)k^{n−1})`.
    pub fn value(&self, k: usize) -> Q {
        let kk = BigInt::from(k);
        let int = |ds: &[usize]| ds.iter().fold(BigInt::zero(), |acc, &d| acc * &kk + BigInt::from(d));
        let a = self.preperiod.len() as u32;
        let b = self.period.len() as u32;
        let frac = (Q::from_integer(int(&self.preperiod[1..])) + Q::new(int(&self.period), kk.pow(b) - 1))
            / Q::from_integer(kk.pow(a - 1));
        (Q::from_integer(BigInt::from(self.preperiod[0] as i64 - 1)) + frac) / Q::from_integer(BigInt::from(k - 1))
    }
}

/// Base-`k` expansion of `p/q ∈ [0,1)` as (preperiod, period) by long
/// division; the period is `[0]` for terminating expansions.
fn expand_fraction(frac: &Q, k: usize) -> (Vec<usize>, Vec<usize>) {
    let q = frac.denom().clone();
    let mut r = frac.numer().clone();
    let mut seen: Vec<BigInt> = Vec::new();
    let mut digits = Vec::new();
    loop {
        if let Some(pos) = seen.iter().position(|x| *x == r) {
            let period = digits.split_off(pos);
            return (digits, period);
        }
        seen.push(r.clone());
        let t = &r * BigInt::from(k);
        let (d, rem) = t.div_rem(&q);
        digits.push(d.to_usize().expect("digit fits"));
        r = rem;
    }
}

/// The coding(s) of `y ∈ [0,1]`; two at the 2-to-1 points, the
/// terminating-style coding first. `0` and `1` coincide on the circle and
/// share the pair `1 0^∞`, `(k−1)^∞`.
pub fn coding_of_rational(y: &Q, k: usize) -> Result<Vec<Coding>> {
    if y.is_negative() || *y > Q::one() {
        return Err(Error::Precondition(format!("y = {y} is outside [0, 1]")));
    }
    if y.is_zero() || y.is_one() {
        return Ok(vec![
            Coding { preperiod: vec![1], period: vec![0] },
            Coding { preperiod: vec![k - 1], period: vec![k - 1] },
        ]);
    }
    let t = y * Q::from_integer(BigInt::from(k - 1));
    let fl = t.floor();
    let frac = &t - &fl;
    let x1 = fl.to_integer().to_usize().expect("small") + 1;
    let (pre, period) = expand_fraction(&frac, k);
    let mut preperiod = vec![x1];
    preperiod.extend_from_slice(&pre);
    let first = Coding { preperiod, period: period.clone() };
    if period != [0] {
        return Ok(vec![first]);
    }
    let twin = if pre.is_empty() {
        Coding { preperiod: vec![x1 - 1], period: vec![k - 1] }
    } else {
        let mut p = vec![x1];
        p.extend_from_slice(&pre);
        *p.last_mut().unwrap() -= 1;
        Coding { preperiod: p, period: vec![k - 1] }
    };
    Ok(vec![first, twin])
}

/// The simplest rational (smallest denominator) in `[lo, hi)`.
pub fn simplest_rational_in(lo: &Q, hi: &Q) -> Q {
    let c = lo.ceil();
    if c < *hi {
        return c;
    }
    // Stern–Brocot descent between floor(lo) and floor(lo) + 1.
    let fl = lo.floor().to_integer();
    let (mut a, mut b) = ((fl.clone(), BigInt::one()), (fl + 1, BigInt::one()));
    loop {
        let med = Q::new(&a.0 + &b.0, &a.1 + &b.1);
        if med < *lo {
            a = (med.numer().clone(), med.denom().clone());
        } else if med >= *hi {
            b = (med.numer().clone(), med.denom().clone());
        } else {
            return med;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PointMass {
    Limit { value: f64, steps: usize },
    Zero { steps: usize },
    Undecided { last: f64 },
}

impl PointMass {
    pub fn value(&self) -> Option<f64> {
        match self {
            PointMass::Limit { value, .. } => Some(*value),
            PointMass::Zero { .. } => Some(0.0),
            PointMass::Undecided { .. } => None,
        }
    }
}

pub const POINT_MASS_TOL: f64 = 1e-9;
pub const POINT_MASS_WINDOW: usize = 5;
pub const POINT_MASS_STEPS: usize = 400;

/// `μ_h({y}) = lim c_n(h, y)`, summing over both codings at 2-to-1 points.
pub fn point_mass<T: Scalar>(ld: &LimitData<T>, h: GroupElement, y: &Q) -> Result<PointMass> {
    if ld.group().order().is_none() {
        return Err(Error::Precondition("point masses need a finite rotation group".into()));
    }
    let codings = coding_of_rational(y, ld.k())?;
    let denom = ld.denominator(h);
    if denom <= 0.0 {
        return Err(Error::Precondition(format!("degenerate denominator at h = g^{}", h.0)));
    }
    let rho = ld.rho();
    let mut rows: Vec<Vec<f64>> = codings.iter().map(|c| ld.heads[c.digit(0) - 1].clone()).collect();
    let mut history: Vec<f64> = Vec::new();
    // Convergence is only judged once every coding has entered its period.
    let settle = codings.iter().map(|c| c.preperiod.len() + 2 * c.period.len()).max().unwrap_or(0) + POINT_MASS_WINDOW;
    for n in 0..=POINT_MASS_STEPS {
        if n > 0 {
            for (row, c) in rows.iter_mut().zip(&codings) {
                *row = ld.family.mats()[c.digit(n)].left_mul(row).into_iter().map(|x| x / rho).collect();
            }
        }
        let x = ld.rotated_limit(h.0 as i64 - n as i64);
        let value: f64 = rows.iter().map(|r| dot(r, &x)).sum::<f64>() / denom;
        history.push(value);
        if n >= settle && history.len() >= POINT_MASS_WINDOW {
            let tail = &history[history.len() - POINT_MASS_WINDOW..];
            let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            if hi - lo < POINT_MASS_TOL {
                return Ok(if value.abs() < POINT_MASS_TOL {
                    PointMass::Zero { steps: n }
                } else {
                    PointMass::Limit { value, steps: n }
                });
            }
        }
    }
    Ok(PointMass::Undecided { last: *history.last().unwrap() })
}

/// Ambient forms of `R_h` and `P`: `Q X_Q Qᵀ` with `Q` an orthonormal basis
/// of `V`, plus the identity off `V` for rotations.
struct AmbientLift {
    q: Matrix<f64>,
    t: Matrix<f64>,
    t_inv: Matrix<f64>,
}

impl AmbientLift {
    fn new<T: Scalar>(ld: &LimitData<T>) -> Result<Self> {
        let b = ld.coords.space.basis_matrix().to_f64();
        let mut span = Span::<f64>::new(b.ncols());
        for r in 0..b.nrows() {
            span.insert(b.row(r));
        }
        let q = span.basis_matrix().transpose();
        let t = &b * &q;
        let t_inv = t.inverse().ok_or_else(|| Error::Numerical("basis of V is singular".into()))?;
        Ok(AmbientLift { q, t, t_inv })
    }

    fn compress(&self, x: &Matrix<f64>) -> Matrix<f64> {
        &(&self.q * &(&(&self.t_inv * x) * &self.t)) * &self.q.transpose()
    }

    fn rotation(&self, x: &Matrix<f64>) -> Matrix<f64> {
        let d = self.q.nrows();
        let qqt = &self.q * &self.q.transpose();
        &self.compress(x) + &(&Matrix::identity(d) - &qqt)
    }
}

/// Largest entry of `RA_i − A_iR` over all digits.
fn commutation_defect(r: &Matrix<f64>, mats: &[Matrix<f64>]) -> (usize, f64) {
    mats.iter().enumerate().map(|(i, a)| (i, (&(r * a) - &(a * r)).max_abs_f64())).fold((0, 0.0), |acc, x| {
        if x.1 > acc.1 {
            x
        } else {
            acc
        }
    })
}

/// `((Rᵀ)^{-1}u, {RA_i}, R_hPv / uᵀ(A−A_0)R_hPv)`, whose block sums are
/// `ρ^N` and whose unique limit measure is `μ_h`.
pub fn reduced_representation<T: Scalar>(
    rep: &LinearRepresentation<T>,
    ld: &LimitData<T>,
    h: GroupElement,
) -> Result<LinearRepresentation<f64>> {
    let lift = AmbientLift::new(ld)?;
    let mats: Vec<Matrix<f64>> = rep.mats().iter().map(Matrix::to_f64).collect();
    let r = lift.rotation(&ld.pd.rotation);
    let scale = mats.iter().map(Matrix::max_abs_f64).fold(1.0, f64::max);
    let (digit, defect) = commutation_defect(&r, &mats);
    if defect > 1e-9 * scale {
        return Err(Error::Precondition(format!("R does not commute with A_{digit} (max violation {defect:.3e})")));
    }
    let denom = ld.denominator(h);
    if denom <= 0.0 {
        return Err(Error::Precondition(format!("degenerate denominator at h = g^{}", h.0)));
    }
    let rh = lift.rotation(&ld.pd.rotation_power(h.0 as i64));
    let p = lift.compress(&ld.pd.projector);
    let v = rep.v().iter().map(T::to_f64).collect::<Vec<_>>();
    let vh: Vec<f64> = (&rh * &p).right_mul(&v).into_iter().map(|x| x / denom).collect();
    let r_inv_t = r.transpose().inverse().ok_or_else(|| Error::Numerical("R is singular".into()))?;
    let u = r_inv_t.right_mul(&rep.u().iter().map(T::to_f64).collect::<Vec<_>>());
    let reduced = LinearRepresentation::new(u, mats.iter().map(|a| &r * a).collect(), vh)?;
    let rho = ld.rho();
    for n in 0..=10u32 {
        let s = reduced.sum_block(n);
        let target = rho.powi(n as i32);
        if (s - target).abs() > 1e-8 * target {
            return Err(Error::Mismatch(format!(
                "reduced block sum Σ({n}) = {s:.12} differs from ρ^{n} = {target:.12}"
            )));
        }
    }
    Ok(reduced)
}

/// Checks the properties of a reduced representation needed by the product
/// formula; returns `ρ`.
pub fn check_reduced<T: Scalar>(rep: &LinearRepresentation<T>) -> Result<f64> {
    let f = rep.to_f64();
    let s0 = f.sum_block(0);
    if (s0 - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("not reduced: Σ(0) = {s0} ≠ 1")));
    }
    let pd = eigen_analysis(f.sum_matrix(), &SpectralOptions::default())?;
    if pd.group != Group::Trivial || pd.r != 1 || pd.peripheral.len() != 1 || pd.peripheral[0].multiplicity != 1 {
        return Err(Error::Precondition("not reduced: the maximal eigenvalue is not unique and simple".into()));
    }
    let rho = pd.rho;
    let av = f.sum_matrix().right_mul(f.v());
    let resid = av.iter().zip(f.v()).map(|(a, b)| (a - rho * b).abs()).fold(0.0, f64::max);
    if resid > 1e-9 * rho * f.v().iter().map(|x| x.abs()).fold(1.0, f64::max) {
        return Err(Error::Precondition(format!("not reduced: v is not a ρ-eigenvector (residual {resid:.3e})")));
    }
    Ok(rho)
}

/// A Fourier coefficient of the unique limit measure of a reduced
/// representation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FourierCoefficient {
    pub m: i64,
    pub re: f64,
    pub im: f64,
    pub err_est: f64,
}

impl FourierCoefficient {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `μ̂(m) ≈ uᵀ[Σ_{j≥1} A_j e^{−2πim(j−1)/(k−1)}] Π_{n=1}^{M} B̂(e^{−2πim/(k^n(k−1))}) v`
/// with `B̂(z) = ρ^{-1} Σ_j A_j z^j`.
pub fn fourier_coefficient<T: Scalar>(
    rep: &LinearRepresentation<T>,
    m: i64,
    truncation: u32,
) -> Result<FourierCoefficient> {
    let rho = check_reduced(rep)?;
    let f = rep.to_f64();
    let k = f.k();
    let d = f.dim();
    let tau = 2.0 * std::f64::consts::PI;
    let mul = |row: &[Complex64], a: &Matrix<f64>, w: Complex64, out: &mut [Complex64]| {
        for (c, o) in out.iter_mut().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for (r, x) in row.iter().enumerate() {
                s += x * a[(r, c)];
            }
            *o += s * w;
        }
    };
    let u: Vec<Complex64> = f.u().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut row = vec![Complex64::new(0.0, 0.0); d];
    for j in 1..k {
        let w = Complex64::from_polar(1.0, -tau * (m as f64) * (j as f64 - 1.0) / (k as f64 - 1.0));
        mul(&u, f.digit_matrix(j), w, &mut row);
    }
    let v: Vec<Complex64> = f.v().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let pair = |row: &[Complex64]| row.iter().zip(&v).map(|(a, b)| a * b).sum::<Complex64>();
    let mut prev = pair(&row);
    let mut value = prev;
    let mut last_step = 0.0;
    for n in 1..=truncation {
        let denom = (k as f64).powi(n as i32) * (k as f64 - 1.0);
        let mut next = vec![Complex64::new(0.0, 0.0); d];
        for j in 0..k {
            // Reduce m·j modulo the period to keep the phase accurate.
            let num = ((m as i128) * (j as i128)).rem_euclid(denom as i128) as f64;
            let w = Complex64::from_polar(1.0 / rho, -tau * num / denom);
            mul(&row, f.digit_matrix(j), w, &mut next);
        }
        row = next;
        value = pair(&row);
        last_step = (value - prev).norm();
        prev = value;
    }
    Ok(FourierCoefficient { m, re: value.re, im: value.im, err_est: last_step / (k as f64 - 1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn q(p: i64, r: i64) -> Q {
        Q::from_ratio(p, r)
    }

    #[test]
    fn interval_bounds() {
        let idx = IntervalIndex::new(1, 2, 2).unwrap();
        assert_eq!(idx.bounds(2), (q(0, 1), q(1, 2)));
        assert!(IntervalIndex::new(1, 4, 2).is_err());
        assert_eq!(IntervalIndex::level(2, 3).count(), 18);
    }

    #[test]
    fn approximants() {
        let t = approximant(&corpus::trivial(), 3).unwrap();
        assert_eq!(t.len(), 8);
        assert!(t.masses().iter().all(|m| *m == q(1, 8)));
        assert!(matches!(approximant(&corpus::degenerate(), 2), Err(Error::DegenerateBlock { .. })));
        let b = approximant(&corpus::example_b(), 2).unwrap();
        let pos: Vec<Q> = b.atoms().map(|(p, _)| p).collect();
        assert_eq!(pos, vec![q(0, 1), q(1, 4), q(1, 2), q(3, 4)]);
        assert!(b.masses().iter().all(|m| *m == q(1, 4)));
    }

    #[test]
    fn two_cycle_interval_masses() {
        let a = corpus::example_a();
        let idx = IntervalIndex::new(1, 2, 2).unwrap();
        assert_eq!(interval_mass(&a, 4, idx).unwrap(), q(2, 3));
        assert_eq!(interval_mass(&a, 5, idx).unwrap(), q(1, 3));
        let t = corpus::trivial();
        for ell in 0..4 {
            for idx in IntervalIndex::level(ell, 2) {
                assert_eq!(interval_mass(&t, 5, idx).unwrap(), q(1, 1 << ell));
            }
        }
    }

    #[test]
    fn limit_masses() {
        let a = corpus::example_a();
        let ld = LimitData::new(&a).unwrap();
        let idx = IntervalIndex::new(1, 2, 2).unwrap();
        assert!((cm(&ld, GroupElement(0), idx).unwrap() - 2.0 / 3.0).abs() < 1e-9);
        assert!((cm(&ld, GroupElement(1), idx).unwrap() - 1.0 / 3.0).abs() < 1e-9);
        let fam = ghost_family(&ld, 3).unwrap();
        assert_eq!(fam.tables.len(), 2);
        assert!(fam.deviation_from(&a, 10).unwrap() < 1e-6);
        assert!(fam.deviation_from(&a, 11).unwrap() < 1e-6);
    }

    #[test]
    fn mixed_limits() {
        let ld = LimitData::new(&corpus::mixed_two_cycle()).unwrap();
        let idx = IntervalIndex::new(1, 2, 2).unwrap();
        assert!((cm(&ld, GroupElement(1), idx).unwrap() - 0.5).abs() < 1e-9);
        let pm = point_mass(&ld, GroupElement(0), &q(1, 3)).unwrap();
        assert!((pm.value().unwrap() - 0.5).abs() < 1e-9, "{pm:?}");
        assert_eq!(point_mass(&ld, GroupElement(1), &q(1, 3)).unwrap().value(), Some(0.0));
    }

    #[test]
    fn convolution_matches_closed_form() {
        let z = corpus::zaremba_reduced();
        for n in 0..5 {
            assert_eq!(convolution_approximant(&z, n).unwrap().masses(), approximant(&z, n).unwrap().masses());
        }
    }

    #[test]
    fn codings() {
        let c = coding_of_rational(&q(2, 3), 2).unwrap();
        assert_eq!(c, vec![Coding { preperiod: vec![1], period: vec![1, 0] }]);
        let c = coding_of_rational(&q(1, 3), 2).unwrap();
        assert_eq!(c, vec![Coding { preperiod: vec![1], period: vec![0, 1] }]);
        let c = coding_of_rational(&q(0, 1), 2).unwrap();
        assert_eq!(c[0], Coding { preperiod: vec![1], period: vec![0] });
        assert_eq!(c.len(), 2);
        let c = coding_of_rational(&q(1, 2), 2).unwrap();
        assert_eq!(c.len(), 2);
        for x in &c {
            assert_eq!(x.value(2), q(1, 2));
        }
        assert!(coding_of_rational(&q(3, 2), 2).is_err());
    }

    #[test]
    fn simplest_rationals() {
        assert_eq!(simplest_rational_in(&q(1, 4), &q(1, 2)), q(1, 3));
        assert_eq!(simplest_rational_in(&q(0, 1), &q(1, 8)), q(0, 1));
        assert_eq!(simplest_rational_in(&q(682, 1024), &q(683, 1024)), q(2, 3));
    }

    #[test]
    fn point_masses() {
        let ld = LimitData::new(&corpus::point_mass_two_thirds()).unwrap();
        let pm = point_mass(&ld, GroupElement(0), &q(2, 3)).unwrap();
        assert!((pm.value().unwrap() - 1.0).abs() < 1e-9, "{pm:?}");
        // Shares its first ten digits with the coding of 2/3.
        assert_eq!(point_mass(&ld, GroupElement(0), &q(341, 512)).unwrap().value(), Some(0.0));
        let ld = LimitData::new(&corpus::trivial()).unwrap();
        assert_eq!(point_mass(&ld, GroupElement(0), &q(1, 3)).unwrap().value(), Some(0.0));
    }

    #[test]
    fn fourier_of_lebesgue() {
        let t = corpus::trivial();
        assert!((fourier_coefficient(&t, 0, 20).unwrap().value() - 1.0).norm() < 1e-12);
        assert!(fourier_coefficient(&t, 1, 20).unwrap().value().norm() < 1e-5);
        assert!(fourier_coefficient(&corpus::example_a(), 1, 5).is_err());
    }

    #[test]
    fn cdf_of_lebesgue() {
        let ld = LimitData::new(&corpus::trivial()).unwrap();
        let table = mass_table(&ld, GroupElement(0), 3).unwrap();
        for (x, f) in cdf_grid(&table, 2) {
            assert!((Scalar::to_f64(&x) - f).abs() < 1e-12);
        }
    }

    #[test]
    fn reduced_forms() {
        let t = corpus::trivial();
        let ld = LimitData::new(&t).unwrap();
        let red = reduced_representation(&t, &ld, GroupElement(0)).unwrap();
        assert!((red.v()[0] - 1.0).abs() < 1e-12);
        let z = corpus::zaremba();
        let ld = LimitData::new(&z).unwrap();
        let red = reduced_representation(&z, &ld, GroupElement(0)).unwrap();
        assert!((red.v()[0] - 0.4).abs() < 1e-9 && (red.v()[1] - 0.2).abs() < 1e-9);
        let a = corpus::example_a();
        let ld = LimitData::new(&a).unwrap();
        assert!(matches!(reduced_representation(&a, &ld, GroupElement(0)), Err(Error::Precondition(_))));
    }
}
