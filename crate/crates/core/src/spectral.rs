//! Peripheral spectrum of the restricted sum matrix, the rotation group it
//! generates, the rotation operators `R_h`, the limit projector `P`, and
//! the nondegeneracy test.
//!
//! All of this is floating point: eigenvalues of rational matrices are
//! algebraic numbers and only their numerical values are used.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linrep::LinearRepresentation;
use crate::matrix::{dot, to_nalgebra, vec_to_f64, Matrix};
use crate::scalar::Scalar;
use crate::subspace::{compute_vhat, restrict_hat, HatFamily, HatSpace, RestrictedFamily, VCoordinates};

/// Numerical knobs for the spectral analysis.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectralOptions {
    /// Relative tolerance for `|λ| = ρ`.
    pub tau_spec: f64,
    /// Largest root-of-unity order tried when detecting a finite group.
    pub q_max: usize,
    /// Eigenvalues closer than `cluster_tol · ρ` are treated as one.
    pub cluster_tol: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions { tau_spec: 1e-8, q_max: 64, cluster_tol: 1e-4 }
    }
}

/// Number of infinite-group elements `g^n` sampled (`n < GROUP_SAMPLES`).
pub const GROUP_SAMPLES: u64 = 256;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Group {
    Trivial,
    Cyclic {
        q: usize,
    },
    /// Not of finite order; only the powers `g^n` are sampled.
    Infinite,
}

impl Group {
    pub fn order(&self) -> Option<usize> {
        match self {
            Group::Trivial => Some(1),
            Group::Cyclic { q } => Some(*q),
            Group::Infinite => None,
        }
    }
}

/// The element `h = g^n` of the rotation group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GroupElement(pub u64);

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement(0);

    pub fn power(&self) -> u64 {
        self.0
    }
}

/// One peripheral eigenvalue `λ = gρ` with its spectral projector.
#[derive(Clone, Debug)]
pub struct PeripheralEigen {
    pub value: Complex64,
    pub phase: Complex64,
    /// Size of the largest Jordan block.
    pub jordan: usize,
    pub multiplicity: usize,
    pub projector: DMatrix<Complex64>,
}

#[derive(Clone, Debug)]
pub struct PeripheralData {
    pub rho: f64,
    pub eigenvalues: Vec<Complex64>,
    pub peripheral: Vec<PeripheralEigen>,
    pub r: usize,
    pub group: Group,
    /// `R = R_{g^{-1}}`.
    pub rotation: Matrix<f64>,
    pub projector: Matrix<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PeripheralSummary {
    pub rho: f64,
    pub peripheral: Vec<[f64; 2]>,
    pub jordan: Vec<usize>,
    pub r: usize,
    pub group: Group,
}

impl PeripheralData {
    pub fn summary(&self) -> PeripheralSummary {
        PeripheralSummary {
            rho: self.rho,
            peripheral: self.peripheral.iter().map(|p| [p.phase.re, p.phase.im]).collect(),
            jordan: self.peripheral.iter().map(|p| p.jordan).collect(),
            r: self.r,
            group: self.group.clone(),
        }
    }

    /// `R_{g^n} = I + Σ_λ (g_λ^n − 1) Π_λ`; negative `n` allowed.
    pub fn rotation_power(&self, n: i64) -> Matrix<f64> {
        let dim = self.rotation.nrows();
        let mut acc = DMatrix::<Complex64>::identity(dim, dim);
        for p in &self.peripheral {
            let f = p.phase.powi(n as i32) - Complex64::new(1.0, 0.0);
            acc += &p.projector * f;
        }
        Matrix::from_fn(dim, dim, |r, c| acc[(r, c)].re)
    }

    /// The elements of `G` used for enumeration: all of a finite group, or
    /// the first [`GROUP_SAMPLES`] powers of `g`.
    pub fn elements(&self) -> Vec<GroupElement> {
        let n = self.group.order().map(|q| q as u64).unwrap_or(GROUP_SAMPLES);
        (0..n).map(GroupElement).collect()
    }
}

/// All eigenvalues of a float matrix. The Schur iteration can stall when
/// every eigenvalue has the same modulus (cyclic permutations), so its
/// iterations are capped and shifted copies `M + sI` are tried next.
pub fn eigenvalues(m: &Matrix<f64>) -> Vec<Complex64> {
    let a = to_nalgebra(m);
    let d = a.nrows();
    if d == 0 {
        return Vec::new();
    }
    let scale = a.amax().max(f64::MIN_POSITIVE);
    for shift in [0.0, 0.3719, -0.5813, 1.2377, -2.1931] {
        let s = shift * scale;
        let b = &a + DMatrix::<f64>::identity(d, d) * s;
        if let Some(schur) = b.try_schur(f64::EPSILON, 5000) {
            return schur.complex_eigenvalues().iter().map(|z| z - s).collect();
        }
    }
    a.complex_eigenvalues().iter().cloned().collect()
}

/// Spectral radius of a float matrix.
pub fn spectral_radius(m: &Matrix<f64>) -> f64 {
    eigenvalues(m).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn cluster(values: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for &z in values {
        match clusters.iter_mut().find(|(c, n)| (*c / *n as f64 - z).norm() <= tol) {
            Some((c, n)) => {
                *c += z;
                *n += 1;
            }
            None => clusters.push((z, 1)),
        }
    }
    clusters.into_iter().map(|(c, n)| (c / n as f64, n)).collect()
}

/// Largest Jordan block at `lambda`, from the ranks of `(M − λ)^j`.
fn jordan_size(m: &DMatrix<Complex64>, lambda: Complex64, multiplicity: usize, rho: f64) -> Result<usize> {
    let n = m.nrows();
    let shifted = m - DMatrix::<Complex64>::identity(n, n) * lambda;
    let mut power = DMatrix::<Complex64>::identity(n, n);
    let mut ranks = vec![n];
    for j in 1..=multiplicity + 1 {
        power = &power * &shifted;
        let scale = rho.max(1e-300).powi(j as i32);
        let sv = power.singular_values();
        let mut rank = 0;
        for s in sv.iter() {
            if *s > 1e-6 * scale {
                rank += 1;
            } else if *s > 1e-9 * scale {
                return Err(Error::Numerical(format!(
                    "ambiguous rank of (Ã − λ)^{j} at λ = {lambda:.6}: singular value {s:.3e} lies in the gap (1e-9, 1e-6)·ρ^{j}"
                )));
            }
        }
        ranks.push(rank);
        if ranks[j] == ranks[j - 1] {
            return Ok(j - 1);
        }
    }
    Ok(multiplicity)
}

/// Riesz projector `(1/2πi)∮(z − M)^{-1}dz` around `lambda` by the
/// trapezoid rule on a circle.
fn riesz_projector(m: &DMatrix<Complex64>, lambda: Complex64, radius: f64) -> Result<DMatrix<Complex64>> {
    const POINTS: usize = 256;
    let n = m.nrows();
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..POINTS {
        let theta = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / POINTS as f64;
        let dz = Complex64::from_polar(radius, theta);
        let resolvent = (DMatrix::<Complex64>::identity(n, n) * (lambda + dz) - m)
            .try_inverse()
            .ok_or_else(|| Error::Numerical("resolvent is singular on the contour".into()))?;
        acc += resolvent * dz;
    }
    Ok(acc / Complex64::new(POINTS as f64, 0.0))
}

/// Spectral projector `x yᴴ / (yᴴ x)` at a simple eigenvalue, from the
/// right and left null vectors of `M − λ`.
fn simple_projector(m: &DMatrix<Complex64>, lambda: Complex64) -> Option<DMatrix<Complex64>> {
    let n = m.nrows();
    let shifted = m - DMatrix::<Complex64>::identity(n, n) * lambda;
    let svd = shifted.clone().svd(true, true);
    let i = svd.singular_values.imin();
    let mut x = svd.v_t?.row(i).adjoint();
    let mut y = svd.u?.column(i).into_owned();
    // The SVD leaves errors near 1e-8 in directions where M − λ is nearly
    // singular; inverse iteration cleans them up.
    let lu = shifted.clone().lu();
    let lu_t = shifted.adjoint().lu();
    for _ in 0..2 {
        if let Some(nx) = lu.solve(&x) {
            x = nx.normalize();
        }
        if let Some(ny) = lu_t.solve(&y) {
            y = ny.normalize();
        }
    }
    let denom = (y.adjoint() * &x)[(0, 0)];
    if denom.norm() < 1e-8 {
        return None;
    }
    Some(&x * y.adjoint() / denom)
}

/// Peripheral spectrum, group, `R` and `P` of the sum matrix `m`.
pub fn eigen_analysis(m: &Matrix<f64>, opts: &SpectralOptions) -> Result<PeripheralData> {
    let n = m.nrows();
    if n == 0 || m.max_abs_f64() == 0.0 {
        return Err(Error::Precondition("zero restriction: Ã = 0".into()));
    }
    let eigenvalues: Vec<Complex64> = eigenvalues(m);
    let rough = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let clusters = cluster(&eigenvalues, opts.cluster_tol * rough);
    let rho = clusters.iter().map(|(z, _)| z.norm()).fold(0.0, f64::max);
    if rho == 0.0 {
        return Err(Error::Precondition("Ã is nilpotent; no peripheral spectrum".into()));
    }
    let mc = to_nalgebra(m).map(|x| Complex64::new(x, 0.0));
    let mut peripheral = Vec::new();
    for (i, &(lambda, mult)) in clusters.iter().enumerate() {
        if (lambda.norm() - rho).abs() > opts.tau_spec * rho {
            continue;
        }
        let gap = clusters
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (z, _))| (z - lambda).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = if gap.is_finite() { gap / 2.0 } else { rho / 2.0 };
        let jordan = if mult == 1 { 1 } else { jordan_size(&mc, lambda, mult, rho)? };
        let projector = match (mult, jordan) {
            (1, 1) => simple_projector(&mc, lambda).map_or_else(|| riesz_projector(&mc, lambda, radius), Ok)?,
            _ => riesz_projector(&mc, lambda, radius)?,
        };
        peripheral.push(PeripheralEigen { value: lambda, phase: lambda / rho, jordan, multiplicity: mult, projector });
    }
    peripheral.sort_by(|a, b| a.phase.arg().partial_cmp(&b.phase.arg()).unwrap());
    let r = peripheral.iter().map(|p| p.jordan).max().unwrap_or(1);
    let group = detect_group(&peripheral, opts);
    let mut pd = PeripheralData {
        rho,
        eigenvalues,
        peripheral,
        r,
        group,
        rotation: Matrix::identity(n),
        projector: Matrix::identity(n),
    };
    pd.rotation = pd.rotation_power(-1);
    pd.projector = projector_p(&pd, m)?;
    Ok(pd)
}

fn detect_group(peripheral: &[PeripheralEigen], opts: &SpectralOptions) -> Group {
    for q in 1..=opts.q_max {
        if peripheral.iter().all(|p| (p.phase.powi(q as i32) - 1.0).norm() <= opts.tau_spec.max(1e-12) * 10.0) {
            return if q == 1 { Group::Trivial } else { Group::Cyclic { q } };
        }
    }
    Group::Infinite
}

/// `P = lim c_n R^n Ã^n`.
///
/// For `r = 1` this iterates `X ↦ X²` starting from `RÃ/ρ` (the powers
/// `(RÃ/ρ)^{2^j}`) until successive iterates agree to `1e-11`. For `r > 1`
/// the polynomial normalisation is handled in closed form:
/// `P = Σ_λ (ḡ_λ(Ã − λ))^{r−1} Π_λ`, summed over peripheral `λ`.
pub fn projector_p(pd: &PeripheralData, m: &Matrix<f64>) -> Result<Matrix<f64>> {
    let n = m.nrows();
    if pd.r == 1 {
        let mut x = (&pd.rotation * m).scale(&(1.0 / pd.rho));
        for _ in 0..64 {
            let next = &x * &x;
            let diff = (&next - &x).max_abs_f64();
            x = next;
            if diff < 1e-11 {
                return Ok(x);
            }
        }
        return Err(Error::Numerical("limit projector did not converge; the Jordan size r may be misestimated".into()));
    }
    let mc = to_nalgebra(m).map(|x| Complex64::new(x, 0.0));
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for p in &pd.peripheral {
        let step = (&mc - DMatrix::<Complex64>::identity(n, n) * p.value) * p.phase.conj();
        let mut term = p.projector.clone();
        for _ in 1..pd.r {
            term = &step * term;
        }
        acc += term;
    }
    Ok(Matrix::from_fn(n, n, |r, c| acc[(r, c)].re))
}

/// `R_h`; the index must lie in the group.
pub fn rotation(pd: &PeripheralData, h: GroupElement) -> Result<Matrix<f64>> {
    if let Some(q) = pd.group.order() {
        if h.0 >= q as u64 {
            return Err(Error::Precondition(format!("group element index {} out of range for order {q}", h.0)));
        }
    }
    Ok(pd.rotation_power(h.0 as i64))
}

/// Smallest `q` with `(λ/ρ)^q = 1` for all peripheral `λ` of a nonnegative
/// matrix.
pub fn matrix_period<T: Scalar>(a: &Matrix<T>) -> Result<usize> {
    if !a.is_nonnegative() {
        return Err(Error::Precondition("matrix has negative entries".into()));
    }
    let pd = eigen_analysis(&a.to_f64(), &SpectralOptions::default())?;
    pd.group
        .order()
        .ok_or_else(|| Error::Numerical("peripheral phases of a nonnegative matrix are not roots of unity".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Nondegeneracy {
    Nondegenerate {
        margin: f64,
    },
    Degenerate {
        witness: u64,
        value: f64,
    },
    /// Infinite group with a small positive sampled minimum.
    Inconclusive {
        sampled_min: f64,
    },
}

impl Nondegeneracy {
    pub fn is_nondegenerate(&self) -> bool {
        matches!(self, Nondegeneracy::Nondegenerate { .. })
    }
}

/// Everything about the limit behaviour of `Ã^n v` that the measure
/// constructions need.
#[derive(Clone, Debug)]
pub struct LimitData<T> {
    pub coords: VCoordinates<T>,
    pub family: RestrictedFamily<f64>,
    pub heads: Vec<Vec<f64>>,
    pub tail: Vec<f64>,
    pub pd: PeripheralData,
    pub options: SpectralOptions,
}

/// Relative threshold below which a limit denominator counts as zero.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Sampled minima below this (relative) margin are inconclusive.
pub const MARGIN_TOL: f64 = 1e-6;

impl<T: Scalar> LimitData<T> {
    pub fn new(rep: &LinearRepresentation<T>) -> Result<Self> {
        Self::with_options(rep, SpectralOptions::default())
    }

    pub fn with_options(rep: &LinearRepresentation<T>, options: SpectralOptions) -> Result<Self> {
        let coords = VCoordinates::new(rep)?;
        let family = coords.family.to_f64();
        let pd = eigen_analysis(family.sum(), &options)?;
        let heads = coords.heads.iter().map(|h| vec_to_f64(h)).collect();
        let tail = vec_to_f64(&coords.tail);
        Ok(LimitData { coords, family, heads, tail, pd, options })
    }

    pub fn k(&self) -> usize {
        self.family.k()
    }

    pub fn rho(&self) -> f64 {
        self.pd.rho
    }

    pub fn group(&self) -> &Group {
        &self.pd.group
    }

    /// The group element reached by blocks `N`: `h = g^N`.
    pub fn element_for_block(&self, n: u64) -> GroupElement {
        match self.pd.group.order() {
            Some(q) => GroupElement(n % q as u64),
            None => GroupElement(n),
        }
    }

    /// `R_{g^n} P z`, allowing any integer exponent.
    pub fn rotated_limit(&self, n: i64) -> Vec<f64> {
        let rp = &self.pd.rotation_power(n) * &self.pd.projector;
        rp.right_mul(&self.tail)
    }

    /// `v' = R_h P z`.
    pub fn limit_vector(&self, h: GroupElement) -> Vec<f64> {
        self.rotated_limit(h.0 as i64)
    }

    /// `Σ_{j≥1} c_j` as floats.
    pub fn head_sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.family.dim()];
        for h in &self.heads {
            for (a, b) in s.iter_mut().zip(h) {
                *a += b;
            }
        }
        s
    }

    /// `uᵀ(A − A_0) R_h P v`.
    pub fn denominator(&self, h: GroupElement) -> f64 {
        dot(&self.head_sum(), &self.limit_vector(h))
    }

    /// `V_lim = {R_h P v}`, sampled for infinite groups.
    pub fn v_lim(&self) -> Vec<(GroupElement, Vec<f64>)> {
        self.pd.elements().into_iter().map(|h| (h, self.limit_vector(h))).collect()
    }

    fn denominator_scale(&self) -> f64 {
        let hs: f64 = self.head_sum().iter().map(|x| x.abs()).sum();
        let pz: f64 = self.pd.projector.right_mul(&self.tail).iter().map(|x| x.abs()).fold(0.0, f64::max);
        (hs * pz).max(f64::MIN_POSITIVE)
    }

    /// `V̂` and the family restricted to it.
    pub fn hat(&self) -> Result<(HatSpace, HatFamily<T>)> {
        let seeds: Vec<Vec<f64>> = self.v_lim().into_iter().map(|(_, x)| x).collect();
        let hat = compute_vhat(&self.family, &seeds)?;
        let fam = restrict_hat(&self.coords.family, &hat)?;
        Ok((hat, fam))
    }

    pub fn nondegeneracy(&self) -> Nondegeneracy {
        let scale = self.denominator_scale();
        let values: Vec<(GroupElement, f64)> =
            self.pd.elements().into_iter().map(|h| (h, self.denominator(h))).collect();
        let (witness, min) =
            values.iter().cloned().fold((GroupElement(0), f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        if min <= DEGENERACY_TOL * scale {
            return Nondegeneracy::Degenerate { witness: witness.0, value: min };
        }
        if self.pd.group.order().is_none() && min < MARGIN_TOL * scale {
            return Nondegeneracy::Inconclusive { sampled_min: min };
        }
        Nondegeneracy::Nondegenerate { margin: min }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn m(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect())
    }

    #[test]
    fn cyclic_permutations_have_roots_of_unity() {
        for q in 2..=9usize {
            let p = Matrix::from_fn(q, q, |r, c| if c == (r + 1) % q { 1.0 } else { 0.0 });
            let ev = eigenvalues(&p);
            assert_eq!(ev.len(), q);
            assert!(ev.iter().all(|z| (z.norm() - 1.0).abs() < 1e-9 && (z.powi(q as i32).re - 1.0).abs() < 1e-8));
            assert_eq!(matrix_period(&p).unwrap(), q);
        }
    }

    fn close(a: &Matrix<f64>, b: &Matrix<f64>, tol: f64) -> bool {
        (a - b).max_abs_f64() <= tol
    }

    #[test]
    fn two_cycle_spectrum() {
        let a = m(&[&[0.0, 3.0], &[3.0, 0.0]]);
        let pd = eigen_analysis(&a, &SpectralOptions::default()).unwrap();
        assert!((pd.rho - 3.0).abs() < 1e-12);
        assert_eq!(pd.peripheral.len(), 2);
        assert_eq!(pd.r, 1);
        assert_eq!(pd.group, Group::Cyclic { q: 2 });
        assert!(close(&pd.projector, &Matrix::identity(2), 1e-9));
        let r1 = rotation(&pd, GroupElement(1)).unwrap();
        assert!(close(&(&r1 * &r1), &Matrix::identity(2), 1e-9));
        assert!(close(&rotation(&pd, GroupElement(0)).unwrap(), &Matrix::identity(2), 1e-12));
        assert!(rotation(&pd, GroupElement(2)).is_err());
    }

    #[test]
    fn scalar_spectrum_is_trivial() {
        let pd = eigen_analysis(&m(&[&[2.0]]), &SpectralOptions::default()).unwrap();
        assert_eq!(pd.group, Group::Trivial);
        assert!(close(&pd.projector, &m(&[&[1.0]]), 1e-12));
    }

    #[test]
    fn zero_restriction_is_an_error() {
        assert!(eigen_analysis(&m(&[&[0.0]]), &SpectralOptions::default()).is_err());
    }

    #[test]
    fn jordan_block_limit() {
        // Ã^n = [[2^n, n2^{n−1}],[0,2^n]] and c_n = 1/(n2^{n−1}).
        let a = m(&[&[2.0, 1.0], &[0.0, 2.0]]);
        let pd = eigen_analysis(&a, &SpectralOptions::default()).unwrap();
        assert_eq!(pd.r, 2);
        assert!(close(&pd.projector, &m(&[&[0.0, 1.0], &[0.0, 0.0]]), 1e-8));
    }

    #[test]
    fn irrational_rotation_gives_an_infinite_group() {
        let rep = corpus::rotation(std::f64::consts::SQRT_2 - 1.0, 2.0, 2.0);
        let pd = eigen_analysis(rep.sum_matrix(), &SpectralOptions::default()).unwrap();
        assert!((pd.rho - 3.0).abs() < 1e-9);
        assert_eq!(pd.group, Group::Infinite);
    }

    #[test]
    fn periods() {
        assert_eq!(matrix_period(&m(&[&[0.0, 3.0], &[3.0, 0.0]])).unwrap(), 2);
        assert_eq!(matrix_period(&m(&[&[2.0]])).unwrap(), 1);
        assert_eq!(matrix_period(corpus::mixed_two_cycle().sum_matrix()).unwrap(), 2);
        assert!(matrix_period(&m(&[&[-1.0]])).is_err());
    }

    #[test]
    fn nondegeneracy_verdicts() {
        let deg = LimitData::new(&corpus::degenerate()).unwrap();
        assert!(matches!(deg.nondegeneracy(), Nondegeneracy::Degenerate { witness: 0, .. }));
        let a = LimitData::new(&corpus::example_a()).unwrap();
        assert!(a.nondegeneracy().is_nondegenerate());
        let t = LimitData::new(&corpus::trivial()).unwrap();
        match t.nondegeneracy() {
            Nondegeneracy::Nondegenerate { margin } => assert!((margin - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert_eq!(t.v_lim().len(), 1);
        assert_eq!(a.v_lim().len(), 2);
    }
}
