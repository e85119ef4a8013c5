//! The row space `V` spanned by the vectors `uᵀA_w` with a nonzero leading
//! digit, the restriction of the digit matrices to it, and the column space
//! `V̂ ⊆ V` generated by the limit vectors.
//!
//! Restricted matrices are stored in coordinates: with `B` the basis rows of
//! `V`, `M_i` is defined by `B A_i = M_i B`. A value `f(n)` with digits
//! `w_1 w_2 ⋯ w_n` (`w_1 ≠ 0`) is then `c_{w_1} M_{w_2} ⋯ M_{w_n} z` where
//! `c_j` are the coordinates of `uᵀA_j` and `z = B v`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linrep::LinearRepresentation;
use crate::matrix::{dot, sum_all, vec_to_f64, Matrix, Span};
use crate::scalar::Scalar;

/// A subspace of row vectors together with the number of refinement steps
/// needed to find it.
#[derive(Clone, Debug)]
pub struct Subspace<T> {
    span: Span<T>,
    iterations: usize,
}

impl<T: Scalar> Subspace<T> {
    pub fn dim(&self) -> usize {
        self.span.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.span.ambient_dim()
    }

    /// Basis vectors; reduced echelon form in exact mode, orthonormal in
    /// float mode.
    pub fn basis(&self) -> &[Vec<T>] {
        self.span.basis()
    }

    /// The basis as a `dim × ambient` matrix.
    pub fn basis_matrix(&self) -> Matrix<T> {
        self.span.basis_matrix()
    }

    /// Index `n` of the first `V_n` with `V_n = V_{n+1}`.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.span.contains(x)
    }

    pub fn coords(&self, x: &[T]) -> std::result::Result<Vec<T>, f64> {
        self.span.coords(x)
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }
}

/// `V = span{uᵀA_{(n)_k} : n ≥ 1}`, built as the nested union
/// `V_n = span(U_0 ∪ ⋯ ∪ U_n)` with `U_m = uᵀ𝒜'𝒜^m`.
pub fn compute_v<T: Scalar>(rep: &LinearRepresentation<T>) -> Subspace<T> {
    let d = rep.dim();
    let mut total = Span::new(d);
    // A basis of span(U_m); U_{m+1} is spanned by its images.
    let mut level = Span::new(d);
    for j in 1..rep.k() {
        let row = rep.digit_matrix(j).left_mul(rep.u());
        level.insert(&row);
        total.insert(&row);
    }
    let mut n = 0;
    loop {
        let before = total.dim();
        let mut next = Span::new(d);
        for b in level.basis() {
            for m in rep.mats() {
                let row = m.left_mul(b);
                next.insert(&row);
                total.insert(&row);
            }
        }
        if total.dim() == before {
            return Subspace { span: total, iterations: n };
        }
        level = next;
        n += 1;
    }
}

/// Digit matrices expressed in a basis of an invariant subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedFamily<T> {
    mats: Vec<Matrix<T>>,
    sum: Matrix<T>,
}

impl<T: Scalar> RestrictedFamily<T> {
    pub fn from_mats(mats: Vec<Matrix<T>>) -> Self {
        let sum = sum_all(&mats);
        RestrictedFamily { mats, sum }
    }

    pub fn dim(&self) -> usize {
        self.sum.nrows()
    }

    pub fn k(&self) -> usize {
        self.mats.len()
    }

    pub fn mats(&self) -> &[Matrix<T>] {
        &self.mats
    }

    pub fn sum(&self) -> &Matrix<T> {
        &self.sum
    }

    pub fn to_f64(&self) -> RestrictedFamily<f64> {
        RestrictedFamily { mats: self.mats.iter().map(Matrix::to_f64).collect(), sum: self.sum.to_f64() }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.mats.iter().all(Matrix::is_nonnegative)
    }
}

/// Coordinate matrices `M_i` with `B A_i = M_i B` for the basis rows `B` of `s`.
pub fn restrict<T: Scalar>(rep: &LinearRepresentation<T>, s: &Subspace<T>) -> Result<RestrictedFamily<T>> {
    let mut mats = Vec::with_capacity(rep.k());
    for (digit, a) in rep.mats().iter().enumerate() {
        let mut rows = Vec::with_capacity(s.dim());
        for b in s.basis() {
            let image = a.left_mul(b);
            rows.push(s.coords(&image).map_err(|residual| Error::NotInvariant { digit, residual })?);
        }
        mats.push(if rows.is_empty() { Matrix::zeros(0, 0) } else { Matrix::from_rows(rows) });
    }
    Ok(RestrictedFamily::from_mats(mats))
}

/// Everything needed to evaluate `f` through the restriction to `V`.
#[derive(Clone, Debug)]
pub struct VCoordinates<T> {
    pub space: Subspace<T>,
    pub family: RestrictedFamily<T>,
    /// Coordinates of `uᵀA_j` for `j = 1..k`; index `j − 1`.
    pub heads: Vec<Vec<T>>,
    /// `z = B v`.
    pub tail: Vec<T>,
}

impl<T: Scalar> VCoordinates<T> {
    pub fn new(rep: &LinearRepresentation<T>) -> Result<Self> {
        let space = compute_v(rep);
        if space.is_zero() {
            return Err(Error::Precondition("V is the zero space".into()));
        }
        let family = restrict(rep, &space)?;
        let heads = (1..rep.k())
            .map(|j| {
                let row = rep.digit_matrix(j).left_mul(rep.u());
                space.coords(&row).map_err(|residual| Error::NotInvariant { digit: j, residual })
            })
            .collect::<Result<Vec<_>>>()?;
        let tail = space.basis_matrix().right_mul(rep.v());
        Ok(VCoordinates { space, family, heads, tail })
    }

    pub fn k(&self) -> usize {
        self.family.k()
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    /// `c(w) = c_{w_1} M_{w_2} ⋯ M_{w_n}`; `w_1` must be nonzero.
    pub fn head_row(&self, w: &[usize]) -> Vec<T> {
        assert!(!w.is_empty() && w[0] != 0, "leading digit must be nonzero");
        w[1..].iter().fold(self.heads[w[0] - 1].clone(), |row, &d| self.family.mats[d].left_mul(&row))
    }

    /// `f` evaluated through the restriction.
    pub fn value(&self, w: &[usize]) -> T {
        dot(&self.head_row(w), &self.tail)
    }

    /// `Σ_{j ≥ 1} c_j`, the coordinates of `uᵀ(A − A_0)`.
    pub fn head_sum(&self) -> Vec<T> {
        let mut s = vec![T::zero(); self.dim()];
        for h in &self.heads {
            for (a, b) in s.iter_mut().zip(h) {
                *a = a.clone() + b.clone();
            }
        }
        s
    }
}

/// `V̂` in coordinates of `V`: the smallest subspace containing the seeds
/// and invariant under the column action of every `M_i`.
#[derive(Clone, Debug, Serialize)]
pub struct HatSpace {
    pub dim: usize,
    pub ambient_dim: usize,
    /// Orthonormal columns spanning `V̂`, or `None` when `V̂ = V`.
    #[serde(skip)]
    pub basis: Option<Matrix<f64>>,
}

/// The restricted family on `V̂`: the native matrices when `V̂ = V`,
/// otherwise their float compressions `QᵀM_iQ`.
#[derive(Clone, Debug)]
pub enum HatFamily<T> {
    Whole(RestrictedFamily<T>),
    Projected(RestrictedFamily<f64>),
}

impl<T: Scalar> HatFamily<T> {
    pub fn dim(&self) -> usize {
        match self {
            HatFamily::Whole(f) => f.dim(),
            HatFamily::Projected(f) => f.dim(),
        }
    }

    pub fn to_f64(&self) -> RestrictedFamily<f64> {
        match self {
            HatFamily::Whole(f) => f.to_f64(),
            HatFamily::Projected(f) => f.clone(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, HatFamily::Whole(_)) && T::EXACT
    }
}

/// Column closure of `seeds` under `fam` (float).
pub fn compute_vhat(fam: &RestrictedFamily<f64>, seeds: &[Vec<f64>]) -> Result<HatSpace> {
    let r = fam.dim();
    let mut span = Span::<f64>::new(r);
    let mut queue: Vec<Vec<f64>> = Vec::new();
    for s in seeds {
        if span.insert(s) {
            queue.push(s.clone());
        }
    }
    while let Some(x) = queue.pop() {
        for m in fam.mats() {
            let y = m.right_mul(&x);
            if span.insert(&y) {
                queue.push(y);
            }
        }
    }
    if span.dim() == 0 {
        return Err(Error::Precondition("V̂ is the zero space".into()));
    }
    let basis = (span.dim() < r).then(|| span.basis_matrix().transpose());
    Ok(HatSpace { dim: span.dim(), ambient_dim: r, basis })
}

/// Restricts `fam` to `hat`; exact when `V̂ = V`.
pub fn restrict_hat<T: Scalar>(fam: &RestrictedFamily<T>, hat: &HatSpace) -> Result<HatFamily<T>> {
    let Some(q) = &hat.basis else {
        return Ok(HatFamily::Whole(fam.clone()));
    };
    let qt = q.transpose();
    let mut mats = Vec::new();
    for (digit, m) in fam.mats().iter().enumerate() {
        let mq = &m.to_f64() * q;
        let compressed = &qt * &mq;
        let residual = (&mq - &(q * &compressed)).max_abs_f64();
        if residual > 1e-8 * m.to_f64().max_abs_f64().max(1.0) {
            return Err(Error::NotInvariant { digit, residual });
        }
        mats.push(compressed);
    }
    Ok(HatFamily::Projected(RestrictedFamily::from_mats(mats)))
}

/// Lifts coordinates `y` of `V` to the ambient space, `Bᵀy` (meaningful as
/// an ambient vector of `V` when `B` is orthonormal).
pub fn lift<T: Scalar>(space: &Subspace<T>, y: &[f64]) -> Vec<f64> {
    let b = space.basis_matrix().to_f64();
    b.left_mul(y)
}

/// Coordinates of the heads as floats, one row per digit `j ≥ 1`.
pub fn heads_f64<T: Scalar>(coords: &VCoordinates<T>) -> Vec<Vec<f64>> {
    coords.heads.iter().map(|h| vec_to_f64(h)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::linrep::DigitString;
    use crate::scalar::Q;

    #[test]
    fn v_of_the_constant_tail_example_is_a_line() {
        let v = compute_v(&corpus::example_b());
        assert_eq!(v.dim(), 1);
        assert!(v.contains(&[Q::from_i64(1), Q::from_i64(1)]));
        let fam = restrict(&corpus::example_b(), &v).unwrap();
        assert_eq!(fam.mats()[0], Matrix::from_rows(vec![vec![Q::from_i64(1)]]));
        assert_eq!(fam.mats()[1], Matrix::from_rows(vec![vec![Q::from_i64(1)]]));
    }

    #[test]
    fn dimensions_on_small_examples() {
        assert_eq!(compute_v(&corpus::example_a()).dim(), 2);
        assert_eq!(compute_v(&corpus::trivial()).dim(), 1);
        assert_eq!(compute_v(&corpus::mixed_two_cycle()).dim(), 3);
        assert_eq!(compute_v(&corpus::point_mass_two_thirds()).dim(), 2);
    }

    #[test]
    fn stabilises_within_d_steps() {
        for (_, rep) in corpus::named() {
            assert!(compute_v(&rep).iterations() <= rep.dim());
        }
    }

    #[test]
    fn restricted_evaluation_matches_direct() {
        for (name, rep) in corpus::named() {
            let c = VCoordinates::new(&rep).unwrap();
            for n in 1..200u64 {
                let w = DigitString::of(n, rep.k());
                assert_eq!(c.value(w.digits()), rep.evaluate(n), "{name} at {n}");
            }
        }
    }

    #[test]
    fn non_invariant_subspace_is_rejected() {
        let rep = corpus::example_a();
        let mut span = Span::new(2);
        span.insert(&[Q::from_i64(1), Q::from_i64(0)]);
        let s = Subspace { span, iterations: 0 };
        assert!(matches!(restrict(&rep, &s), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn vhat_is_a_closure() {
        let fam = RestrictedFamily::from_mats(vec![
            Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 0.0]]),
            Matrix::from_rows(vec![vec![2.0, 0.0], vec![0.0, 3.0]]),
        ]);
        let hat = compute_vhat(&fam, &[vec![1.0, 0.0]]).unwrap();
        assert_eq!(hat.dim, 1);
        let hf = restrict_hat(&fam, &hat).unwrap();
        assert_eq!(hf.to_f64().sum()[(0, 0)], 3.0);
        let hat = compute_vhat(&fam, &[vec![1.0, 1.0]]).unwrap();
        assert_eq!(hat.dim, 2);
        assert!(hat.basis.is_none());
    }
}
