//! Linear representations `f(n) = uᵀ A_{(n)_k} v` and what can be checked
//! about them without any spectral information.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::intform::{dot as int_dot, IntegerForm};
use crate::matrix::{dot, sum_all, Matrix, Span};
use crate::scalar::{Scalar, DEFAULT_RANK_TOL, Q};

/// Base-`k` digits, most significant first. The empty string encodes `0`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DigitString(Vec<usize>);

impl DigitString {
    /// Wraps a digit sequence verbatim (leading zeros are kept, which is the
    /// form used when concatenating words).
    pub fn from_digits(digits: Vec<usize>) -> Self {
        DigitString(digits)
    }

    pub fn of(n: u64, k: usize) -> Self {
        base_k_digits(n, k)
    }

    pub fn digits(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The numeral's value in base `k`.
    pub fn value(&self, k: usize) -> u128 {
        self.0.iter().fold(0u128, |acc, &d| acc * k as u128 + d as u128)
    }

    pub fn concat(&self, other: &DigitString) -> DigitString {
        let mut d = self.0.clone();
        d.extend_from_slice(&other.0);
        DigitString(d)
    }
}

impl fmt::Display for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

/// Base-`k` expansion of `n`; `0` maps to the empty string.
pub fn base_k_digits(mut n: u64, k: usize) -> DigitString {
    assert!(k >= 2, "base must be at least 2");
    let mut out = Vec::new();
    while n > 0 {
        out.push((n % k as u64) as usize);
        n /= k as u64;
    }
    out.reverse();
    DigitString(out)
}

/// `(u, A_0..A_{k-1}, v)` with the digit-matrix sum cached.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRepresentation<T> {
    u: Vec<T>,
    v: Vec<T>,
    mats: Vec<Matrix<T>>,
    sum: Matrix<T>,
}

impl<T: Scalar> LinearRepresentation<T> {
    pub fn new(u: Vec<T>, mats: Vec<Matrix<T>>, v: Vec<T>) -> Result<Self> {
        let d = u.len();
        if d == 0 {
            return Err(Error::InvalidRepresentation("dimension must be at least 1".into()));
        }
        if mats.len() < 2 {
            return Err(Error::InvalidRepresentation(format!("need k ≥ 2 digit matrices, got {}", mats.len())));
        }
        if v.len() != d {
            return Err(Error::InvalidRepresentation(format!("u has length {d} but v has length {}", v.len())));
        }
        if let Some((j, m)) = mats.iter().enumerate().find(|(_, m)| m.nrows() != d || m.ncols() != d) {
            return Err(Error::InvalidRepresentation(format!(
                "digit matrix {j} is {}×{}, expected {d}×{d}",
                m.nrows(),
                m.ncols()
            )));
        }
        let sum = sum_all(&mats);
        Ok(LinearRepresentation { u, v, mats, sum })
    }

    pub fn k(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self) -> &[T] {
        &self.u
    }

    pub fn v(&self) -> &[T] {
        &self.v
    }

    pub fn mats(&self) -> &[Matrix<T>] {
        &self.mats
    }

    pub fn digit_matrix(&self, j: usize) -> &Matrix<T> {
        &self.mats[j]
    }

    /// `A = Σ_j A_j`.
    pub fn sum_matrix(&self) -> &Matrix<T> {
        &self.sum
    }

    pub fn to_f64(&self) -> LinearRepresentation<f64> {
        LinearRepresentation {
            u: self.u.iter().map(T::to_f64).collect(),
            v: self.v.iter().map(T::to_f64).collect(),
            mats: self.mats.iter().map(Matrix::to_f64).collect(),
            sum: self.sum.to_f64(),
        }
    }

    fn check_digits(&self, w: &DigitString) -> Result<()> {
        match w.digits().iter().find(|&&d| d >= self.k()) {
            Some(&digit) => Err(Error::DigitOutOfRange { digit, k: self.k() }),
            None => Ok(()),
        }
    }

    /// `A_{i_s}⋯A_{i_0}` for `w = i_s⋯i_0`; the identity for the empty word.
    pub fn digit_product(&self, w: &DigitString) -> Result<Matrix<T>> {
        self.check_digits(w)?;
        Ok(w.digits().iter().fold(Matrix::identity(self.dim()), |acc, &d| &acc * &self.mats[d]))
    }

    /// The row vector `uᵀ A_w`.
    pub fn row_after(&self, w: &DigitString) -> Result<Vec<T>> {
        self.check_digits(w)?;
        Ok(w.digits().iter().fold(self.u.clone(), |row, &d| self.mats[d].left_mul(&row)))
    }

    /// `f(n) = uᵀ A_{(n)_k} v`.
    pub fn evaluate(&self, n: u64) -> T {
        let row = self.row_after(&base_k_digits(n, self.k())).expect("digits are in range");
        dot(&row, &self.v)
    }

    /// `Σ_f(N) = uᵀ (A − A_0) A^N v`, the total of the block `k^N ≤ m < k^{N+1}`.
    pub fn sum_block(&self, n: u32) -> T {
        let mut row = (&self.sum - &self.mats[0]).left_mul(&self.u);
        for _ in 0..n {
            row = self.sum.left_mul(&row);
        }
        dot(&row, &self.v)
    }

    /// The same block total by direct summation of `f(m)`.
    pub fn sum_block_brute(&self, n: u32) -> T {
        self.block_values(n).into_iter().fold(T::zero(), |s, x| s + x)
    }

    /// `f(k^N + m)` for `0 ≤ m < k^N (k−1)`, in increasing order of `m`.
    pub fn block_values(&self, n: u32) -> Vec<T> {
        if let Some(f) = IntegerForm::of(self) {
            let scale = f.scale(n + 1);
            let mut out = Vec::new();
            for row in f.lead_rows() {
                f.walk(row, n, &mut |r| out.push(T::from_rational(&Q::new(int_dot(r, f.v()), scale.clone()))));
            }
            return out;
        }
        let mut out = Vec::new();
        for lead in 1..self.k() {
            let row = self.mats[lead].left_mul(&self.u);
            self.visit_block(row, n, &mut out);
        }
        out
    }

    fn visit_block(&self, row: Vec<T>, remaining: u32, out: &mut Vec<T>) {
        if remaining == 0 {
            out.push(dot(&row, &self.v));
            return;
        }
        for m in &self.mats {
            self.visit_block(m.left_mul(&row), remaining - 1, out);
        }
    }

    /// Reachability/observability ranks.
    pub fn minimality(&self) -> MinimalityReport {
        let d = self.dim();
        let forward = closure(&self.u, |x| self.mats.iter().map(|m| m.left_mul(x)).collect());
        let backward = closure(&self.v, |x| self.mats.iter().map(|m| m.right_mul(x)).collect());
        MinimalityReport {
            minimal: forward.dim() == d && backward.dim() == d,
            dim: d,
            forward_rank: forward.dim(),
            backward_rank: backward.dim(),
            rank_tolerance: (!T::EXACT).then_some(DEFAULT_RANK_TOL),
        }
    }

    pub fn is_minimal(&self) -> bool {
        self.minimality().minimal
    }

    /// Checks `uᵀ = uᵀA_0` and that `uᵀA_w ≥ 0` for all words with nonzero
    /// leading digit up to the given length.
    pub fn canonical_check(&self, depth: usize) -> CanonicalReport {
        let fixed = self.mats[0].left_mul(&self.u) == self.u;
        let mut nonneg = true;
        let mut frontier: Vec<Vec<T>> = (1..self.k()).map(|j| self.mats[j].left_mul(&self.u)).collect();
        for level in 0..depth {
            if frontier.iter().any(|r| r.iter().any(|x| x.is_negative())) {
                nonneg = false;
                break;
            }
            if level + 1 == depth {
                break;
            }
            frontier = frontier.iter().flat_map(|r| self.mats.iter().map(move |m| m.left_mul(r))).collect();
        }
        CanonicalReport { u_fixed_by_zero_digit: fixed, nonnegative_rows: nonneg, depth }
    }
}

/// Result of [`LinearRepresentation::minimality`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimalityReport {
    pub minimal: bool,
    pub dim: usize,
    pub forward_rank: usize,
    pub backward_rank: usize,
    pub rank_tolerance: Option<f64>,
}

/// Result of [`LinearRepresentation::canonical_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalReport {
    pub u_fixed_by_zero_digit: bool,
    pub nonnegative_rows: bool,
    pub depth: usize,
}

/// Smallest span containing `seed` and closed under `step`.
pub(crate) fn closure<T: Scalar>(seed: &[T], step: impl Fn(&[T]) -> Vec<Vec<T>>) -> Span<T> {
    let mut span = Span::new(seed.len());
    let mut queue = Vec::new();
    if span.insert(seed) {
        queue.push(seed.to_vec());
    }
    while let Some(x) = queue.pop() {
        for y in step(&x) {
            if span.insert(&y) {
                queue.push(y);
            }
        }
    }
    span
}

/// Finds `M` with `u_aᵀM = u_cᵀ`, `M⁻¹A_iM = C_i` and `M⁻¹v_a = v_c`.
pub fn change_of_basis<T: Scalar>(a: &LinearRepresentation<T>, c: &LinearRepresentation<T>) -> Result<Matrix<T>> {
    if a.k() != c.k() || a.dim() != c.dim() {
        return Err(Error::Precondition(format!(
            "dimension mismatch: (k={}, d={}) vs (k={}, d={})",
            a.k(),
            a.dim(),
            c.k(),
            c.dim()
        )));
    }
    if !a.is_minimal() || !c.is_minimal() {
        return Err(Error::Precondition("both representations must be minimal".into()));
    }
    let d = a.dim();
    // Words whose rows span the forward space of `c`.
    let mut span = Span::new(d);
    let mut words: Vec<Vec<usize>> = Vec::new();
    let mut queue = vec![Vec::new()];
    while let Some(w) = queue.pop() {
        let row = c.row_after(&DigitString::from_digits(w.clone()))?;
        if span.insert(&row) {
            for j in 0..c.k() {
                let mut next = w.clone();
                next.push(j);
                queue.insert(0, next);
            }
            words.push(w);
        }
        if span.is_full() {
            break;
        }
    }
    let rows = |rep: &LinearRepresentation<T>| -> Result<Matrix<T>> {
        let r =
            words.iter().map(|w| rep.row_after(&DigitString::from_digits(w.clone()))).collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_rows(r))
    };
    let xa = rows(a)?;
    let xc = rows(c)?;
    let xa_inv = xa.inverse().ok_or_else(|| Error::Mismatch("singular system: the sequences differ".into()))?;
    let m = &xa_inv * &xc;
    let m_inv = m.inverse().ok_or_else(|| Error::Mismatch("recovered basis change is singular".into()))?;
    let close = |x: &[T], y: &[T]| -> bool {
        if T::EXACT {
            x == y
        } else {
            let scale = x.iter().chain(y).map(|e| e.to_f64().abs()).fold(1.0, f64::max);
            x.iter().zip(y).all(|(p, q)| (p.to_f64() - q.to_f64()).abs() <= 1e-9 * scale)
        }
    };
    let ok_u = close(&m.left_mul(a.u()), c.u());
    let ok_v = close(&m_inv.right_mul(a.v()), c.v());
    let ok_m = a
        .mats()
        .iter()
        .zip(c.mats())
        .all(|(ai, ci)| close(&(&(&m_inv * ai) * &m).to_rows().concat(), &ci.to_rows().concat()));
    if ok_u && ok_v && ok_m {
        Ok(m)
    } else {
        Err(Error::Mismatch("no basis change relates the two representations".into()))
    }
}

/// Numerical rank of the sampled kernel matrix with rows
/// `(f(k^ℓ n + r))_{n < L}` for `ℓ ≤ ℓ_max`, `r < k^ℓ`.
///
/// An estimate only: finite data cannot certify regularity.
pub fn hankel_degree<T: Scalar>(prefix: &[T], k: usize, l_max: u32) -> Result<usize> {
    let width = (k as u64).pow(l_max) as usize;
    if prefix.len() < width || width == 0 {
        return Err(Error::Precondition(format!("need at least k^ℓ_max = {width} values, got {}", prefix.len())));
    }
    let len = prefix.len() / width;
    let mut rows = Vec::new();
    for l in 0..=l_max {
        let kl = (k as u64).pow(l) as usize;
        for r in 0..kl {
            rows.push((0..len).map(|n| prefix[kl * n + r].clone()).collect::<Vec<T>>());
        }
    }
    Ok(Matrix::from_rows(rows).rank())
}

/// Turns a list of values into a representation-independent sanity check:
/// `f(kn + j) = uᵀ A_{(n)} A_j v`.
pub fn recurrence_holds<T: Scalar>(rep: &LinearRepresentation<T>, n: u64, j: usize) -> bool {
    let k = rep.k() as u64;
    let lhs = rep.evaluate(k * n + j as u64);
    let row = rep.row_after(&base_k_digits(n, rep.k())).expect("digits in range");
    let rhs = dot(&rep.digit_matrix(j).left_mul(&row), rep.v());
    if T::EXACT {
        lhs == rhs
    } else {
        (lhs.to_f64() - rhs.to_f64()).abs() <= 1e-10 * lhs.to_f64().abs().max(1.0)
    }
}

impl<T: Scalar> LinearRepresentation<T> {
    /// Conjugates by `M`: `(Mᵀu, M⁻¹A_iM, M⁻¹v)`.
    pub fn conjugate(&self, m: &Matrix<T>) -> Result<Self> {
        let inv = m.inverse().ok_or_else(|| Error::Precondition("conjugating matrix is singular".into()))?;
        let mats = self.mats.iter().map(|a| &(&inv * a) * m).collect();
        Self::new(m.left_mul(&self.u), mats, inv.right_mul(&self.v))
    }

    /// Block-diagonal sum with another representation of the same base;
    /// represents `f + g`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.k() != other.k() {
            return Err(Error::Precondition("bases differ".into()));
        }
        let (d1, d2) = (self.dim(), other.dim());
        let mats = self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| {
                Matrix::from_fn(d1 + d2, d1 + d2, |r, c| match (r < d1, c < d1) {
                    (true, true) => a[(r, c)].clone(),
                    (false, false) => b[(r - d1, c - d1)].clone(),
                    _ => T::zero(),
                })
            })
            .collect();
        let mut u = self.u.clone();
        u.extend_from_slice(&other.u);
        let mut v = self.v.clone();
        v.extend_from_slice(&other.v);
        Self::new(u, mats, v)
    }

    /// Multiplies every digit matrix by `t`.
    pub fn scale_matrices(&self, t: &T) -> Self {
        let mats: Vec<_> = self.mats.iter().map(|m| m.scale(t)).collect();
        Self::new(self.u.clone(), mats, self.v.clone()).expect("shape preserved")
    }
}

/// `true` when `x` is the identity.
pub fn is_identity<T: Scalar>(m: &Matrix<T>) -> bool {
    m.is_square()
        && (0..m.nrows()).all(|r| (0..m.ncols()).all(|c| m[(r, c)] == if r == c { T::one() } else { T::zero() }))
}
