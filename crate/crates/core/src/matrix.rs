//! Small dense matrices over a [`Scalar`], plus spans and eliminations.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_traits::{One, Zero};

use crate::scalar::{Scalar, DEFAULT_RANK_TOL, Q};

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for r in 0..self.rows {
            list.entry(&&self.data[r * self.cols..(r + 1) * self.cols]);
        }
        list.finish()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn diag(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.clone() * s.clone()).collect() }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(T::to_f64)
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (r, xr) in x.iter().enumerate() {
            if xr.is_zero() {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                let a = &self.data[r * self.cols + c];
                if !a.is_zero() {
                    *o = o.clone() + xr.clone() * a.clone();
                }
            }
        }
        out
    }

    /// Matrix times column vector.
    pub fn right_mul(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    pub fn pow(&self, mut e: u64) -> Self {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|x| !x.is_negative())
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Maximum absolute column sum (the operator norm induced by ‖·‖₁).
    pub fn max_col_sum(&self) -> T {
        (0..self.cols).map(|c| (0..self.rows).fold(T::zero(), |s, r| s + self[(r, c)].abs())).fold(T::zero(), |a, b| {
            if b > a {
                b
            } else {
                a
            }
        })
    }

    pub fn max_abs_f64(&self) -> f64 {
        self.data.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Submatrix on the given row and column index sets.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |r, c| self[(rows[r], cols[c])].clone())
    }

    /// Inverse by Gauss–Jordan; `None` when singular (exactly, or below the
    /// float tolerance).
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let scale = self.max_abs_f64();
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = pick_pivot(&a, col, col, scale)?;
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let p = a[(col, col)].clone();
            for c in 0..n {
                a[(col, c)] = a[(col, c)].clone() / p.clone();
                inv[(col, c)] = inv[(col, c)].clone() / p.clone();
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for c in 0..n {
                    let t = a[(col, c)].clone();
                    a[(r, c)] = a[(r, c)].clone() - f.clone() * t;
                    let t = inv[(col, c)].clone();
                    inv[(r, c)] = inv[(r, c)].clone() - f.clone() * t;
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)].clone()
            } else {
                other[(r, c - self.cols)].clone()
            }
        })
    }

    /// Vertical concatenation.
    pub fn vcat(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Kernel basis of `x ↦ self·x` (column vectors), exact for rationals and
    /// by SVD for floats.
    pub fn null_space(&self) -> Vec<Vec<T>> {
        T::null_space(self, DEFAULT_RANK_TOL)
    }

    pub fn rank(&self) -> usize {
        T::rank(self, DEFAULT_RANK_TOL)
    }
}

fn pick_pivot<T: Scalar>(a: &Matrix<T>, col: usize, from: usize, scale: f64) -> Option<usize> {
    if T::EXACT {
        (from..a.rows).find(|&r| !a[(r, col)].is_zero())
    } else {
        let (best, val) = (from..a.rows).map(|r| (r, a[(r, col)].to_f64().abs())).fold((from, -1.0), |acc, x| {
            if x.1 > acc.1 {
                x
            } else {
                acc
            }
        });
        if val <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            None
        } else {
            Some(best)
        }
    }
}

impl<'a, T: Scalar> Mul<&'a Matrix<T>> for &'a Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &'a Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = Matrix::<T>::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[r * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = &rhs.data[k * rhs.cols + c];
                    if !b.is_zero() {
                        let idx = r * rhs.cols + c;
                        out.data[idx] = out.data[idx].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }
}

impl<'a, T: Scalar> Add<&'a Matrix<T>> for &'a Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &'a Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }
}

impl<'a, T: Scalar> Sub<&'a Matrix<T>> for &'a Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &'a Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| if x.is_zero() || y.is_zero() { s } else { s + x.clone() * y.clone() })
}

pub fn axpy<T: Scalar>(y: &mut [T], a: &T, x: &[T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        if !xi.is_zero() {
            *yi = yi.clone() + a.clone() * xi.clone();
        }
    }
}

pub fn scale_vec<T: Scalar>(x: &[T], s: &T) -> Vec<T> {
    x.iter().map(|e| e.clone() * s.clone()).collect()
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|e| e * e).sum::<f64>().sqrt()
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, e| m.max(e.abs()))
}

pub fn vec_to_f64<T: Scalar>(x: &[T]) -> Vec<f64> {
    x.iter().map(T::to_f64).collect()
}

/// Sum of a nonempty list of equally sized matrices.
pub fn sum_all<T: Scalar>(mats: &[Matrix<T>]) -> Matrix<T> {
    let mut it = mats.iter();
    let first = it.next().expect("empty matrix list").clone();
    it.fold(first, |acc, m| &acc + m)
}

pub fn to_nalgebra(m: &Matrix<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows, m.cols, &m.data)
}

pub fn from_nalgebra(m: &DMatrix<f64>) -> Matrix<f64> {
    Matrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// A growing linear span of row vectors.
///
/// Exact mode keeps a fully reduced echelon basis (each basis vector has a 1
/// at its pivot and the other vectors vanish there); float mode keeps an
/// orthonormal basis built by Gram–Schmidt with a second orthogonalisation
/// pass.
#[derive(Clone, Debug)]
pub struct Span<T> {
    ambient: usize,
    vectors: Vec<Vec<T>>,
    pivots: Vec<usize>,
    tol: f64,
    scale: f64,
}

impl<T: Scalar> Span<T> {
    pub fn new(ambient: usize) -> Self {
        Self::with_tolerance(ambient, DEFAULT_RANK_TOL)
    }

    pub fn with_tolerance(ambient: usize, tol: f64) -> Self {
        Span { ambient, vectors: Vec::new(), pivots: Vec::new(), tol, scale: 0.0 }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn basis(&self) -> &[Vec<T>] {
        &self.vectors
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// Adds `x` to the span; returns whether the dimension grew.
    pub fn insert(&mut self, x: &[T]) -> bool {
        assert_eq!(x.len(), self.ambient);
        if self.is_full() {
            return false;
        }
        if T::EXACT {
            self.insert_exact(x)
        } else {
            self.insert_float(x)
        }
    }

    fn insert_exact(&mut self, x: &[T]) -> bool {
        let mut r = x.to_vec();
        for (b, &p) in self.vectors.iter().zip(&self.pivots) {
            if !r[p].is_zero() {
                let f = -r[p].clone();
                axpy(&mut r, &f, b);
            }
        }
        let Some(p) = r.iter().position(|e| !e.is_zero()) else {
            return false;
        };
        let inv = T::one() / r[p].clone();
        let r = scale_vec(&r, &inv);
        for b in &mut self.vectors {
            if !b[p].is_zero() {
                let f = -b[p].clone();
                axpy(b, &f, &r);
            }
        }
        self.vectors.push(r);
        self.pivots.push(p);
        true
    }

    fn insert_float(&mut self, x: &[T]) -> bool {
        let xf = vec_to_f64(x);
        let n0 = norm2(&xf);
        self.scale = self.scale.max(n0);
        if n0 == 0.0 {
            return false;
        }
        let mut r = xf;
        for _ in 0..2 {
            for b in &self.vectors {
                let bf = vec_to_f64(b);
                let c = dot(&r, &bf);
                axpy(&mut r, &-c, &bf);
            }
        }
        let nr = norm2(&r);
        if nr <= self.tol * self.scale {
            return false;
        }
        let q: Vec<T> = r.iter().map(|e| from_f64::<T>(e / nr)).collect();
        self.vectors.push(q);
        true
    }

    /// Coordinates `c` with `Σ c_j b_j = x`, or the residual size when `x`
    /// is not in the span.
    pub fn coords(&self, x: &[T]) -> Result<Vec<T>, f64> {
        assert_eq!(x.len(), self.ambient);
        let c: Vec<T> = if T::EXACT {
            self.pivots.iter().map(|&p| x[p].clone()).collect()
        } else {
            self.vectors.iter().map(|b| dot(b, x)).collect()
        };
        let mut r = x.to_vec();
        for (cj, b) in c.iter().zip(&self.vectors) {
            axpy(&mut r, &-cj.clone(), b);
        }
        let res = max_abs(&vec_to_f64(&r));
        let scale = max_abs(&vec_to_f64(x)).max(self.scale).max(1.0);
        let ok = if T::EXACT { r.iter().all(Zero::is_zero) } else { res <= 1e3 * self.tol * scale };
        if ok {
            Ok(c)
        } else {
            Err(res)
        }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.coords(x).is_ok()
    }

    /// Basis as a `dim × ambient` matrix (rows are basis vectors).
    pub fn basis_matrix(&self) -> Matrix<T> {
        Matrix::from_rows(if self.vectors.is_empty() { vec![] } else { self.vectors.clone() })
            .reshape_empty(self.ambient)
    }
}

impl<T: Scalar> Matrix<T> {
    fn reshape_empty(mut self, cols: usize) -> Self {
        if self.rows == 0 {
            self.cols = cols;
        }
        self
    }
}

/// Converts an `f64` into the target scalar type. Only used on the float
/// path; the exact path never reaches it with non-representable values.
pub fn from_f64<T: Scalar>(x: f64) -> T {
    T::from_f64_lossy(x)
}

/// Extra conversions that only make sense per backend.
pub trait ScalarExt: Sized {
    fn from_f64_lossy(x: f64) -> Self;
    fn null_space(m: &Matrix<Self>, tol: f64) -> Vec<Vec<Self>>;
    fn rank(m: &Matrix<Self>, tol: f64) -> usize;
}

impl ScalarExt for f64 {
    fn from_f64_lossy(x: f64) -> Self {
        x
    }

    fn null_space(m: &Matrix<f64>, tol: f64) -> Vec<Vec<f64>> {
        let (r, c) = (m.nrows(), m.ncols());
        if c == 0 {
            return vec![];
        }
        // Pad to at least square so the SVD exposes the whole right basis.
        let padded = if r < c { m.vcat(&Matrix::zeros(c - r, c)) } else { m.clone() };
        let svd = to_nalgebra(&padded).svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let mut out = Vec::new();
        for (i, s) in svd.singular_values.iter().enumerate() {
            if *s <= tol * smax.max(f64::MIN_POSITIVE) || smax == 0.0 {
                out.push((0..c).map(|j| vt[(i, j)]).collect());
            }
        }
        out
    }

    fn rank(m: &Matrix<f64>, tol: f64) -> usize {
        if m.nrows() == 0 || m.ncols() == 0 {
            return 0;
        }
        let sv = to_nalgebra(m).singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        if smax == 0.0 {
            return 0;
        }
        sv.iter().filter(|s| **s > tol * smax).count()
    }
}

impl ScalarExt for Q {
    fn from_f64_lossy(x: f64) -> Self {
        Q::from_float(x).expect("finite float")
    }

    fn null_space(m: &Matrix<Q>, _tol: f64) -> Vec<Vec<Q>> {
        let (r, c) = (m.nrows(), m.ncols());
        let mut a = m.clone();
        let mut pivot_cols = Vec::new();
        let mut row = 0;
        for col in 0..c {
            let Some(p) = (row..r).find(|&i| !a[(i, col)].is_zero()) else { continue };
            a.swap_rows(row, p);
            let inv = Q::one() / a[(row, col)].clone();
            for j in 0..c {
                a[(row, j)] = a[(row, j)].clone() * inv.clone();
            }
            for i in 0..r {
                if i != row && !a[(i, col)].is_zero() {
                    let f = a[(i, col)].clone();
                    for j in 0..c {
                        let t = a[(row, j)].clone();
                        a[(i, j)] = a[(i, j)].clone() - f.clone() * t;
                    }
                }
            }
            pivot_cols.push(col);
            row += 1;
            if row == r {
                break;
            }
        }
        let free: Vec<usize> = (0..c).filter(|j| !pivot_cols.contains(j)).collect();
        free.iter()
            .map(|&fcol| {
                let mut x = vec![Q::zero(); c];
                x[fcol] = Q::one();
                for (i, &pc) in pivot_cols.iter().enumerate() {
                    x[pc] = -a[(i, fcol)].clone();
                }
                x
            })
            .collect()
    }

    fn rank(m: &Matrix<Q>, tol: f64) -> usize {
        m.ncols() - Self::null_space(m, tol).len()
    }
}

/// Rank of a set of equally long row vectors.
pub fn rank_of_rows<T: Scalar>(rows: &[Vec<T>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    Matrix::from_rows(rows.to_vec()).rank()
}
