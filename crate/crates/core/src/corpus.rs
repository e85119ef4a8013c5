//! Named representations and families used by the examples, the CLI and the
//! test suites.

use crate::linrep::LinearRepresentation;
use crate::matrix::Matrix;
use crate::scalar::{Scalar, Q};

fn q(p: i64) -> Q {
    Q::from_i64(p)
}

fn qv(xs: &[i64]) -> Vec<Q> {
    xs.iter().map(|&x| q(x)).collect()
}

fn qm(rows: &[&[i64]]) -> Matrix<Q> {
    Matrix::from_rows(rows.iter().map(|r| qv(r)).collect())
}

fn rep(u: Vec<Q>, mats: Vec<Matrix<Q>>, v: Vec<Q>) -> LinearRepresentation<Q> {
    LinearRepresentation::new(u, mats, v).expect("corpus entries are well formed")
}

/// Two-cycle example: `u = (1,1)`, `v = e_1`, `A_0 = [[0,2],[1,0]]`,
/// `A_1 = [[0,1],[2,0]]`. Interval masses alternate between two limits.
pub fn example_a() -> LinearRepresentation<Q> {
    rep(qv(&[1, 1]), vec![qm(&[&[0, 2], &[1, 0]]), qm(&[&[0, 1], &[2, 0]])], qv(&[1, 0]))
}

/// The sequence `2, 1, 1, 1, …`: `u = (2,1)`, `v = (1,0)`, `A_0 = I`,
/// `A_1 = [[0,0],[1,1]]`.
pub fn example_b() -> LinearRepresentation<Q> {
    rep(qv(&[2, 1]), vec![qm(&[&[1, 0], &[0, 1]]), qm(&[&[0, 0], &[1, 1]])], qv(&[1, 0]))
}

/// Block sums vanish for even `N`: `u = v = (1,1)`, `A_0 = A_1 = diag(1,−1)`.
pub fn degenerate() -> LinearRepresentation<Q> {
    let d = qm(&[&[1, 0], &[0, -1]]);
    rep(qv(&[1, 1]), vec![d.clone(), d], qv(&[1, 1]))
}

/// The constant sequence in dimension one; its limit measure is Lebesgue.
pub fn trivial() -> LinearRepresentation<Q> {
    rep(qv(&[1]), vec![qm(&[&[1]]), qm(&[&[1]])], qv(&[1]))
}

/// Stern's diatomic sequence via the state `(s(n), s(n+1))`.
pub fn stern() -> LinearRepresentation<Q> {
    rep(qv(&[0, 1]), stern_family(), qv(&[1, 0]))
}

pub fn stern_family() -> Vec<Matrix<Q>> {
    vec![qm(&[&[1, 1], &[0, 1]]), qm(&[&[1, 0], &[1, 1]])]
}

/// Continuant-type representation with `u = vᵀ = (1,0)`.
pub fn zaremba() -> LinearRepresentation<Q> {
    rep(qv(&[1, 0]), zaremba_family(), qv(&[1, 0]))
}

pub fn zaremba_family() -> Vec<Matrix<Q>> {
    vec![qm(&[&[1, 1], &[1, 0]]), qm(&[&[2, 1], &[1, 0]])]
}

/// The normalised form of [`zaremba`]: same matrices, `v` replaced by the
/// Perron direction `(2/5, 1/5)` so that block sums are exactly `4^N`.
pub fn zaremba_reduced() -> LinearRepresentation<Q> {
    rep(qv(&[1, 0]), zaremba_family(), vec![Q::from_ratio(2, 5), Q::from_ratio(1, 5)])
}

/// Path graph `e1 →1 e2 →1 e3 →0 e2`; the limit measure is a unit atom at 2/3.
pub fn point_mass_two_thirds() -> LinearRepresentation<Q> {
    rep(
        qv(&[1, 0, 0]),
        vec![qm(&[&[0, 0, 0], &[0, 0, 0], &[0, 1, 0]]), qm(&[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]])],
        qv(&[1, 1, 1]),
    )
}

/// Four-vertex graph whose two limit measures are Lebesgue and
/// `½(Lebesgue + δ_{1/3})`.
pub fn mixed_two_cycle() -> LinearRepresentation<Q> {
    let h = Q::from_ratio(1, 2);
    let z = q(0);
    let o = q(1);
    let a0 = Matrix::from_rows(vec![
        vec![z.clone(), z.clone(), z.clone(), z.clone()],
        vec![z.clone(), h.clone(), z.clone(), z.clone()],
        vec![z.clone(), z.clone(), z.clone(), o.clone()],
        vec![z.clone(), z.clone(), z.clone(), z.clone()],
    ]);
    let a1 = Matrix::from_rows(vec![
        vec![z.clone(), o.clone(), o.clone(), z.clone()],
        vec![z.clone(), h, z.clone(), z.clone()],
        vec![z.clone(), z.clone(), z.clone(), z.clone()],
        vec![z.clone(), z.clone(), o, z],
    ]);
    rep(qv(&[1, 0, 0, 0]), vec![a0, a1], qv(&[1, 1, 1, 0]))
}

/// `A_0 = [[1,1,0],[0,0,1],[0,0,0]]`, `A_1 = diag(1,ρ,ρ)`: maximal growth is
/// attained along aperiodic digit sequences as well as periodic ones.
pub fn aperiodic_family(rho: i64) -> Vec<Matrix<Q>> {
    vec![qm(&[&[1, 1, 0], &[0, 0, 1], &[0, 0, 0]]), qm(&[&[1, 0, 0], &[0, rho, 0], &[0, 0, rho]])]
}

pub fn aperiodic(rho: i64) -> LinearRepresentation<Q> {
    rep(qv(&[1, 0, 0]), aperiodic_family(rho), qv(&[1, 1, 1]))
}

/// Base-3 indicator of digit strings avoiding `1` (Cantor measure).
pub fn cantor() -> LinearRepresentation<Q> {
    rep(qv(&[1]), vec![qm(&[&[1]]), qm(&[&[0]]), qm(&[&[1]])], qv(&[1]))
}

/// `f(n) = 2^{s_2(n)}`, the number of odd entries in row `n` of Pascal's
/// triangle.
pub fn gould() -> LinearRepresentation<Q> {
    rep(qv(&[1]), vec![qm(&[&[1]]), qm(&[&[2]])], qv(&[1]))
}

/// A base-3 two-dimensional example with a strictly positive sum matrix.
pub fn ternary_pair() -> LinearRepresentation<Q> {
    rep(qv(&[1, 1]), vec![qm(&[&[1, 0], &[1, 1]]), qm(&[&[0, 1], &[1, 0]]), qm(&[&[1, 1], &[0, 1]])], qv(&[1, 2]))
}

/// Rotation example with irrational angle `alpha` (in turns):
/// `A_0 = diag(2R_α, diag(1,2))`, `A_1 = diag(R_α, diag(2,1))`,
/// `u = (1,0,1,1)`, `v = (1,0,c_1,c_2)`.
pub fn rotation(alpha: f64, c1: f64, c2: f64) -> LinearRepresentation<f64> {
    let (s, c) = (2.0 * std::f64::consts::PI * alpha).sin_cos();
    let block = |t: f64, a: f64, b: f64| {
        Matrix::from_rows(vec![
            vec![t * c, -t * s, 0.0, 0.0],
            vec![t * s, t * c, 0.0, 0.0],
            vec![0.0, 0.0, a, 0.0],
            vec![0.0, 0.0, 0.0, b],
        ])
    };
    LinearRepresentation::new(
        vec![1.0, 0.0, 1.0, 1.0],
        vec![block(2.0, 1.0, 2.0), block(1.0, 2.0, 1.0)],
        vec![1.0, 0.0, c1, c2],
    )
    .expect("well formed")
}

/// All exact corpus entries with a short name.
pub fn named() -> Vec<(&'static str, LinearRepresentation<Q>)> {
    vec![
        ("example_a", example_a()),
        ("example_b", example_b()),
        ("degenerate", degenerate()),
        ("trivial", trivial()),
        ("stern", stern()),
        ("zaremba", zaremba()),
        ("zaremba_reduced", zaremba_reduced()),
        ("point_mass_two_thirds", point_mass_two_thirds()),
        ("mixed_two_cycle", mixed_two_cycle()),
        ("aperiodic", aperiodic(3)),
        ("cantor", cantor()),
        ("gould", gould()),
        ("ternary_pair", ternary_pair()),
    ]
}

pub fn by_name(name: &str) -> Option<LinearRepresentation<Q>> {
    named().into_iter().find(|(n, _)| *n == name).map(|(_, r)| r)
}
