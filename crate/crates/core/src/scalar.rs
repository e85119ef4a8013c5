//! Field abstraction shared by the exact and floating-point backends.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rationals used throughout the crate.
pub type Q = BigRational;

/// Relative tolerance used by float eliminations when no other is supplied.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// The numeric operations needed by the linear-algebra layer.
///
/// Implemented for [`Q`] (exact) and `f64` (binary64). Generic code never
/// compares to zero directly; it goes through [`Scalar::is_negligible`] so
/// that the exact backend stays exact and the float backend uses a scale.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Signed
    + Send
    + Sync
    + 'static
    + crate::matrix::ScalarExt
{
    const EXACT: bool;

    fn from_i64(n: i64) -> Self;
    fn from_ratio(p: i64, q: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// The exact value, when the backend is exact.
    fn to_rational(&self) -> Option<Q>;
    fn from_rational(x: &Q) -> Self;

    /// True when `self` should be treated as zero relative to `scale`.
    fn is_negligible(&self, scale: f64, tol: f64) -> bool;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        p as f64 / q as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> Option<Q> {
        None
    }
    fn from_rational(x: &Q) -> Self {
        ratio_to_f64(x)
    }
    fn is_negligible(&self, scale: f64, tol: f64) -> bool {
        self.abs() <= tol * scale.max(f64::MIN_POSITIVE)
    }
}

impl Scalar for Q {
    const EXACT: bool = true;

    fn from_i64(n: i64) -> Self {
        Q::from_integer(BigInt::from(n))
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        Q::new(BigInt::from(p), BigInt::from(q))
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn to_rational(&self) -> Option<Q> {
        Some(self.clone())
    }
    fn from_rational(x: &Q) -> Self {
        x.clone()
    }
    fn is_negligible(&self, _scale: f64, _tol: f64) -> bool {
        self.is_zero()
    }
}

/// Converts a big rational to the nearest-ish binary64 without overflowing
/// on huge numerators and denominators.
pub fn ratio_to_f64(x: &Q) -> f64 {
    if let Some(f) = ToPrimitive::to_f64(x) {
        if f.is_finite() {
            return f;
        }
    }
    let (n, d) = (x.numer(), x.denom());
    let shift = n.bits() as i64 - d.bits() as i64;
    let scaled = if shift >= 0 {
        Q::new(n.clone(), d.clone() << (shift as u64))
    } else {
        Q::new(n.clone() << ((-shift) as u64), d.clone())
    };
    ToPrimitive::to_f64(&scaled).unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

/// `ln|x|`, finite even when `|x|` lies outside the binary64 range.
pub fn ln_abs<T: Scalar>(x: &T) -> f64 {
    let Some(r) = x.to_rational() else {
        return x.to_f64().abs().ln();
    };
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (n, d) = (r.numer().abs(), r.denom().clone());
    let shift = n.bits() as i64 - d.bits() as i64;
    let scaled = if shift >= 0 { Q::new(n, d << (shift as u64)) } else { Q::new(n << ((-shift) as u64), d) };
    ToPrimitive::to_f64(&scaled).unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"-0.125"` exactly.
pub fn parse_rational(text: &str) -> Option<Q> {
    let s = text.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).ok()?;
        let q = BigInt::from_str(q.trim()).ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Q::new(p, q));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Option<Q> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = Q::from_integer(BigInt::from_str(if all.is_empty() { "0" } else { &all }).ok()?);
    let scale = exp - frac_part.len() as i32;
    let ten = Q::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(if neg { -value } else { value })
}

/// Renders a rational as `"p"` or `"p/q"`.
pub fn format_rational(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Exact `n`-th root of a nonnegative rational when it is itself rational.
pub fn rational_root(x: &Q, n: u32) -> Option<Q> {
    if x.is_negative() || n == 0 {
        return None;
    }
    let rn = x.numer().nth_root(n);
    let rd = x.denom().nth_root(n);
    if num_traits::pow(rn.clone(), n as usize) == *x.numer() && num_traits::pow(rd.clone(), n as usize) == *x.denom() {
        Some(Q::new(rn, rd))
    } else {
        None
    }
}
