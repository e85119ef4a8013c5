//! Exact representations with denominators cleared, so that block walks
//! run on integers and divide once per atom.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::linrep::LinearRepresentation;
use crate::scalar::{Scalar, Q};

/// `u = u'/su`, `A_i = A'_i/sa`, `v = v'/sv` with integer `u'`, `A'_i`, `v'`.
pub(crate) struct IntegerForm {
    u: Vec<BigInt>,
    /// Row-major digit matrices.
    mats: Vec<Vec<Vec<BigInt>>>,
    v: Vec<BigInt>,
    su: BigInt,
    sa: BigInt,
    sv: BigInt,
}

fn common_denominator<'a>(xs: impl Iterator<Item = &'a Q>) -> BigInt {
    xs.fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

fn scaled(xs: &[Q], s: &BigInt) -> Vec<BigInt> {
    xs.iter().map(|x| x.numer() * (s / x.denom())).collect()
}

impl IntegerForm {
    /// `None` for the float backend.
    pub(crate) fn of<T: Scalar>(rep: &LinearRepresentation<T>) -> Option<Self> {
        if !T::EXACT {
            return None;
        }
        let conv = |xs: &[T]| xs.iter().map(|x| x.to_rational()).collect::<Option<Vec<Q>>>();
        let u = conv(rep.u())?;
        let v = conv(rep.v())?;
        let mats: Vec<Vec<Vec<Q>>> = rep
            .mats()
            .iter()
            .map(|m| m.to_rows().iter().map(|r| conv(r)).collect::<Option<Vec<_>>>())
            .collect::<Option<_>>()?;
        let su = common_denominator(u.iter());
        let sv = common_denominator(v.iter());
        let sa = common_denominator(mats.iter().flatten().flatten());
        Some(IntegerForm {
            u: scaled(&u, &su),
            v: scaled(&v, &sv),
            mats: mats.iter().map(|m| m.iter().map(|r| scaled(r, &sa)).collect()).collect(),
            su,
            sa,
            sv,
        })
    }

    pub(crate) fn k(&self) -> usize {
        self.mats.len()
    }

    /// `rowᵀ A'_j`.
    pub(crate) fn left_mul(&self, j: usize, row: &[BigInt]) -> Vec<BigInt> {
        let m = &self.mats[j];
        let mut out = vec![BigInt::zero(); row.len()];
        for (x, mrow) in row.iter().zip(m) {
            if x.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(mrow) {
                if !a.is_zero() {
                    *o += x * a;
                }
            }
        }
        out
    }

    /// `u'ᵀA'_j` for each leading digit `j ≥ 1`.
    pub(crate) fn lead_rows(&self) -> Vec<Vec<BigInt>> {
        (1..self.k()).map(|j| self.left_mul(j, &self.u)).collect()
    }

    /// Visits `rowᵀA'_w` for every word of length `remaining`, in
    /// lexicographic order.
    pub(crate) fn walk(&self, row: Vec<BigInt>, remaining: u32, visit: &mut impl FnMut(&[BigInt])) {
        if remaining == 0 {
            visit(&row);
            return;
        }
        for j in 0..self.k() {
            self.walk(self.left_mul(j, &row), remaining - 1, visit);
        }
    }

    /// `(Σ_i A'_i)^e v'`.
    pub(crate) fn sum_pow_v(&self, e: u32) -> Vec<BigInt> {
        let d = self.v.len();
        let mut x = self.v.clone();
        for _ in 0..e {
            x = (0..d).map(|r| self.mats.iter().map(|m| dot(&m[r], &x)).sum()).collect();
        }
        x
    }

    pub(crate) fn v(&self) -> &[BigInt] {
        &self.v
    }

    /// Factor relating `uᵀA_w v` to `u'ᵀA'_w v'` for words of length `len`.
    pub(crate) fn scale(&self, len: u32) -> BigInt {
        &self.su * num_traits::pow(self.sa.clone(), len as usize) * &self.sv
    }
}

pub(crate) fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn integer_walk_matches_evaluate() {
        for (name, rep) in corpus::named() {
            let f = IntegerForm::of(&rep).unwrap();
            let n = if rep.k() == 2 { 5 } else { 3 };
            let scale = f.scale(n + 1);
            let mut vals = Vec::new();
            for row in f.lead_rows() {
                f.walk(row, n, &mut |r| vals.push(Q::new(dot(r, f.v()), scale.clone())));
            }
            let base = (rep.k() as u64).pow(n);
            for (i, x) in vals.iter().enumerate() {
                assert_eq!(*x, rep.evaluate(base + i as u64), "{name} m = {}", base + i as u64);
            }
        }
    }

    #[test]
    fn fractional_entries_are_cleared() {
        let rep = corpus::mixed_two_cycle();
        let f = IntegerForm::of(&rep).unwrap();
        assert_eq!(f.sa, BigInt::from(2));
        assert!(IntegerForm::of(&rep.to_f64()).is_none());
    }
}
