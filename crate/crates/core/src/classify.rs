//! Spectral type of the limit measures, decided from the growth bounds, the
//! finiteness certificate and, failing those, direct atom accounting.

use serde::Serialize;

use crate::error::Result;
use crate::ghost::{ghost_family, point_mass, simplest_rational_in, IntervalIndex, PointMass};
use crate::graphfin::{scc, support, Finiteness};
use crate::linrep::LinearRepresentation;
use crate::matrix::{Matrix, Span};
use crate::scalar::{format_rational, Scalar};
use crate::semigroup::{bounds_from_limit, BoundsOptions, BoundsReport, Relation};
use crate::spectral::{GroupElement, LimitData, Nondegeneracy};
use crate::subspace::HatFamily;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CommonInvariant {
    /// The generated algebra is all of `M_d`.
    None {
        algebra_dim: usize,
    },
    Found {
        algebra_dim: usize,
        basis: Vec<Vec<f64>>,
    },
    /// The algebra is proper but no real invariant subspace was exhibited.
    AlgebraDeficient {
        algebra_dim: usize,
    },
}

impl CommonInvariant {
    pub fn is_none(&self) -> bool {
        matches!(self, CommonInvariant::None { .. })
    }
}

fn flatten<T: Scalar>(m: &Matrix<T>) -> Vec<T> {
    m.entries().cloned().collect()
}

/// Dimension of the unital algebra generated by `fam`.
pub fn algebra_dimension<T: Scalar>(fam: &[Matrix<T>]) -> usize {
    let d = fam[0].nrows();
    let mut span = Span::<T>::new(d * d);
    let mut queue = vec![Matrix::<T>::identity(d)];
    span.insert(&flatten(&queue[0]));
    while let Some(x) = queue.pop() {
        for a in fam {
            let y = &x * a;
            if span.insert(&flatten(&y)) {
                if span.is_full() {
                    return d * d;
                }
                queue.push(y);
            }
        }
    }
    span.dim()
}

/// Span of `{B x : B in the algebra}` as column vectors.
fn orbit<T: Scalar>(fam: &[Matrix<T>], x: Vec<T>) -> Span<T> {
    let mut span = Span::<T>::new(x.len());
    span.insert(&x);
    let mut queue = vec![x];
    while let Some(y) = queue.pop() {
        for a in fam {
            let z = a.right_mul(&y);
            if span.insert(&z) {
                queue.push(z);
            }
        }
    }
    span
}

fn real_eigenvectors(m: &Matrix<f64>) -> Vec<Vec<f64>> {
    let d = m.nrows();
    let mut out = Vec::new();
    for ev in crate::spectral::eigenvalues(m).iter() {
        if ev.im.abs() > 1e-9 * (1.0 + ev.re.abs()) {
            continue;
        }
        let shifted = m - &Matrix::identity(d).scale(&ev.re);
        let null = crate::matrix::ScalarExt::null_space(&shifted, 1e-7);
        out.extend(null);
    }
    out
}

/// Burnside test: no common invariant subspace iff the algebra is `M_d`.
/// Otherwise tries standard basis vectors and real eigenvectors of the
/// generators (and of the transposed family, via orthogonal complements).
pub fn common_invariant_subspace<T: Scalar>(fam: &[Matrix<T>]) -> CommonInvariant {
    let d = fam[0].nrows();
    let algebra_dim = algebra_dimension(fam);
    if algebra_dim == d * d {
        return CommonInvariant::None { algebra_dim };
    }
    for i in 0..d {
        let mut e = vec![T::zero(); d];
        e[i] = T::one();
        let s = orbit(fam, e);
        if s.dim() < d {
            return CommonInvariant::Found {
                algebra_dim,
                basis: s.basis().iter().map(|b| crate::matrix::vec_to_f64(b)).collect(),
            };
        }
    }
    let f: Vec<Matrix<f64>> = fam.iter().map(Matrix::to_f64).collect();
    let mut generators = f.clone();
    generators.push(crate::matrix::sum_all(&f));
    for g in &generators {
        for x in real_eigenvectors(g) {
            let s = orbit(&f, x);
            if s.dim() < d {
                return CommonInvariant::Found { algebra_dim, basis: s.basis().to_vec() };
            }
        }
    }
    let ft: Vec<Matrix<f64>> = f.iter().map(Matrix::transpose).collect();
    for g in ft.iter().chain(std::iter::once(&crate::matrix::sum_all(&ft))) {
        for x in real_eigenvectors(g) {
            let s = orbit(&ft, x);
            if s.dim() < d {
                let w = Matrix::from_rows(s.basis().to_vec());
                let comp = w.null_space();
                return CommonInvariant::Found { algebra_dim, basis: comp };
            }
        }
    }
    CommonInvariant::AlgebraDeficient { algebra_dim }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Continuity {
    AllContinuous,
    SomeAtom,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralType {
    PurePoint,
    SingularContinuous,
    AbsolutelyContinuous,
    MixedObserved,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Holds,
    Fails,
    Unchecked,
}

impl Check {
    fn from_bool(b: bool) -> Self {
        if b {
            Check::Holds
        } else {
            Check::Fails
        }
    }

    pub fn holds(self) -> bool {
        self == Check::Holds
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Assumptions {
    pub nonnegative_restriction: Check,
    pub no_common_invariant_subspace: Check,
    pub simple_rho: Check,
    pub cone_available: Check,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObservedAtom {
    pub residue: u64,
    pub y: String,
    pub mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralVerdict {
    pub continuity: Continuity,
    #[serde(rename = "type")]
    pub spectral_type: SpectralType,
    /// Which rung of the ladder decided the type.
    pub rule: &'static str,
    pub assumptions: Assumptions,
    pub bounds: BoundsReport,
    pub invariant_subspace: CommonInvariant,
    pub atoms: Vec<ObservedAtom>,
    /// Total observed atomic mass per residue.
    pub atom_totals: Vec<(u64, f64)>,
    pub blocking_margin: Option<f64>,
    /// Hypotheses for spectral purity verified (never used to infer purity).
    pub purity_hypotheses: bool,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub bounds: BoundsOptions,
    pub tau: f64,
    /// Interval level used to look for atoms; chosen from `k` when `None`.
    pub atom_depth: Option<u32>,
    /// Intervals lighter than this are not searched for atoms.
    pub heavy_mass: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { bounds: BoundsOptions::default(), tau: 1e-6, atom_depth: None, heavy_mass: 0.01 }
    }
}

const ATOM_TOTAL_TOL: f64 = 1e-6;
const MAX_CANDIDATES: usize = 16;

fn family_checks<T: Scalar>(fam: &[Matrix<T>]) -> (bool, CommonInvariant, bool) {
    let nonneg = fam.iter().all(|m| m.entries().all(|x| x.to_f64() >= -1e-12 * m.max_abs_f64().max(1.0)));
    let cis = common_invariant_subspace(fam);
    let sum = crate::matrix::sum_all(fam);
    let s = scc(&support(&sum, 1e-12));
    let primitive = s.components.len() == 1 && s.periods[0] == 1;
    (nonneg, cis, primitive)
}

/// Observed atoms, total atomic mass per residue, and whether any point
/// mass stayed undecided.
type AtomAccount = (Vec<ObservedAtom>, Vec<(u64, f64)>, bool);

/// Atom masses found near the heaviest level-`D` intervals, per residue.
fn atom_accounting<T: Scalar>(ld: &LimitData<T>, opts: &ClassifyOptions) -> Result<Option<AtomAccount>> {
    let k = ld.k();
    let depth = opts.atom_depth.unwrap_or_else(|| (1..=10).find(|&d| (k - 1) * k.pow(d) >= 1024).unwrap_or(10));
    let fam = match ghost_family(ld, depth) {
        Ok(f) => f,
        Err(_) => return Ok(None),
    };
    let mut atoms = Vec::new();
    let mut totals = Vec::new();
    let mut undecided = false;
    for table in &fam.tables {
        let mut heavy: Vec<(usize, f64)> =
            table.levels[depth as usize].iter().cloned().enumerate().filter(|(_, m)| *m >= opts.heavy_mass).collect();
        heavy.sort_by(|a, b| b.1.total_cmp(&a.1));
        heavy.truncate(MAX_CANDIDATES);
        let mut candidates = Vec::new();
        for (i, _) in heavy {
            let idx = IntervalIndex { ell: depth, m: k.pow(depth) as u64 + i as u64 };
            let (lo, hi) = idx.bounds(k);
            for y in [simplest_rational_in(&lo, &hi), lo] {
                if !candidates.contains(&y) {
                    candidates.push(y);
                }
            }
        }
        let mut total = 0.0;
        for y in candidates {
            match point_mass(ld, GroupElement(table.residue), &y)? {
                PointMass::Limit { value, .. } if value > ATOM_TOTAL_TOL => {
                    total += value;
                    atoms.push(ObservedAtom { residue: table.residue, y: format_rational(&y), mass: value });
                }
                PointMass::Undecided { .. } => undecided = true,
                _ => {}
            }
        }
        totals.push((table.residue, total));
    }
    Ok(Some((atoms, totals, undecided)))
}

pub fn classify<T: Scalar>(rep: &LinearRepresentation<T>, opts: &ClassifyOptions) -> Result<SpectralVerdict> {
    let ld = LimitData::new(rep)?;
    let bounds = bounds_from_limit(&ld, &opts.bounds)?;
    let (_, hat) = ld.hat()?;
    let (nonneg, cis, primitive) = match &hat {
        HatFamily::Whole(f) => family_checks(f.mats()),
        HatFamily::Projected(f) => family_checks(f.mats()),
    };
    let pd = &ld.pd;
    let simple = pd.peripheral.len() == 1 && pd.peripheral[0].multiplicity == 1 && pd.r == 1;
    let nondeg = ld.nondegeneracy();
    let assumptions = Assumptions {
        nonnegative_restriction: Check::from_bool(nonneg),
        no_common_invariant_subspace: Check::from_bool(cis.is_none()),
        simple_rho: Check::from_bool(simple),
        cone_available: match nondeg {
            Nondegeneracy::Nondegenerate { .. } => Check::Holds,
            Nondegeneracy::Degenerate { .. } => Check::Fails,
            Nondegeneracy::Inconclusive { .. } => Check::Unchecked,
        },
    };
    let tau = opts.tau;
    let rho = bounds.rho;
    let rk = bounds.rho_over_k;
    let all_continuous = bounds.jsr_upper < rho - tau;
    let some_atom = matches!(&bounds.finiteness, Some(Finiteness::Holds { value, .. }) if (value - rho).abs() <= tau * rho.max(1.0));
    let continuity = if all_continuous {
        Continuity::AllContinuous
    } else if some_atom {
        Continuity::SomeAtom
    } else {
        Continuity::Inconclusive
    };
    let cone = assumptions.cone_available.holds();
    let mut verdict = SpectralVerdict {
        continuity,
        spectral_type: SpectralType::Inconclusive,
        rule: "none",
        assumptions,
        invariant_subspace: cis,
        atoms: Vec::new(),
        atom_totals: Vec::new(),
        blocking_margin: None,
        purity_hypotheses: simple && cone,
        notes: Vec::new(),
        bounds,
    };
    let b = &verdict.bounds;
    let irreducible = verdict.assumptions.no_common_invariant_subspace.holds();

    if all_continuous && nonneg && irreducible && cone {
        if b.jsr_lower > rk + tau {
            verdict.spectral_type = SpectralType::SingularContinuous;
            verdict.rule = "c";
            return Ok(verdict);
        }
        let eq = &b.relation_verdicts[1];
        if eq.verdict == Relation::Equal && eq.certified {
            verdict.spectral_type = SpectralType::AbsolutelyContinuous;
            verdict.rule = "c";
            return Ok(verdict);
        }
    }
    if all_continuous && nonneg && cone {
        let lyap = &b.relation_verdicts[0];
        if lyap.verdict == Relation::Strict && lyap.certified {
            verdict.spectral_type = SpectralType::SingularContinuous;
            verdict.rule = "d";
            return Ok(verdict);
        }
    }
    if some_atom && irreducible && primitive && cone {
        verdict.spectral_type = SpectralType::PurePoint;
        verdict.rule = "e";
        return Ok(verdict);
    }
    if nonneg && cone && ld.group().order().is_some() {
        if let Some((atoms, totals, undecided)) = atom_accounting(&ld, opts)? {
            let all_pure = totals.iter().all(|(_, t)| (t - 1.0).abs() <= ATOM_TOTAL_TOL);
            let partial = totals.iter().any(|(_, t)| *t > ATOM_TOTAL_TOL && *t < 1.0 - ATOM_TOTAL_TOL);
            let split =
                totals.iter().any(|(_, t)| *t > ATOM_TOTAL_TOL) && totals.iter().any(|(_, t)| *t <= ATOM_TOTAL_TOL);
            verdict.atoms = atoms;
            verdict.atom_totals = totals;
            if undecided {
                verdict.notes.push("some point-mass sequences did not settle".into());
            }
            if all_pure {
                verdict.spectral_type = SpectralType::PurePoint;
                verdict.rule = "atom_accounting";
                verdict.notes.push("observed atoms carry the full mass of every limit measure".into());
                return Ok(verdict);
            }
            if partial || split {
                verdict.spectral_type = SpectralType::MixedObserved;
                verdict.rule = "atom_accounting";
                verdict.notes.push("empirical: atoms carry only part of the mass".into());
                return Ok(verdict);
            }
        }
    }
    let b = &verdict.bounds;
    verdict.blocking_margin = Some(if all_continuous { b.jsr_lower - rk } else { rho - b.jsr_upper });
    verdict.rule = "f";
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::scalar::Q;

    fn qm(rows: &[&[i64]]) -> Matrix<Q> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| Q::from_i64(x)).collect()).collect())
    }

    #[test]
    fn burnside() {
        assert!(common_invariant_subspace(&corpus::stern_family()).is_none());
        assert!(common_invariant_subspace(corpus::example_a().mats()).is_none());
        let diag = vec![qm(&[&[1, 0], &[0, 2]]), qm(&[&[3, 0], &[0, 4]])];
        match common_invariant_subspace(&diag) {
            CommonInvariant::Found { algebra_dim, basis } => {
                assert_eq!(algebra_dim, 2);
                assert_eq!(basis, vec![vec![1.0, 0.0]]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invariant_line_in_float_mode() {
        // Upper triangular in a rotated basis: the invariant line is (1,1).
        let a = Matrix::from_rows(vec![vec![2.0, 0.0], vec![1.0, 3.0]]);
        let t = Matrix::from_rows(vec![vec![1.0, -1.0], vec![1.0, 1.0]]);
        let ti = t.inverse().unwrap();
        let fam: Vec<Matrix<f64>> = [a.clone(), &a * &a].iter().map(|m| &(&t * m) * &ti).collect();
        match common_invariant_subspace(&fam) {
            CommonInvariant::Found { basis, .. } => assert_eq!(basis.len(), 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ladder() {
        let opts = ClassifyOptions::default();
        let v = classify(&corpus::stern(), &opts).unwrap();
        assert_eq!((v.spectral_type, v.rule), (SpectralType::SingularContinuous, "c"));
        let v = classify(&corpus::trivial(), &opts).unwrap();
        assert_eq!((v.spectral_type, v.rule), (SpectralType::AbsolutelyContinuous, "c"));
        let v = classify(&corpus::point_mass_two_thirds(), &opts).unwrap();
        assert_eq!(v.spectral_type, SpectralType::PurePoint);
        assert_eq!(v.continuity, Continuity::SomeAtom);
        assert_eq!(v.atoms[0].y, "2/3");
        let v = classify(&corpus::mixed_two_cycle(), &opts).unwrap();
        assert_eq!(v.spectral_type, SpectralType::MixedObserved);
    }
}
