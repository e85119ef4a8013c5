use kregular::ghost::{
    approximant, cdf_grid, check_reduced, convolution_approximant, interval_mass, level_masses, mass_table, point_mass,
    IntervalIndex,
};
use kregular::graphfin::{build_graph, classify_dominant, construct_delta, finiteness_check, DEFAULT_BUDGET};
use kregular::io::{parse_representation, to_json, AnyRep, NumericMode};
use kregular::linrep::recurrence_holds;
use kregular::semigroup::jsr_bounds;
use kregular::spectral::{GroupElement, LimitData};
use kregular::{LinearRepresentation, Matrix, Scalar, Q};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn matrix(d: usize, lo: i64, hi: i64) -> impl Strategy<Value = Matrix<Q>> {
    prop::collection::vec(lo..=hi, d * d).prop_map(move |xs| Matrix::from_fn(d, d, |r, c| Q::from_i64(xs[r * d + c])))
}

fn vector(d: usize, lo: i64, hi: i64) -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec((lo..=hi).prop_map(Q::from_i64), d)
}

/// Representations with entries in `lo..=hi`.
fn rep(
    ks: std::ops::RangeInclusive<usize>,
    ds: std::ops::RangeInclusive<usize>,
    lo: i64,
    hi: i64,
) -> impl Strategy<Value = LinearRepresentation<Q>> {
    (ks, ds).prop_flat_map(move |(k, d)| {
        (vector(d, lo, hi), prop::collection::vec(matrix(d, lo, hi), k), vector(d, lo, hi))
            .prop_map(|(u, mats, v)| LinearRepresentation::new(u, mats, v).unwrap())
    })
}

/// Strictly positive families, so every block sum is positive.
fn positive_rep() -> impl Strategy<Value = LinearRepresentation<Q>> {
    rep(2..=3, 1..=3, 1, 4)
}

fn family(k: usize, d: usize) -> impl Strategy<Value = Vec<Matrix<Q>>> {
    prop::collection::vec(matrix(d, 0, 2), k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refinement_is_exact(rep in positive_rep(), n in 1u32..6) {
        let k = rep.k();
        for ell in 0..n {
            let coarse = level_masses(&rep, n, ell).unwrap();
            let fine = level_masses(&rep, n, ell + 1).unwrap();
            for (i, c) in coarse.iter().enumerate() {
                let sum = fine[i * k..(i + 1) * k].iter().fold(Q::zero(), |a, x| a + x);
                prop_assert_eq!(&sum, c);
            }
        }
        let top: Q = level_masses(&rep, n, 0).unwrap().into_iter().fold(Q::zero(), |a, x| a + x);
        prop_assert_eq!(top, Q::from_i64(1));
    }

    #[test]
    fn interval_mass_is_atom_sum(rep in rep(2..=3, 1..=3, -2, 3), n in 0u32..6, pick in any::<prop::sample::Index>()) {
        let Ok(mu) = approximant(&rep, n) else {
            prop_assume!(false);
            unreachable!()
        };
        let ell = (pick.index(n as usize + 1)) as u32;
        for idx in IntervalIndex::level(ell, rep.k()) {
            prop_assert_eq!(interval_mass(&rep, n, idx).unwrap(), mu.interval_sum(idx));
        }
    }

    #[test]
    fn recurrence(rep in rep(2..=4, 1..=3, -3, 3), n in 0u64..500, j in 0usize..4) {
        prop_assume!(j < rep.k() && (n, j) != (0, 0));
        prop_assert!(recurrence_holds(&rep, n, j));
    }

    #[test]
    fn json_round_trip(rep in rep(2..=4, 1..=4, -50, 50), den in 1i64..9) {
        let scaled = rep.scale_matrices(&Q::from_ratio(1, den));
        let back = parse_representation(&to_json(&scaled), NumericMode::Auto).unwrap();
        prop_assert_eq!(back, AnyRep::Exact(scaled));
    }

    #[test]
    fn jsr_scales_and_is_monotone(fam in (2usize..=3, 1usize..=3).prop_flat_map(|(k, d)| family(k, d)), extra in matrix(3, 0, 2)) {
        let b = jsr_bounds(&fam, 4, DEFAULT_BUDGET).unwrap();
        prop_assert!(b.lower <= b.upper * (1.0 + 1e-12));
        let doubled: Vec<Matrix<Q>> = fam.iter().map(|m| m.scale(&Q::from_i64(2))).collect();
        let b2 = jsr_bounds(&doubled, 4, DEFAULT_BUDGET).unwrap();
        prop_assert!((b2.lower - 2.0 * b.lower).abs() <= 1e-9 * b.lower.max(1.0));
        prop_assert!((b2.upper - 2.0 * b.upper).abs() <= 1e-9 * b.upper.max(1.0));
        let d = fam[0].nrows();
        let mut bigger = fam.clone();
        bigger.push(Matrix::from_fn(d, d, |r, c| extra[(r, c)].clone()));
        let b3 = jsr_bounds(&bigger, 4, DEFAULT_BUDGET).unwrap();
        prop_assert!(b3.lower >= b.lower * (1.0 - 1e-12));
    }

    #[test]
    fn graph_paths_match_products(fam in (2usize..=3, 1usize..=4).prop_flat_map(|(k, d)| family(k, d)), word in prop::collection::vec(0usize..3, 1..5)) {
        let k = fam.len();
        let d = fam[0].nrows();
        let word: Vec<usize> = word.into_iter().map(|j| j % k).collect();
        let g = build_graph(&fam, 0.0).unwrap();
        for e in &g.edges {
            prop_assert!(!fam[e.label][(e.src, e.dst)].is_zero());
        }
        let edges = fam.iter().flat_map(|m| m.entries()).filter(|x| !x.is_zero()).count();
        prop_assert_eq!(g.edges.len(), edges);
        // Labeled paths spelling `word`, counted with multiplicity, equal the entries of A_w.
        let prod = word.iter().fold(Matrix::<Q>::identity(d), |p, &j| &p * &fam[j]);
        for a in 0..d {
            let mut count = vec![Q::zero(); d];
            count[a] = Q::from_i64(1);
            for &j in &word {
                let mut next = vec![Q::zero(); d];
                for e in g.edges.iter().filter(|e| e.label == j) {
                    next[e.dst] = next[e.dst].clone() + count[e.src].clone() * fam[j][(e.src, e.dst)].clone();
                }
                count = next;
            }
            for b in 0..d {
                prop_assert_eq!(&count[b], &prod[(a, b)]);
            }
        }
    }

    #[test]
    fn mixed_constants_are_below_one(fam in (2usize..=3, 1usize..=3).prop_flat_map(|(k, d)| family(k, d))) {
        prop_assume!(fam.iter().any(|a| !a.is_zero_matrix()));
        let Ok(report) = finiteness_check(&fam, DEFAULT_BUDGET) else {
            prop_assume!(false);
            unreachable!()
        };
        let blocks = classify_dominant(&fam, report.m, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(blocks.mixed.len(), report.mixed.len());
        for (_, c) in &blocks.mixed {
            prop_assert!(*c < Q::from_i64(1) && !c.is_negative());
        }
    }

    #[test]
    fn convolution_matches_brute_force(ws in prop::collection::vec(0i64..5, 2..=4), n in 0u32..5) {
        let tail: i64 = ws[1..].iter().sum();
        prop_assume!(tail > 0);
        let mats = ws.iter().map(|&w| Matrix::from_rows(vec![vec![Q::from_ratio(w, tail)]])).collect();
        let rep = LinearRepresentation::new(vec![Q::from_i64(1)], mats, vec![Q::from_i64(1)]).unwrap();
        prop_assume!(check_reduced(&rep).is_ok());
        let brute = approximant(&rep, n).unwrap();
        let conv = convolution_approximant(&rep, n).unwrap();
        prop_assert_eq!(brute.masses(), conv.masses());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn delta_round_trip(den in 1i64..=24, num in 0i64..=24, k in 2usize..=4) {
        let y = Q::from_ratio(num.min(den), den);
        let rep = construct_delta(&y, k).unwrap();
        let ld = LimitData::new(&rep).unwrap();
        let mass = point_mass(&ld, GroupElement(0), &y).unwrap().value().unwrap();
        prop_assert!((mass - 1.0).abs() < 1e-9, "mass {} at {}", mass, y);
    }

    #[test]
    fn cdf_is_monotone(rep in positive_rep(), depth in 1u32..5) {
        let ld = LimitData::new(&rep).unwrap();
        let table = mass_table(&ld, GroupElement(0), depth).unwrap();
        let grid = cdf_grid(&table, rep.k());
        for w in grid.windows(2) {
            prop_assert!(w[0].0 < w[1].0);
            prop_assert!(w[1].1 >= w[0].1 - 1e-12);
        }
        prop_assert!((grid.last().unwrap().1 - 1.0).abs() < 1e-9);
    }
}
