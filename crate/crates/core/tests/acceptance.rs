//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use kregular::classify::{classify, ClassifyOptions, SpectralType};
use kregular::corpus;
use kregular::ghost::{
    approximant, fourier_coefficient, ghost_family, interval_mass, level_masses, point_mass, IntervalIndex,
};
use kregular::graphfin::{aperiodic_liminf_demo, construct_delta, finiteness_check, Finiteness, DEFAULT_BUDGET};
use kregular::semigroup::{fundamental_inequality, jsr_bounds, BoundsOptions, Relation};
use kregular::spectral::{GroupElement, LimitData, Nondegeneracy};
use kregular::{LinearRepresentation, Matrix, Scalar, Q};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn ok(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

type Check = fn() -> Result<Outcome, String>;

fn q(p: i64, d: i64) -> Q {
    Q::from_ratio(p, d)
}

fn qm(rows: &[&[i64]]) -> Matrix<Q> {
    Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| Q::from_i64(x)).collect()).collect())
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn two_cycle() -> Result<Outcome, String> {
    let rep = corpus::example_a();
    let left = IntervalIndex::new(1, 2, 2).map_err(e)?;
    let right = IntervalIndex::new(1, 3, 2).map_err(e)?;
    for n in 2..=10u32 {
        let ratio = interval_mass(&rep, n, left).map_err(e)? / interval_mass(&rep, n, right).map_err(e)?;
        let want = if n % 2 == 0 { q(2, 1) } else { q(1, 2) };
        if ratio != want {
            return Ok(ok(false, format!("n = {n}: ratio {ratio}, expected {want}")));
        }
    }
    let ld = LimitData::new(&rep).map_err(e)?;
    let fam = ghost_family(&ld, 3).map_err(e)?;
    let distinct = fam.tables.len() == 2 && (fam.tables[0].levels[1][0] - fam.tables[1].levels[1][0]).abs() > 0.1;
    let dev10 = fam.deviation_from(&rep, 10).map_err(e)?;
    let dev11 = fam.deviation_from(&rep, 11).map_err(e)?;
    Ok(ok(
        distinct && dev10 < 1e-6 && dev11 < 1e-6,
        format!("ratios exact for n=2..10; {} tables; deviation N=10 {dev10:.1e}, N=11 {dev11:.1e}", fam.tables.len()),
    ))
}

fn degenerate() -> Result<Outcome, String> {
    let rep = corpus::degenerate();
    let ld = LimitData::new(&rep).map_err(e)?;
    let nd = ld.nondegeneracy();
    let detected = matches!(nd, Nondegeneracy::Degenerate { .. });
    let even_errors = [2, 4, 6].iter().all(|&n| approximant(&rep, n).is_err());
    let s2 = rep.sum_block(2);
    let s3 = rep.sum_block(3);
    let s3_brute = rep.sum_block_brute(3);
    let oracle_ok = s2.is_zero() && s3 == s3_brute && s3 == Q::from_i64(16);
    let stated = s3 == Q::from_i64(8);
    let detail = format!(
        "degenerate detected: {detected}; approximant(N even) errors: {even_errors}; Σ(2) = {s2}; Σ(3) = {s3} (direct sum {s3_brute}); \
         stated value 8 {}",
        if stated { "reproduced" } else { "NOT reproduced: every 4-digit word contributes uᵀdiag(1,−1)⁴v = 2, so Σ(3) = 8·2 = 16" }
    );
    Ok(ok(detected && even_errors && oracle_ok && stated, detail))
}

fn permuted_equal(a: &[Matrix<Q>], b: &[Matrix<Q>]) -> bool {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    perms.iter().any(|p| a.iter().zip(b).all(|(x, y)| (0..3).all(|r| (0..3).all(|c| x[(p[r], p[c])] == y[(r, c)]))))
}

fn delta_round_trip() -> Result<Outcome, String> {
    let y = q(2, 3);
    let rep = construct_delta(&y, 2).map_err(e)?;
    let shown = [qm(&[&[0, 0, 0], &[0, 0, 0], &[0, 1, 0]]), qm(&[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]])];
    let same = rep.dim() == 3 && permuted_equal(rep.mats(), &shown);
    let ld = LimitData::new(&rep).map_err(e)?;
    let pm = point_mass(&ld, GroupElement(0), &y).map_err(e)?.value();
    let pm_ok = pm.is_some_and(|v| (v - 1.0).abs() < 1e-9);
    let verdict = classify(&rep, &ClassifyOptions::default()).map_err(e)?;
    let cert = matches!(&verdict.bounds.finiteness, Some(Finiteness::Holds { exact_value: Some(v), .. }) if v == "1")
        && (verdict.bounds.rho - 1.0).abs() < 1e-12;
    let pure = verdict.spectral_type == SpectralType::PurePoint;

    let seed = 20240917;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for _ in 0..20 {
        let den = rng.random_range(1..=64i64);
        let num = rng.random_range(0..=den);
        let y = q(num, den);
        let rep = construct_delta(&y, 2).map_err(e)?;
        let ld = LimitData::new(&rep).map_err(e)?;
        match point_mass(&ld, GroupElement(0), &y).map_err(e)?.value() {
            Some(v) if (v - 1.0).abs() < 1e-9 => worst = worst.max((v - 1.0).abs()),
            other => failures.push(format!("{y}: {other:?}")),
        }
    }
    Ok(ok(
        same && pm_ok && cert && pure && failures.is_empty(),
        format!(
            "matrices match up to relabeling: {same}; μ({{2/3}}) = {pm:?}; type {:?} via {}, certificate ρ* = ρ = 1: {cert}; \
             20 random p/q (seed {seed}) max |mass − 1| = {worst:.1e}{}",
            verdict.spectral_type,
            verdict.rule,
            if failures.is_empty() { String::new() } else { format!("; failures {failures:?}") }
        ),
    ))
}

fn mixed_type() -> Result<Outcome, String> {
    let rep = corpus::mixed_two_cycle();
    let ld = LimitData::new(&rep).map_err(e)?;
    let fam = ghost_family(&ld, 6).map_err(e)?;
    // Odd blocks (g^1) tend to Lebesgue, even blocks (g^0) to ½(Leb + δ_{1/3}).
    let third = q(1, 3);
    let mut leb_err: f64 = 0.0;
    let mut mixed_err: f64 = 0.0;
    for ell in 0..=6u32 {
        for idx in IntervalIndex::level(ell, 2) {
            let base = 0.5f64.powi(ell as i32);
            let (lo, hi) = idx.bounds(2);
            let excess = if lo <= third && third < hi { 0.5 } else { 0.0 };
            leb_err = leb_err.max((fam.tables[1].mass(idx, 2) - base).abs());
            mixed_err = mixed_err.max((fam.tables[0].mass(idx, 2) - (0.5 * base + excess)).abs());
        }
    }
    let pm = point_mass(&ld, GroupElement(0), &third).map_err(e)?.value();
    let pm_ok = pm.is_some_and(|v| (v - 0.5).abs() < 1e-6);
    let verdict = classify(&rep, &ClassifyOptions::default()).map_err(e)?;
    let mixed = verdict.spectral_type == SpectralType::MixedObserved;
    Ok(ok(
        leb_err < 1e-9 && mixed_err < 1e-9 && pm_ok && mixed,
        format!(
            "Lebesgue residue max error {leb_err:.1e}; mixed residue max error {mixed_err:.1e}; μ({{1/3}}) = {pm:?}; type {:?}",
            verdict.spectral_type
        ),
    ))
}

fn stern() -> Result<Outcome, String> {
    let b = jsr_bounds(&corpus::stern_family(), 6, DEFAULT_BUDGET).map_err(e)?;
    let ld = LimitData::new(&corpus::stern()).map_err(e)?;
    let rk = ld.rho() / 2.0;
    let verdict = classify(&corpus::stern(), &ClassifyOptions::default()).map_err(e)?;
    let sc = verdict.spectral_type == SpectralType::SingularContinuous && verdict.rule == "c";
    Ok(ok(
        b.lower >= 1.61803 && b.upper <= 2.4 && (rk - 1.5).abs() < 1e-9 && sc,
        format!(
            "jsr ∈ [{:.6}, {:.6}]; ρ/k = {rk:.9}; type {:?} via rule {}",
            b.lower, b.upper, verdict.spectral_type, verdict.rule
        ),
    ))
}

/// Level sums of the atoms, from the finest level up.
fn bucketed(atoms: &[Q], k: usize, n: u32) -> Vec<Vec<Q>> {
    let mut levels = vec![atoms.to_vec()];
    for _ in 0..n {
        let finer = levels.last().expect("nonempty");
        let coarser = finer.chunks(k).map(|c| c.iter().fold(Q::zero(), |a, x| a + x)).collect();
        levels.push(coarser);
    }
    levels.reverse();
    levels
}

fn oracle_equivalence() -> Result<Outcome, String> {
    let mut compared = 0usize;
    let mut skipped = Vec::new();
    let mut mismatches = Vec::new();
    for (name, rep) in corpus::named() {
        if rep.k() > 3 || rep.dim() > 4 {
            continue;
        }
        for n in 0..=12u32 {
            let mu = match approximant(&rep, n) {
                Ok(mu) => mu,
                Err(_) => {
                    skipped.push(format!("{name}:{n}"));
                    continue;
                }
            };
            let sums = bucketed(mu.masses(), rep.k(), n);
            for ell in 0..=n {
                let closed = level_masses(&rep, n, ell).map_err(e)?;
                compared += closed.len();
                if closed != sums[ell as usize] {
                    mismatches.push(format!("{name} N={n} level {ell}"));
                }
            }
            // Single-interval closed form on the coarse levels.
            for ell in 0..=n.min(4) {
                for idx in IntervalIndex::level(ell, rep.k()) {
                    let i = (idx.m - (rep.k() as u64).pow(ell)) as usize;
                    compared += 1;
                    if interval_mass(&rep, n, idx).map_err(e)? != sums[ell as usize][i] {
                        mismatches.push(format!("{name} N={n} I({ell},{})", idx.m));
                    }
                }
            }
        }
    }
    Ok(ok(
        mismatches.is_empty(),
        format!(
            "{compared} interval masses compared exactly, {} mismatches; skipped blocks with Σ ≤ 0: {}",
            mismatches.len(),
            skipped.join(" ")
        ),
    ))
}

fn fourier() -> Result<Outcome, String> {
    let mut worst: f64 = 0.0;
    let mut zero_err: f64 = 0.0;
    for rep in [corpus::trivial(), corpus::zaremba_reduced()] {
        let mu = approximant(&rep, 12).map_err(e)?;
        for m in -8..=8i64 {
            let c = fourier_coefficient(&rep, m, 20).map_err(e)?;
            worst = worst.max((c.value() - mu.fourier(m)).norm());
            if m == 0 {
                zero_err = zero_err.max((c.value() - num_complex::Complex64::new(1.0, 0.0)).norm());
            }
        }
    }
    Ok(ok(
        worst < 3e-3 && zero_err < 1e-12,
        format!("max |product − DFT(μ_12)| = {worst:.2e}; |μ̂(0) − 1| = {zero_err:.1e}"),
    ))
}

fn finiteness() -> Result<Outcome, String> {
    let fam = corpus::aperiodic_family(3);
    let report = finiteness_check(&fam, DEFAULT_BUDGET).map_err(e)?;
    let holds = matches!(&report.finiteness, Finiteness::Holds { word, exact_value: Some(v), .. } if word == &vec![1] && v == "3");

    let schedule: Vec<u64> = (1..=5).map(|j| 4u64.pow(j)).collect();
    let total: u64 = schedule.iter().map(|n| n + 1).sum();
    let rows = aperiodic_liminf_demo(&fam, &schedule, total as usize).map_err(e)?;
    let mut bad = Vec::new();
    for row in &rows {
        let nj = if row.blocks == 0 { 0 } else { schedule[row.blocks - 1] };
        let exponent = nj + row.offset;
        let exact = num_traits::pow(Q::from_i64(3), exponent as usize).to_string();
        let rate = 3f64.powf(exponent as f64 / row.n as f64);
        if row.norm != exact || (row.rate - rate).abs() > 1e-12 * rate {
            bad.push(row.n);
        }
    }
    let stern = finiteness_check(&corpus::stern_family(), DEFAULT_BUDGET).map_err(e)?;
    let stern_fails = matches!(stern.finiteness, Finiteness::Fails { bound } if bound < 3.0);
    Ok(ok(
        holds && bad.is_empty() && !rows.is_empty() && stern_fails,
        format!(
            "aperiodic family: {:?}; {} demo rows, norms exactly 3^(n_j + r): {}; Stern: {:?}",
            report.finiteness,
            rows.len(),
            bad.is_empty(),
            stern.finiteness
        ),
    ))
}

fn nonnegative(rep: &LinearRepresentation<Q>) -> bool {
    rep.mats().iter().all(Matrix::is_nonnegative) && rep.u().iter().chain(rep.v()).all(|x| !x.is_negative())
}

fn chain() -> Result<Outcome, String> {
    let n_star = 10;
    let seed = 1;
    let mut lines = Vec::new();
    let mut all = true;
    for (name, rep) in corpus::named() {
        if !nonnegative(&rep) {
            continue;
        }
        let opts = BoundsOptions {
            lyapunov_length: n_star,
            monte_carlo: Some((4 * n_star, 2000, seed)),
            ..BoundsOptions::default()
        };
        let report = match fundamental_inequality(&rep, &opts) {
            Ok(r) => r,
            Err(err) => {
                lines.push(format!("{name}: not applicable ({err})"));
                continue;
            }
        };
        let tau = opts.tau;
        let mc = report.lyap_mc.as_ref().expect("requested");
        let lyap = report.lyap_upper();
        let c1 = lyap >= mc.estimate - 3.0 * mc.stderr;
        let c2 = report.rho_over_k <= report.jsr_upper + tau;
        let c3 = report.jsr_lower <= report.rho + tau;
        let consistent = report.relation_verdicts.iter().enumerate().all(|(i, v)| match (i, v.verdict) {
            (0, Relation::Strict) => lyap < report.rho_over_k,
            (0, Relation::Equal) => lyap >= report.rho_over_k - tau,
            (1, Relation::Strict) => report.jsr_lower > report.rho_over_k,
            (1, Relation::Equal) => report.jsr_lower <= report.rho_over_k + tau,
            (2, Relation::Strict) => report.jsr_lower < report.rho,
            (2, Relation::Equal) => report.jsr_upper >= report.rho - tau,
            _ => true,
        });
        let pass = c1 && c2 && c3 && consistent;
        all &= pass;
        lines.push(format!(
            "{name}: ρ̄≤{lyap:.4} (mc {:.4}±{:.4}) ρ/k={:.4} ρ*∈[{:.4},{:.4}] ρ={:.4} {:?}{}",
            mc.estimate,
            mc.stderr,
            report.rho_over_k,
            report.jsr_lower,
            report.jsr_upper,
            report.rho,
            report.relation_verdicts.iter().map(|v| v.verdict).collect::<Vec<_>>(),
            if pass { "" } else { " VIOLATION" }
        ));
    }
    Ok(ok(all, format!("n* = {n_star}, Monte Carlo at 4n* with seed {seed}; {}", lines.join("; "))))
}

fn main() {
    let criteria: [(&str, Check, Duration); 9] = [
        ("two-cycle example", two_cycle, Duration::from_secs(1)),
        ("degenerate detection", degenerate, Duration::from_millis(100)),
        ("delta construction round trip", delta_round_trip, Duration::from_secs(10)),
        ("mixed-type example", mixed_type, Duration::from_secs(5)),
        ("Stern classification", stern, Duration::from_secs(30)),
        ("oracle equivalence", oracle_equivalence, Duration::from_secs(60)),
        ("Fourier consistency", fourier, Duration::from_secs(30)),
        ("finiteness certificates", finiteness, Duration::from_secs(30)),
        ("fundamental inequality", chain, Duration::from_secs(60)),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check().unwrap_or_else(|err| ok(false, format!("error: {err}")));
        let took = start.elapsed();
        let in_time = took <= *limit;
        let passed = outcome.passed && in_time;
        println!(
            "criterion {} [{name}]: {} ({:.3} s, limit {:.1} s) {}",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs_f64(),
            outcome.detail
        );
        if !passed {
            failed.push(i + 1);
        }
    }
    // Criterion 2 states Σ(3) = 8 for the degenerate representation; the
    // exact value is 16 and the line above reports the discrepancy. It is
    // the only failure this gate tolerates, and only when every other part
    // of that criterion holds.
    let tolerated = degenerate_oracle_only();
    let blocking: Vec<usize> = failed.iter().copied().filter(|&c| !(c == 2 && tolerated)).collect();
    println!("acceptance: {} of 9 criteria pass; blocking failures: {blocking:?}", 9 - failed.len());
    if !blocking.is_empty() {
        std::process::exit(1);
    }
}

/// Criterion 2 with the stated Σ(3) replaced by the brute-force value.
fn degenerate_oracle_only() -> bool {
    let rep = corpus::degenerate();
    let Ok(ld) = LimitData::new(&rep) else { return false };
    matches!(ld.nondegeneracy(), Nondegeneracy::Degenerate { .. })
        && [2, 4, 6].iter().all(|&n| approximant(&rep, n).is_err())
        && rep.sum_block(2).is_zero()
        && rep.sum_block(3) == rep.sum_block_brute(3)
        && rep.sum_block(3) == Q::from_i64(16)
}
