//! Randomized property suites behind `selftest`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use secant_scope::binary_forms::{gcd_degree_euclid, gcd_degree_subresultant, BinaryForm, DivisorP1};
use secant_scope::gonality::{clifford_trichotomy, genus_subcanonical, gonality_from_secants, CliffordCase};
use secant_scope::line::LineP3;
use secant_scope::rational_curves::{
    construct_with_k_secant, evaluation_rank, pencil_dimension, random_integer_form, random_points_q,
};
use secant_scope::scalar::Scalar;
use secant_scope::strata::{conditions_imposed, AlignedScheme};
use secant_scope::Rational;
use serde::Serialize;

use crate::report::CliResult;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// First failing case, if any.
    pub first_failure: Option<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult {
            name,
            trials: 0,
            failures: 0,
            first_failure: None,
        }
    }

    fn check(&mut self, ok: bool, case: impl FnOnce() -> String) {
        self.trials += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(case());
            }
        }
    }
}

fn nonzero_form(rng: &mut ChaCha8Rng, d: usize) -> BinaryForm<Rational> {
    loop {
        let f = random_integer_form(rng, d, 6);
        if !f.is_zero() {
            return f;
        }
    }
}

fn subresultant_vs_euclid(trials: usize, rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut s = SuiteResult::new("subresultant_vs_euclid");
    for t in 0..trials {
        let j = t % 6;
        let g = nonzero_form(rng, j);
        let (du, dv) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let f = g.mul(&nonzero_form(rng, du));
        let h = g.mul(&nonzero_form(rng, dv));
        let (a, b) = (gcd_degree_subresultant(&f, &h), gcd_degree_euclid(&f, &h));
        let ok = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
        s.check(ok, || format!("planted gcd degree {j}: subresultant {a:?}, euclid {b:?}"));
    }
    s
}

fn alignment_tests_agree(trials: usize, seed: u64, rng: &mut ChaCha8Rng) -> CliResult<SuiteResult> {
    let mut s = SuiteResult::new("alignment_rank_vs_pencil");
    for d in 4..=6 {
        let planted = construct_with_k_secant(d, d - 1, seed.wrapping_add(d as u64))?;
        let line_pts: Vec<_> = planted.divisor.points().iter().map(|(p, _)| p.clone()).collect();
        for t in 0..trials {
            let pts = if t % 2 == 0 {
                let k = rng.random_range(3..=line_pts.len());
                line_pts[..k].to_vec()
            } else {
                let k = rng.random_range(3..=d);
                random_points_q(rng, k)
            };
            let by_rank = evaluation_rank(&planted.curve, &pts)? <= 2;
            let by_pencil = pencil_dimension(&planted.curve, &pts)? >= 2;
            s.check(by_rank == by_pencil, || format!("d = {d}, {} points: rank {by_rank}, pencil {by_pencil}", pts.len()));
        }
    }
    Ok(s)
}

fn random_line(rng: &mut ChaCha8Rng) -> LineP3<Rational> {
    loop {
        let p: [Rational; 4] = std::array::from_fn(|_| Rational::from_i64(rng.random_range(-5..=5)));
        let q: [Rational; 4] = std::array::from_fn(|_| Rational::from_i64(rng.random_range(-5..=5)));
        if let Ok(l) = LineP3::from_points(p, q) {
            return l;
        }
    }
}

fn conditions_suite(trials: usize, rng: &mut ChaCha8Rng) -> CliResult<SuiteResult> {
    let mut s = SuiteResult::new("conditions_imposed");
    for _ in 0..trials.div_ceil(42).max(1) {
        for k in 2..=8 {
            for m in 1..=6 {
                let line = random_line(rng);
                let pts = random_points_q(rng, k);
                let z = AlignedScheme {
                    line,
                    divisor: DivisorP1::new(pts.into_iter().map(|p| (p, 1)).collect()),
                };
                let got = conditions_imposed(&z, m)?;
                s.check(got == k.min(m + 1), || format!("k = {k}, m = {m}: {got}"));
            }
        }
    }
    Ok(s)
}

fn trichotomy_suite() -> CliResult<SuiteResult> {
    let mut s = SuiteResult::new("clifford_trichotomy");
    for l in 3..=6 {
        for dc in l + 4..=40 {
            let gon = gonality_from_secants(dc, l)?;
            let (cl, case) = clifford_trichotomy(dc, l)?;
            let a = case == CliffordCase::GonMinus3;
            // cl = d(C) - 6 also holds at l = 4 (gon - 2 = d(C) - 6), so only l = 3 => cl = d(C) - 6
            let ok = (cl + 3 == gon || cl + 2 == gon) && a == (l == 3) && a == (cl + 3 == gon) && (!a || cl == dc - 6);
            s.check(ok, || format!("d(C) = {dc}, l = {l}: clifford {cl}, {case}"));
        }
    }
    Ok(s)
}

fn genus_suite() -> CliResult<SuiteResult> {
    let mut s = SuiteResult::new("ci_genus");
    for a in 2..=6i64 {
        for b in a..=6 {
            let g = genus_subcanonical(a + b - 4, (a * b) as usize)?;
            let classical = a * b * (a + b - 4) / 2 + 1;
            s.check(g == classical, || format!("({a}, {b}): {g} vs {classical}"));
        }
    }
    Ok(s)
}

fn gonality_decreasing() -> CliResult<SuiteResult> {
    let mut s = SuiteResult::new("gonality_decreasing_in_l");
    for dc in 4..=40 {
        for l in 2..dc - 1 {
            let (g0, g1) = (gonality_from_secants(dc, l)?, gonality_from_secants(dc, l + 1)?);
            s.check(g1 < g0, || format!("d(C) = {dc}, l = {l}"));
        }
    }
    Ok(s)
}

pub fn run_all(trials: usize, seed: u64) -> CliResult<Vec<SuiteResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        subresultant_vs_euclid(trials, &mut rng),
        alignment_tests_agree(trials, seed, &mut rng)?,
        conditions_suite(trials, &mut rng)?,
        trichotomy_suite()?,
        genus_suite()?,
        gonality_decreasing()?,
    ])
}
