//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the lines show up in plain `cargo test` output.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use secant_scope::binary_forms::{gcd_degree_euclid, gcd_degree_subresultant, BinaryForm, DivisorP1, PointP1};
use secant_scope::ci_curves::{
    construct_ci_with_secant_line, find_k_secants_ci, line_intersection_length, random_smooth_ci, CICurve,
};
use secant_scope::gonality::{
    analyze_curve, ci_hypotheses, clifford_trichotomy, genus_subcanonical, gonality_from_secants, AnalyzeOptions,
    CliffordCase, CurveInput, Regime,
};
use secant_scope::line::LineP3;
use secant_scope::psolve::{multistart_newton, solve_square_system, MPoly, PolySystem, SolveOptions};
use secant_scope::rational_curves::{
    construct_with_k_secant, evaluation_rank, find_k_secants, pencil_dimension, random_integer_form,
    random_points_q, random_rational_curve,
};
use secant_scope::scalar::Scalar;
use secant_scope::secant::{SecantOptions, SolverKind};
use secant_scope::strata::{
    conditions_imposed, estimate_local_dimension, expected_dims, stratum_equations, AlignedScheme, FamilyParams,
    StratumLabel,
};
use secant_scope::Rational;

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

/// Criteria whose statement cannot hold as written; they print FAIL without
/// failing the run.
const KNOWN_RED: &[&str] = &["10a"];

fn opts(seed: u64) -> SecantOptions {
    let mut o = SecantOptions {
        seed,
        ..Default::default()
    };
    o.solve.seed = seed;
    o
}

fn outcome(id: &'static str, pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        id,
        pass,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn c1_quintic_counts() -> Outcome {
    let t = Instant::now();
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for seed in 1..=20 {
        let c = random_rational_curve(5, seed).expect("random quintic");
        let found = find_k_secants(&c, 4, &opts(seed)).expect("search");
        let r = found.records.iter().map(|r| r.residual).fold(0.0, f64::max);
        worst = worst.max(r);
        if found.records.len() != 1 || r > 1e-8 {
            bad.push((seed, found.records.len()));
        }
    }
    let el = t.elapsed();
    let pass = bad.is_empty() && el <= Duration::from_secs(120);
    outcome(
        "1",
        pass,
        format!("quintic 4-secants: 20 curves, off-count {bad:?}, max residual {worst:.1e}, {:.1}s (limit 120s)", secs(el)),
    )
}

fn c2_unique_long_secant() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for d in 5..=7 {
        let p = construct_with_k_secant(d, d - 1, 11 + d as u64).expect("planted curve");
        let found = find_k_secants(&p.curve, d - 1, &opts(d as u64)).expect("search");
        let planted = p.line.to_c64();
        let ok = found.records.len() == 1 && found.records[0].line.same_line(&planted, 1e-6) && found.records[0].length == d - 1;
        pass &= ok;
        notes.push(format!("d={d}: {} found", found.records.len()));
    }
    outcome("2", pass, format!("exactly the planted (d-1)-secant: {}", notes.join(", ")))
}

fn c3_sextic_count() -> Outcome {
    let c = random_rational_curve(6, 1).expect("random sextic");
    let hom = find_k_secants(&c, 4, &opts(1)).expect("homotopy search");
    let newton = find_k_secants(
        &c,
        4,
        &SecantOptions {
            solver: SolverKind::Multistart { starts: 10_000 },
            ..opts(1)
        },
    )
    .expect("multistart search");
    let agree = hom.records.len() == newton.records.len()
        && hom
            .records
            .iter()
            .all(|r| newton.records.iter().any(|s| s.line.same_line(&r.line, 1e-6)));
    let n4 = hom.records.len();
    let mut counts = Vec::new();
    for seed in 1..=10 {
        let c = random_rational_curve(6, 100 + seed).expect("random sextic");
        counts.push(find_k_secants(&c, 4, &opts(seed)).expect("search").records.len());
    }
    let d = 6;
    let classical = (d - 2) * (d - 3) * (d - 3) * (d - 4) / 12;
    let pass = agree && n4 > 0 && counts.iter().all(|&k| k == n4) && n4 == classical;
    outcome(
        "3",
        pass,
        format!(
            "sextic 4-secants: oracle homotopy {n4} vs multistart {} (agree {agree}); 10 sextics {counts:?}; classical {classical}",
            newton.records.len()
        ),
    )
}

fn h0(n: usize) -> usize {
    (n + 1) * (n + 2) * (n + 3) / 6
}

fn c4_dimension_table() -> Outcome {
    use StratumLabel::*;
    let t = Instant::now();
    // closed forms: 4 + k; k + dim G(1, d-k); 4d + 4 - k; h(a,a) - 2k
    let cases: Vec<(StratumLabel, usize)> = vec![
        (Grassmannian, 4),
        (Alk { k: 4 }, 8),
        (Alk { k: 5 }, 9),
        (Pk { d: 5, k: 4 }, 4 + 2 * (5 - 4 - 1)),
        (Pk { d: 6, k: 4 }, 4 + 2 * (6 - 4 - 1)),
        (Pk { d: 6, k: 5 }, 5 + 2 * (6 - 5 - 1)),
        (Pk { d: 7, k: 6 }, 6 + 2 * (7 - 6 - 1)),
        (IkRational { d: 5, k: 4 }, 20),
        (IkRational { d: 6, k: 5 }, 23),
        (CiFiber { a: 4, b: 4, k: 4 }, 2 * h0(4) - 4 - 2 * 4),
    ];
    let mut pass = true;
    let mut rows = Vec::new();
    for (i, (label, want)) in cases.into_iter().enumerate() {
        let chart = stratum_equations(label, 40 + i as u64).expect("chart");
        let rep = estimate_local_dimension(&chart).expect("estimate");
        let gap_ok = rep.singular_value_gap.is_none_or(|g| g > 1e3);
        let ok = rep.estimated_dim == want && rep.expected_dim == want && gap_ok;
        pass &= ok;
        rows.push(format!("{label}={}", rep.estimated_dim));
    }
    let el = t.elapsed();
    pass &= el <= Duration::from_secs(60);
    outcome(
        "4",
        pass,
        format!(
            "local dimensions {} in {:.1}s",
            rows.join(" "),
            secs(el)
        ),
    )
}

fn c5_alignment_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut disagree = 0;
    let mut total = 0;
    for d in 4..=6 {
        for curve in 0..5u64 {
            let p = construct_with_k_secant(d, d - 1, 1000 * d as u64 + curve).expect("planted curve");
            let on_line: Vec<PointP1<Rational>> = p.divisor.points().iter().map(|(x, _)| x.clone()).collect();
            for t in 0..100 {
                let pts = if t % 2 == 0 {
                    on_line[..rng.random_range(3..=on_line.len())].to_vec()
                } else {
                    { let k = rng.random_range(3..=d); random_points_q(&mut rng, k) }
                };
                let by_rank = evaluation_rank(&p.curve, &pts).expect("rank") <= 2;
                let by_pencil = pencil_dimension(&p.curve, &pts).expect("pencil") >= 2;
                total += 1;
                if by_rank != by_pencil {
                    disagree += 1;
                }
            }
        }
    }
    outcome("5", disagree == 0 && total == 1500, format!("rank vs pencil alignment: {disagree} disagreements in {total} trials"))
}

fn nonzero_form(rng: &mut ChaCha8Rng, d: usize) -> BinaryForm<Rational> {
    loop {
        let f = random_integer_form(rng, d, 7);
        if !f.is_zero() {
            return f;
        }
    }
}

fn c6_subresultant_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = 0;
    for t in 0..1000 {
        let j = t % 6;
        let g = nonzero_form(&mut rng, j);
        let f = { let e = rng.random_range(0..=4); g.mul(&nonzero_form(&mut rng, e)) };
        let h = { let e = rng.random_range(0..=4); g.mul(&nonzero_form(&mut rng, e)) };
        if f.degree() == 0 && h.degree() == 0 {
            continue;
        }
        match (gcd_degree_subresultant(&f, &h), gcd_degree_euclid(&f, &h)) {
            (Ok(a), Ok(b)) if a == b && a >= j => {}
            _ => bad += 1,
        }
    }
    outcome("6", bad == 0, format!("subresultant vs Euclid gcd degree: {bad} mismatches in 1000 pairs"))
}

fn random_q_line(rng: &mut ChaCha8Rng) -> LineP3<Rational> {
    loop {
        let p: [Rational; 4] = std::array::from_fn(|_| Rational::from_i64(rng.random_range(-4..=4)));
        let q: [Rational; 4] = std::array::from_fn(|_| Rational::from_i64(rng.random_range(-4..=4)));
        if let Ok(l) = LineP3::from_points(p, q) {
            return l;
        }
    }
}

fn c7_conditions_imposed() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = Vec::new();
    let mut n = 0;
    for k in 2..=8 {
        for m in 1..=6 {
            for fat in [false, true] {
                let line = random_q_line(&mut rng);
                let divisor = if fat && k >= 3 {
                    // one double point plus simple points
                    let pts = random_points_q(&mut rng, k - 1);
                    DivisorP1::new(pts.into_iter().enumerate().map(|(i, p)| (p, if i == 0 { 2 } else { 1 })).collect())
                } else {
                    DivisorP1::new(random_points_q(&mut rng, k).into_iter().map(|p| (p, 1)).collect())
                };
                let z = AlignedScheme { line, divisor };
                let got = conditions_imposed(&z, m).expect("conditions");
                n += 1;
                if got != k.min(m + 1) {
                    bad.push((k, m, got));
                }
            }
        }
    }
    outcome("7", bad.is_empty(), format!("conditions imposed = min(k, m+1) on {n} schemes, failures {bad:?}"))
}

fn c8_ci_end_to_end() -> Outcome {
    let t = Instant::now();
    let c = random_smooth_ci(4, 4, 1).expect("random CI(4,4)");
    let rep = analyze_curve(&CurveInput::Ci(c.clone()), &AnalyzeOptions { secant: opts(1), non_bielliptic: false }).expect("analysis");
    let five = find_k_secants_ci(&c, 5, &opts(1)).expect("5-secant search");
    // Cayley's count of 4-secants for a curve of degree 16 and genus 33
    let (d, g) = (16i64, 33i64);
    let cayley = (d - 2) * (d - 3) * (d - 3) * (d - 4) / 12 - g * (d * d - 7 * d + 13 - g) / 2;
    let first = rep.l == 4
        && !rep.witnesses.is_empty()
        && rep.is_consistent()
        && five.records.is_empty()
        && rep.regime == Regime::TheoremLayer
        && rep.gonality == Some(12)
        && rep.clifford == Some(10)
        && rep.clifford_case == Some(CliffordCase::GonMinus2);

    let p = construct_ci_with_secant_line(4, 5, 8).expect("planted CI(4,5)");
    let exact_len = line_intersection_length(&p.curve, &p.line).expect("exact length");
    let cc: CICurve<Complex64> = p.curve.to_c64();
    let fives = find_k_secants_ci(&p.curve, 5, &opts(8)).expect("search");
    let on_fa = fives.records.iter().all(|r| {
        let [a, b] = r.line.frame();
        cc.fa().restrict_to_line(&r.line).norm() <= 1e-8 * cc.fa().restriction_scale(a, b)
    });
    let has_planted = fives.records.iter().any(|r| r.line.same_line(&p.line.to_c64(), 1e-6));
    let second = exact_len == 5 && on_fa && has_planted;
    outcome(
        "8",
        first && second,
        format!(
            "CI(4,4): l={} with {} 4-secants (Cayley {cayley}), {} 5-secants, gonality {:?}, clifford {:?} {:?}; \
             CI(4,5): planted length {exact_len}, {} 5-secants all on F_4 {on_fa}; {:.1}s",
            rep.l,
            rep.witnesses.len(),
            five.records.len(),
            rep.gonality,
            rep.clifford,
            rep.clifford_case.map(|c| c.to_string()),
            fives.records.len(),
            secs(t.elapsed())
        ),
    )
}

/// Conditions b)-d) at one `f`, in exact rationals with s running over the
/// integers where `s < lhs`: (b, first s for c, d).
fn hyp_oracle_at(alpha: i64, dc: i64, f: i64) -> (bool, Option<i64>, bool) {
    let q = |n: i64| Rational::from_i64(n);
    let lhs = alpha - f + 4;
    let d = dc - 3;
    let c = (1..lhs).find(|&s| q(lhs) > q(s) + q(d) / (q(s) * q(f)));
    (f < alpha + 4, c, q(dc) <= q(2) * q(alpha - f + 2) * q(f))
}

fn c9_hypotheses() -> Outcome {
    let mut bad = Vec::new();
    let mut n = 0;
    for a in 4..=10usize {
        for b in a..=12usize {
            let sum = ci_hypotheses(a, b, false).expect("hypotheses");
            let (alpha, dc) = (a as i64 + b as i64 - 4, (a * b) as i64);
            let mut witness = None;
            for f in b.max(a + 1) as i64..=alpha + 3 {
                let (cb, cc, cd) = hyp_oracle_at(alpha, dc, f);
                if cb && cc.is_some() && cd && witness.is_none() {
                    witness = cc.map(|s| (f, s));
                }
                let r = sum.reports.iter().find(|r| r.f == f);
                let ok = r.is_some_and(|r| r.cond_b == cb && r.cond_c_s == cc && r.cond_d == cd);
                n += 1;
                if !ok {
                    bad.push((a, b, f));
                }
            }
            if sum.witness != witness || sum.overall != witness.is_some() {
                bad.push((a, b, 0));
            }
        }
    }
    let s45 = ci_hypotheses(4, 5, false).expect("(4,5)");
    let s55 = ci_hypotheses(5, 5, false).expect("(5,5)");
    let d_fails_55 = s55.reports.iter().all(|r| !r.cond_d);
    let pass = bad.is_empty() && s45.overall && s45.witness == Some((5, 2)) && !s55.overall && d_fails_55;
    outcome(
        "9",
        pass,
        format!(
            "hypotheses vs exact oracle on {n} (a,b,f) cases, mismatches {bad:?}; (4,5) witness {:?}; (5,5) {} with d) false at every f",
            s45.witness,
            if s55.overall { "PASS" } else { "FAIL" },
        ),
    )
}

fn c10a_trichotomy() -> Outcome {
    let mut bad = Vec::new();
    let mut n = 0;
    for l in 3..=6usize {
        for dc in l + 4..=40 {
            let gon = gonality_from_secants(dc, l).expect("gonality");
            let (cl, case) = clifford_trichotomy(dc, l).expect("trichotomy");
            let g3 = case == CliffordCase::GonMinus3;
            let ok = (cl + 3 == gon || cl + 2 == gon) && g3 == (cl + 3 == gon) && g3 == (l == 3) && (l == 3) == (cl == dc - 6);
            n += 1;
            if !ok {
                bad.push((dc, l));
            }
        }
    }
    let first = bad.first().copied();
    outcome(
        "10a",
        bad.is_empty(),
        format!(
            "three-way equivalence gon-3 <=> l=3 <=> clifford=d(C)-6 on {n} pairs: {} fail (first {first:?}); \
             at l = 4 the gon-2 branch also equals d(C)-6",
            bad.len()
        ),
    )
}

fn c10b_genus() -> Outcome {
    let mut bad = Vec::new();
    for a in 2..=6i64 {
        for b in a..=6 {
            let g = genus_subcanonical(a + b - 4, (a * b) as usize).expect("genus");
            if g != a * b * (a + b - 4) / 2 + 1 {
                bad.push((a, b));
            }
        }
    }
    outcome("10b", bad.is_empty(), format!("subcanonical genus vs ab(a+b-4)/2+1 on 2<=a<=b<=6: failures {bad:?}"))
}

fn c10c_top_stratum() -> Outcome {
    let mut bad = Vec::new();
    for d in 5..=12usize {
        let t = expected_dims(FamilyParams::Rational { d, k: d - 1 }).expect("table");
        let hs = t.iter().find(|r| r.stratum == format!("H_{}^s({d},0)", d - 1)).map(|r| r.dim);
        let top = t.iter().find(|r| r.stratum.ends_with("[3d+5]")).map(|r| r.dim);
        let ok = hs == Some(3 * d + 5) && top == Some(3 * d + 5) && 3 * d + 5 == 4 * d - (d - 5);
        if !ok {
            bad.push(d);
        }
    }
    outcome("10c", bad.is_empty(), format!("H_(d-1) = 3d+5 = 4d-(d-5) for 5<=d<=12: failures {bad:?}"))
}

fn random_system(rng: &mut ChaCha8Rng, n: usize, degs: &[u32]) -> PolySystem {
    fn exps(n: usize, d: u32) -> Vec<Vec<u32>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for k in 0..=d {
            for mut rest in exps(n - 1, d - k) {
                rest.insert(0, k);
                out.push(rest);
            }
        }
        out
    }
    let polys = degs
        .iter()
        .map(|&d| {
            MPoly::from_terms(
                exps(n, d)
                    .into_iter()
                    .map(|e| (e, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))),
            )
        })
        .collect();
    PolySystem::new(n, polys).expect("square")
}

fn close(x: &[Complex64], y: &[Complex64]) -> bool {
    let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let n: f64 = x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    d <= 1e-6 * n.max(1.0)
}

fn c11_solver_kernel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for trial in 0..50u64 {
        let n = rng.random_range(1..=3);
        let degs: Vec<u32> = (0..n).map(|_| rng.random_range(1..=3)).collect();
        let sys = random_system(&mut rng, n, &degs);
        let so = SolveOptions {
            seed: trial,
            ..Default::default()
        };
        let hom = solve_square_system(&sys, &so).expect("homotopy");
        let ms = multistart_newton(&sys, 20_000, &so);
        let bezout: u32 = degs.iter().product();
        let res = hom.solutions.iter().map(|x| sys.residual(x)).fold(0.0, f64::max);
        worst = worst.max(res);
        let same = hom.solutions.len() == ms.len() && hom.solutions.iter().all(|x| ms.iter().any(|y| close(x, y)));
        if !same || res >= 1e-10 || hom.solutions.len() > bezout as usize {
            bad.push((trial, hom.solutions.len(), ms.len()));
        }
    }
    outcome("11", bad.is_empty(), format!("homotopy vs multistart on 50 systems: mismatches {bad:?}, max residual {worst:.1e}"))
}

fn main() {
    let criteria: Vec<fn() -> Outcome> = vec![
        c1_quintic_counts,
        c2_unique_long_secant,
        c3_sextic_count,
        c4_dimension_table,
        c5_alignment_equivalence,
        c6_subresultant_oracle,
        c7_conditions_imposed,
        c8_ci_end_to_end,
        c9_hypotheses,
        c10a_trichotomy,
        c10b_genus,
        c10c_top_stratum,
        c11_solver_kernel,
    ];
    let mut unexpected = Vec::new();
    for run in criteria {
        let o = run();
        let known = KNOWN_RED.contains(&o.id);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("[{tag}] criterion {}: {}", o.id, o.detail);
        if !o.pass && !known {
            unexpected.push(o.id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("failing criteria: {unexpected:?}");
        std::process::exit(1);
    }
}
