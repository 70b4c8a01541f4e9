use num_complex::Complex64;

use super::{BinaryForm, DivisorP1, PointP1};
use crate::error::{Error, Result};

/// Two points of the projective line are identified within this chordal distance.
pub const DEDUP_TOL: f64 = 1e-8;

/// Leading/trailing coefficients below this fraction of the norm are treated as zero.
const END_COEFF_TOL: f64 = 1e-13;
const MAX_ITER: usize = 600;
const ATTEMPTS: usize = 4;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `p(x)` and `p'(x)` by Horner, ascending coefficients.
fn horner2(a: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = c(0.0);
    let mut dp = c(0.0);
    for &ai in a.iter().rev() {
        dp = dp * x + p;
        p = p * x + ai;
    }
    (p, dp)
}

/// Newton correction `p(x)/p'(x)`; far from the origin the reversed polynomial
/// is used, so huge roots do not overflow.
fn newton_ratio(a: &[Complex64], rev: &[Complex64], x: Complex64) -> (Complex64, f64) {
    let n = (a.len() - 1) as f64;
    if x.norm() <= 1.0 {
        let (p, dp) = horner2(a, x);
        let bound: f64 = a.iter().rev().fold(0.0, |acc, ai| acc * x.norm() + ai.norm());
        (p / dp, p.norm() / bound.max(f64::MIN_POSITIVE))
    } else {
        let y = 1.0 / x;
        let (q, dq) = horner2(rev, y);
        // p'/p = n y - y^2 q'/q
        let bound: f64 = rev.iter().rev().fold(0.0, |acc, ai| acc * y.norm() + ai.norm());
        let inv = y * n - y * y * dq / q;
        (1.0 / inv, q.norm() / bound.max(f64::MIN_POSITIVE))
    }
}

/// Aberth iteration on a polynomial with nonzero constant and leading terms.
fn aberth(a: &[Complex64], offset: f64) -> Option<Vec<Complex64>> {
    let n = a.len() - 1;
    let rev: Vec<Complex64> = a.iter().rev().copied().collect();
    let r = (a[0].norm() / a[n].norm()).powf(1.0 / n as f64);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + offset;
            Complex64::from_polar(r, th)
        })
        .collect();
    let mut done = vec![false; n];
    for _ in 0..MAX_ITER {
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (ratio, rel_res) = newton_ratio(a, &rev, z[k]);
            if rel_res <= 8.0 * f64::EPSILON * n as f64 || !ratio.is_finite() {
                done[k] = ratio.is_finite() || rel_res <= f64::EPSILON;
                if done[k] {
                    continue;
                }
            }
            let sum: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| 1.0 / (z[k] - z[j]))
                .sum();
            let w = ratio / (1.0 - ratio * sum);
            if !w.is_finite() {
                return None;
            }
            z[k] -= w;
            if w.norm() <= 2.0 * f64::EPSILON * z[k].norm() {
                done[k] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Some(z);
        }
    }
    None
}

fn chordal(x: Complex64, y: Complex64) -> f64 {
    (x - y).norm() / ((1.0 + x.norm_sqr()).sqrt() * (1.0 + y.norm_sqr()).sqrt())
}

/// Divisor of a nonzero complex form.
///
/// Roots at `[1:0]` and `[0:1]` come from vanishing end coefficients; the rest
/// from Aberth iteration on the `t = 1` chart. Clusters whose inclusion discs
/// overlap (or which lie within [`DEDUP_TOL`]) are merged and counted with
/// multiplicity.
pub fn roots_of_form(f: &BinaryForm<Complex64>) -> Result<DivisorP1<Complex64>> {
    let norm = f.norm();
    if norm == 0.0 {
        return Err(Error::ZeroForm);
    }
    let d = f.degree();
    let cf = f.coeffs();
    let small = |z: &Complex64| z.norm() <= END_COEFF_TOL * norm;
    let mu_inf = cf.iter().take_while(|z| small(z)).count();
    let mu_zero = cf.iter().rev().take_while(|z| small(z)).count();
    let mut points: Vec<(PointP1<Complex64>, usize)> = Vec::new();
    if mu_inf > 0 {
        points.push((PointP1::infinity(), mu_inf));
    }
    if mu_zero > 0 {
        points.push((PointP1::affine(c(0.0)), mu_zero));
    }
    if mu_inf + mu_zero >= d {
        return Ok(DivisorP1::new(points));
    }
    // ascending in x = s/t, with the zero end coefficients stripped
    let a: Vec<Complex64> = cf[mu_inf..d + 1 - mu_zero].iter().rev().copied().collect();
    let n = a.len() - 1;
    let z = if n == 1 {
        vec![-a[0] / a[1]]
    } else {
        let mut found = None;
        for attempt in 0..ATTEMPTS {
            if let Some(z) = aberth(&a, 0.4 + 0.77 * attempt as f64) {
                found = Some(z);
                break;
            }
        }
        found.ok_or(Error::NonConvergence { attempts: ATTEMPTS })?
    };
    let rev: Vec<Complex64> = a.iter().rev().copied().collect();
    let radii: Vec<f64> = z.iter().map(|&x| inclusion_radius(&a, &rev, x)).collect();
    // union-find over overlapping discs
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if chordal(z[i], z[j]) <= radii[i] + radii[j] + DEDUP_TOL {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj] = ri;
                }
            }
        }
    }
    let mut clusters: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match clusters.iter_mut().find(|(root, _)| *root == r) {
            Some((_, v)) => v.push(z[i]),
            None => clusters.push((r, vec![z[i]])),
        }
    }
    for (_, members) in clusters {
        let mu = members.len();
        let x = members.iter().sum::<Complex64>() / mu as f64;
        let x = if mu == 1 {
            polish(&a, &rev, x)
        } else {
            polish_multiple(&a, &rev, x, mu)
        };
        points.push((PointP1::affine(x), mu));
    }
    Ok(DivisorP1::new(points))
}

/// Chordal radius of a disc around `x` certain to contain a root of `p`:
/// `n (|p(x)| + rounding bound) / |p'(x)|`, evaluated in the chart of `x`.
fn inclusion_radius(a: &[Complex64], rev: &[Complex64], x: Complex64) -> f64 {
    let n = a.len() - 1;
    let gamma = 4.0 * n as f64 * f64::EPSILON;
    let (coeffs, y) = if x.norm() <= 1.0 { (a, x) } else { (rev, 1.0 / x) };
    let (p, dp) = horner2(coeffs, y);
    let bound: f64 = coeffs.iter().rev().fold(0.0, |acc, c| acc * y.norm() + c.norm());
    let r = n as f64 * (p.norm() + gamma * bound) / dp.norm();
    // |dy| ~ |dx| / |x|^2 in the reversed chart; both charts map to chordal
    // distance with the factor 1 / (1 + |y|^2)
    if r.is_finite() {
        r / (1.0 + y.norm_sqr())
    } else {
        1.0
    }
}

fn derivative(a: &[Complex64]) -> Vec<Complex64> {
    (1..a.len()).map(|j| a[j] * j as f64).collect()
}

/// A root of multiplicity `mu` is a simple root of the `(mu-1)`-th derivative.
fn polish_multiple(a: &[Complex64], rev: &[Complex64], x: Complex64, mu: usize) -> Complex64 {
    let far = x.norm() > 1.0;
    let mut q = if far { rev.to_vec() } else { a.to_vec() };
    for _ in 1..mu {
        q = derivative(&q);
    }
    let mut y = if far { 1.0 / x } else { x };
    let start = y;
    for _ in 0..4 {
        let (p, dp) = horner2(&q, y);
        let step = p / dp;
        if !step.is_finite() {
            break;
        }
        y -= step;
    }
    // keep the cluster mean if Newton wandered off
    if !y.is_finite() || (y - start).norm() > 1e-4 * (1.0 + start.norm()) {
        y = start;
    }
    if far {
        1.0 / y
    } else {
        y
    }
}

fn polish(a: &[Complex64], rev: &[Complex64], mut x: Complex64) -> Complex64 {
    for _ in 0..3 {
        let (ratio, _) = newton_ratio(a, rev, x);
        if !ratio.is_finite() {
            break;
        }
        x -= ratio;
        if ratio.norm() <= f64::EPSILON * x.norm() {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary_forms::form_from_divisor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cf(v: &[f64]) -> BinaryForm<Complex64> {
        BinaryForm::new(v.iter().map(|&x| c(x)).collect())
    }

    fn pt(s: f64, t: f64) -> PointP1<Complex64> {
        PointP1::new(c(s), c(t)).unwrap()
    }

    #[test]
    fn roots_examples() {
        let d = roots_of_form(&cf(&[0.0, 0.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(d.degree(), 4);
        assert_eq!(d.multiplicity_of(&pt(1.0, 0.0), 1e-12), 2);
        assert_eq!(d.multiplicity_of(&pt(0.0, 1.0), 1e-12), 2);
        // (s - 2t)(s + t)^2 = s^3 - 3 s t^2 - 2 t^3
        let d = roots_of_form(&cf(&[1.0, 0.0, -3.0, -2.0])).unwrap();
        assert_eq!(d.degree(), 3);
        assert_eq!(d.multiplicity_of(&pt(2.0, 1.0), 1e-8), 1);
        assert_eq!(d.multiplicity_of(&pt(-1.0, 1.0), 1e-8), 2, "{d:?}");
        assert!(matches!(roots_of_form(&cf(&[0.0, 0.0])), Err(Error::ZeroForm)));
    }

    fn random_divisor(rng: &mut ChaCha8Rng, deg: usize) -> DivisorP1<Complex64> {
        let mut pts = Vec::new();
        let mut left = deg;
        while left > 0 {
            let m = rng.random_range(1..=left.min(2));
            let p = if rng.random_bool(0.1) {
                PointP1::infinity()
            } else {
                PointP1::affine(Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
            };
            pts.push((p, m));
            left -= m;
        }
        DivisorP1::new(pts)
    }

    #[test]
    fn divisor_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for deg in [5usize, 6] {
            for _ in 0..200 {
                let d = random_divisor(&mut rng, deg);
                let f = form_from_divisor(&d).unwrap();
                let back = roots_of_form(&f).unwrap();
                assert_eq!(back.degree(), deg);
                // double roots only resolve to about sqrt(eps)
                let tol = if d.is_reduced() { 1e-8 } else { 1e-6 };
                assert!(back.approx_eq(&d, tol), "{d:?} vs {back:?}");
                let again = form_from_divisor(&back).unwrap();
                let err: f64 = again
                    .coeffs()
                    .iter()
                    .zip(f.coeffs())
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                assert!(err <= 1e-6 * f.norm(), "{err}");
            }
        }
    }

    #[test]
    fn degree_is_preserved_for_random_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..300 {
            let d = rng.random_range(1..=9);
            let f = BinaryForm::new(
                (0..=d)
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect(),
            );
            let div = roots_of_form(&f).unwrap();
            assert_eq!(div.degree(), d);
            for (p, _) in div.points() {
                let v = f.eval(p).norm();
                assert!(v <= 1e-9 * f.norm(), "{v}");
            }
        }
    }
}
