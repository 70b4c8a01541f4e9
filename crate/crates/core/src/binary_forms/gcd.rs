use num_complex::Complex64;

use super::BinaryForm;
use crate::error::{Error, Result};
use crate::linalg::determinant;
use crate::scalar::Scalar;

/// A subresultant counts as zero below this fraction of its Hadamard bound.
pub const SUBRESULTANT_ZERO_TOL: f64 = 1e-8;

fn check_nonzero<T: Scalar>(f: &BinaryForm<T>, g: &BinaryForm<T>) -> Result<()> {
    if f.is_zero() || g.is_zero() {
        return Err(Error::ZeroForm);
    }
    Ok(())
}

/// Remainder of `a` modulo `b`, ascending coefficients, exact zero test.
fn poly_rem<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lb = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let q = r[dr].clone() / lb.clone();
        for i in 0..=db {
            let v = b[i].clone() * q.clone();
            r[dr - db + i] = r[dr - db + i].clone() - v;
        }
        r.pop();
        trim(&mut r);
    }
    trim(&mut r);
    r
}

fn trim<T: Scalar>(v: &mut Vec<T>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

fn poly_gcd<T: Scalar>(a: Vec<T>, b: Vec<T>) -> Vec<T> {
    let (mut a, mut b) = (a, b);
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

/// The gcd as a form (up to scale), by Euclid on the `t = 1` chart plus the
/// shared power of `t`. Meant for exact fields.
pub fn gcd_form_exact<T: Scalar>(f: &BinaryForm<T>, g: &BinaryForm<T>) -> Result<BinaryForm<T>> {
    check_nonzero(f, g)?;
    let mu = f.multiplicity_at_infinity().min(g.multiplicity_at_infinity());
    let p = poly_gcd(f.dehomogenize(), g.dehomogenize());
    let mut coeffs = vec![T::zero(); mu];
    coeffs.extend(p.into_iter().rev());
    BinaryForm::new(coeffs).normalized_leading()
}

/// Degree of the gcd by the Euclidean algorithm.
pub fn gcd_degree_euclid<T: Scalar>(f: &BinaryForm<T>, g: &BinaryForm<T>) -> Result<usize> {
    Ok(gcd_form_exact(f, g)?.degree())
}

/// `sres_0, ..., sres_{min(m,n)-1}` of the homogeneous Sylvester matrix.
pub fn principal_subresultants<T: Scalar>(f: &BinaryForm<T>, g: &BinaryForm<T>) -> Result<Vec<T>> {
    check_nonzero(f, g)?;
    let (m, n) = (f.degree(), g.degree());
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameters(
            "subresultants need forms of positive degree".into(),
        ));
    }
    Ok((0..m.min(n)).map(|j| subresultant(f, g, j)).collect())
}

fn subresultant<T: Scalar>(f: &BinaryForm<T>, g: &BinaryForm<T>, j: usize) -> T {
    let (m, n) = (f.degree(), g.degree());
    let size = m + n - 2 * j;
    let mut rows = Vec::with_capacity(size);
    for (coeffs, deg, copies) in [(f.coeffs(), m, n - j), (g.coeffs(), n, m - j)] {
        for i in 0..copies {
            let mut row = vec![T::zero(); size];
            for k in 0..=deg {
                if i + k < size {
                    row[i + k] = coeffs[k].clone();
                }
            }
            rows.push(row);
        }
    }
    determinant(&rows)
}

/// Move `[1:0]` off the zero sets so that both leading coefficients are
/// usable: an integer shear for exact fields, a real rotation otherwise.
fn prepare<T: Scalar>(f: &BinaryForm<T>, g: &BinaryForm<T>) -> (BinaryForm<T>, BinaryForm<T>) {
    if T::EXACT {
        let mut lambda = 0i64;
        for step in 0..(f.degree() + g.degree() + 2) as i64 {
            lambda = if step % 2 == 0 { step / 2 } else { -(step + 1) / 2 };
            let l = T::from_i64(lambda);
            let p = super::PointP1::new(T::one(), l).unwrap();
            if !f.eval(&p).is_zero() && !g.eval(&p).is_zero() {
                break;
            }
        }
        if lambda == 0 {
            return (f.clone(), g.clone());
        }
        let m = [[T::one(), T::zero()], [T::from_i64(lambda), T::one()]];
        return (f.substitute(&m), g.substitute(&m));
    }
    let fc = f.to_c64();
    let gc = g.to_c64();
    let (nf, ng) = (fc.norm(), gc.norm());
    let quality = |c: f64, s: f64| {
        let p = super::PointP1::new(Complex64::new(c, 0.0), Complex64::new(s, 0.0)).unwrap();
        (fc.eval(&p).norm() / nf).min(gc.eval(&p).norm() / ng)
    };
    let base = quality(1.0, 0.0);
    if base >= 0.1 {
        return (f.clone(), g.clone());
    }
    let mut best = (base, 0.0);
    for k in 1..48 {
        let theta = std::f64::consts::PI * (k as f64) / 48.0 + 0.0123;
        let q = quality(theta.cos(), theta.sin());
        if q > best.0 {
            best = (q, theta);
        }
    }
    let (c, s) = (best.1.cos(), best.1.sin());
    let m = [
        [T::from_f64_lossy(c), T::from_f64_lossy(-s)],
        [T::from_f64_lossy(s), T::from_f64_lossy(c)],
    ];
    (f.substitute(&m), g.substitute(&m))
}

/// Degree of the gcd from the vanishing pattern of principal subresultants.
///
/// Over floating fields `sres_j` counts as zero below
/// `SUBRESULTANT_ZERO_TOL * |f|^(n-j) * |g|^(m-j)`; a value within one decade of
/// that threshold is reported as ambiguous.
pub fn gcd_degree_subresultant<T: Scalar>(f: &BinaryForm<T>, g: &BinaryForm<T>) -> Result<usize> {
    check_nonzero(f, g)?;
    let (m, n) = (f.degree(), g.degree());
    if m == 0 || n == 0 {
        return Ok(0);
    }
    let (f, g) = prepare(f, g);
    let (nf, ng) = (f.norm(), g.norm());
    for j in 0..m.min(n) {
        let v = subresultant(&f, &g, j);
        if T::EXACT {
            if !v.is_zero() {
                return Ok(j);
            }
            continue;
        }
        let thr = SUBRESULTANT_ZERO_TOL * nf.powi((n - j) as i32) * ng.powi((m - j) as i32);
        let mag = v.magnitude();
        if mag >= 0.1 * thr && mag < 10.0 * thr {
            return Err(Error::AmbiguousThreshold {
                context: "subresultant gcd degree",
                value: mag,
                threshold: thr,
            });
        }
        if mag >= thr {
            return Ok(j);
        }
    }
    Ok(m.min(n))
}

/// Euclid for exact fields, subresultants for floating ones.
pub fn gcd_degree<T: Scalar>(f: &BinaryForm<T>, g: &BinaryForm<T>) -> Result<usize> {
    if T::EXACT {
        gcd_degree_euclid(f, g)
    } else {
        gcd_degree_subresultant(f, g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary_forms::PointP1;
    use crate::scalar::rat;
    use num_rational::BigRational;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Q = BigRational;

    fn q(v: &[i64]) -> BinaryForm<Q> {
        BinaryForm::new(v.iter().map(|&x| rat(x, 1)).collect())
    }

    fn random_q(rng: &mut ChaCha8Rng, d: usize) -> BinaryForm<Q> {
        loop {
            let f = BinaryForm::new((0..=d).map(|_| rat(rng.random_range(-9..=9), 1)).collect());
            if !f.is_zero() {
                return f;
            }
        }
    }

    /// Resultant by the remainder recursion
    /// `Res(a, b) = (-1)^(deg a deg b) lc(b)^(deg a - deg r) Res(b, r)`,
    /// independent of any determinant.
    fn resultant_oracle(a: &[Q], b: &[Q]) -> Q {
        let (da, db) = (a.len() - 1, b.len() - 1);
        if db == 0 {
            return super::super::pow_scalar(&b[0], da);
        }
        let r = poly_rem(a, b);
        if r.is_empty() {
            return rat(0, 1);
        }
        let dr = r.len() - 1;
        let sign = if (da * db) % 2 == 1 { rat(-1, 1) } else { rat(1, 1) };
        sign * super::super::pow_scalar(&b[db], da - dr) * resultant_oracle(b, &r)
    }

    #[test]
    fn gcd_examples() {
        let s2t = q(&[0, 1, 0]);
        let st2 = q(&[0, 0, 1]);
        assert_eq!(gcd_degree(&s2t, &st2).unwrap(), 1);
        // degree-3 forms s^2 t and s t^2
        let a = q(&[0, 1, 0, 0]);
        let b = q(&[0, 0, 1, 0]);
        assert_eq!(gcd_degree(&a, &b).unwrap(), 2);
        assert_eq!(gcd_degree_subresultant(&a, &b).unwrap(), 2);
        let f = q(&[1, -2, 0, 3, 1, 5]);
        assert_eq!(gcd_degree(&f, &f).unwrap(), 5);
        assert_eq!(gcd_degree_subresultant(&f, &f).unwrap(), 5);
        assert!(matches!(gcd_degree(&f, &q(&[0, 0])), Err(Error::ZeroForm)));
    }

    #[test]
    fn planted_common_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = q(&[1, -1]);
        for _ in 0..20 {
            let u = random_q(&mut rng, 2);
            let v = random_q(&mut rng, 3);
            if gcd_degree_euclid(&u, &v).unwrap() != 0 || gcd_degree_euclid(&u, &c).unwrap() != 0 {
                continue;
            }
            let f = c.pow(3).mul(&u);
            let g = c.pow(2).mul(&v);
            assert_eq!(gcd_degree_euclid(&f, &g).unwrap(), 2);
            assert_eq!(gcd_degree_subresultant(&f, &g).unwrap(), 2);
            let fc = f.to_c64();
            let gc = g.to_c64();
            assert_eq!(gcd_degree(&fc, &gc).unwrap(), 2);
        }
    }

    #[test]
    fn subresultant_vanishing_pattern() {
        let f = q(&[1, 0, -1, 2]); // coprime to g below
        let g = q(&[1, 3, 1]);
        assert_eq!(gcd_degree_euclid(&f, &g).unwrap(), 0);
        assert_ne!(principal_subresultants(&f, &g).unwrap()[0], rat(0, 1));
        let h = q(&[1, 1, -2]);
        let a = h.mul(&q(&[1, 0, 1]));
        let b = h.mul(&q(&[2, -1, 0, 1]));
        let sres = principal_subresultants(&a, &b).unwrap();
        assert_eq!(gcd_degree_euclid(&a, &b).unwrap(), 2);
        assert_eq!(sres[0], rat(0, 1));
        assert_eq!(sres[1], rat(0, 1));
        assert_ne!(sres[2], rat(0, 1));
        let all = principal_subresultants(&a, &a).unwrap();
        assert!(all.iter().all(|v| *v == rat(0, 1)));
    }

    #[test]
    fn sres0_is_the_resultant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let m = rng.random_range(1..=5);
            let n = rng.random_range(1..=5);
            let mut f = random_q(&mut rng, m);
            let mut g = random_q(&mut rng, n);
            // the oracle works on actual degrees
            f = BinaryForm::new({
                let mut c = f.into_coeffs();
                if c[0] == rat(0, 1) {
                    c[0] = rat(1, 1);
                }
                c
            });
            g = BinaryForm::new({
                let mut c = g.into_coeffs();
                if c[0] == rat(0, 1) {
                    c[0] = rat(2, 1);
                }
                c
            });
            // descending in s and ascending in x = s/t are the same list reversed from t
            let fa: Vec<Q> = f.coeffs().iter().rev().cloned().collect();
            let ga: Vec<Q> = g.coeffs().iter().rev().cloned().collect();
            let oracle = resultant_oracle(&fa, &ga);
            let sres0 = principal_subresultants(&f, &g).unwrap()[0].clone();
            assert!(sres0 == oracle || sres0 == -oracle.clone(), "{sres0} vs {oracle}");
        }
    }

    #[test]
    fn euclid_matches_subresultant_on_1000_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..1000 {
            let k = trial % 6;
            let c = random_q(&mut rng, k);
            let (du, dv) = (rng.random_range(0..=4), rng.random_range(0..=4));
            let u = random_q(&mut rng, du);
            let v = random_q(&mut rng, dv);
            let (f, g) = (c.mul(&u), c.mul(&v));
            if f.degree() == 0 || g.degree() == 0 {
                continue;
            }
            let e = gcd_degree_euclid(&f, &g).unwrap();
            assert!(e >= k);
            assert_eq!(gcd_degree_subresultant(&f, &g).unwrap(), e, "trial {trial}");
        }
    }

    #[test]
    fn mobius_invariance_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let c = random_q(&mut rng, 2);
            let f = c.mul(&random_q(&mut rng, 3));
            let g = c.mul(&random_q(&mut rng, 2));
            let m = loop {
                let m = [
                    [rat(rng.random_range(-5..=5), 1), rat(rng.random_range(-5..=5), 1)],
                    [rat(rng.random_range(-5..=5), 1), rat(rng.random_range(-5..=5), 1)],
                ];
                if m[0][0].clone() * m[1][1].clone() != m[0][1].clone() * m[1][0].clone() {
                    break m;
                }
            };
            let before = gcd_degree_euclid(&f, &g).unwrap();
            let after = gcd_degree_euclid(&f.mobius(&m).unwrap(), &g.mobius(&m).unwrap()).unwrap();
            assert_eq!(before, after);
            let scaled = gcd_degree_euclid(&f.scale(&rat(-7, 3)), &g).unwrap();
            assert_eq!(before, scaled);
        }
    }

    #[test]
    fn point_at_infinity_in_both() {
        // t (s - t) and t^2 s
        let f = q(&[0, 1, -1]);
        let g = q(&[0, 0, 1, 0]);
        assert_eq!(gcd_degree_euclid(&f, &g).unwrap(), 1);
        assert_eq!(gcd_degree_subresultant(&f, &g).unwrap(), 1);
        assert_eq!(gcd_degree(&f.to_c64(), &g.to_c64()).unwrap(), 1);
        let _ = PointP1::<Q>::infinity();
    }

    proptest! {
        #[test]
        fn numeric_gcd_matches_exact(
            c in proptest::collection::vec(-6i64..=6, 1..4),
            u in proptest::collection::vec(-6i64..=6, 2..5),
            v in proptest::collection::vec(-6i64..=6, 2..5),
        ) {
            let (c, u, v) = (q(&c), q(&u), q(&v));
            prop_assume!(!c.is_zero() && !u.is_zero() && !v.is_zero());
            let (f, g) = (c.mul(&u), c.mul(&v));
            let e = gcd_degree_euclid(&f, &g).unwrap();
            match gcd_degree(&f.to_c64(), &g.to_c64()) {
                Ok(n) => prop_assert_eq!(n, e),
                Err(Error::AmbiguousThreshold { .. }) => {}
                Err(other) => prop_assert!(false, "{other}"),
            }
        }
    }
}
