//! Homogeneous polynomials in two variables and divisors on the projective line.
//!
//! A form of degree `d` stores `d + 1` coefficients; index `i` holds the
//! coefficient of `s^(d-i) t^i`. The point `[1:0]` is a root exactly when the
//! leading coefficient vanishes.

mod gcd;
mod json;
mod roots;

pub use gcd::{
    gcd_degree, gcd_degree_euclid, gcd_degree_subresultant, gcd_form_exact,
    principal_subresultants, SUBRESULTANT_ZERO_TOL,
};
pub use json::{AnyForm, AnyPoint, AnyScalar, FormJson, JsonScalar};
pub use roots::{roots_of_form, DEDUP_TOL};

use std::fmt;

use num_complex::Complex64;
use num_traits::One;

use crate::error::{Error, Result};
use crate::scalar::{Ring, Scalar};

/// Point `[s:t]` of the projective line.
#[derive(Clone, Debug, PartialEq)]
pub struct PointP1<T> {
    s: T,
    t: T,
}

impl<T: Scalar> PointP1<T> {
    pub fn new(s: T, t: T) -> Result<Self> {
        if s.is_zero() && t.is_zero() {
            return Err(Error::InvalidParameters("[0:0] is not a point".into()));
        }
        Ok(PointP1 { s, t })
    }

    /// `[x:1]`
    pub fn affine(x: T) -> Self {
        PointP1 { s: x, t: T::one() }
    }

    pub fn infinity() -> Self {
        PointP1 {
            s: T::one(),
            t: T::zero(),
        }
    }

    pub fn s(&self) -> &T {
        &self.s
    }

    pub fn t(&self) -> &T {
        &self.t
    }

    /// Canonical representative: first nonzero coordinate is 1 for exact
    /// fields, largest-magnitude coordinate is 1 for floating ones.
    pub fn canonical(&self) -> Self {
        let use_s = if T::EXACT {
            !self.s.is_zero()
        } else {
            self.s.magnitude() >= self.t.magnitude()
        };
        if use_s {
            PointP1 {
                s: T::one(),
                t: self.t.clone() / self.s.clone(),
            }
        } else {
            PointP1 {
                s: self.s.clone() / self.t.clone(),
                t: T::one(),
            }
        }
    }

    /// Chordal distance `|s1 t2 - s2 t1| / (|p1| |p2|)`, in `[0, 1]`.
    pub fn chordal_distance(&self, other: &Self) -> f64 {
        let cross = (self.s.clone() * other.t.clone() - other.s.clone() * self.t.clone()).magnitude();
        let n1 = self.s.magnitude().hypot(self.t.magnitude());
        let n2 = other.s.magnitude().hypot(other.t.magnitude());
        cross / (n1 * n2)
    }

    /// Equality of canonical forms; floating fields compare within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if T::EXACT {
            self.canonical() == other.canonical()
        } else {
            self.chordal_distance(other) <= tol
        }
    }

    /// Linear form `t0 s - s0 t` vanishing exactly at this point.
    pub fn vanishing_form(&self) -> BinaryForm<T> {
        BinaryForm::new(vec![self.t.clone(), -self.s.clone()])
    }

    pub fn to_c64(&self) -> PointP1<Complex64> {
        PointP1 {
            s: self.s.to_c64(),
            t: self.t.to_c64(),
        }
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for PointP1<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{}]", self.s, self.t)
    }
}

/// Homogeneous form in `s, t`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryForm<T> {
    coeffs: Vec<T>,
}

impl<T: Ring> BinaryForm<T> {
    /// # Panics
    /// Panics on an empty coefficient list (a form has at least one coefficient).
    pub fn new(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a binary form needs degree + 1 coefficients");
        BinaryForm { coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        BinaryForm {
            coeffs: vec![T::zero(); degree + 1],
        }
    }

    pub fn constant(c: T) -> Self {
        BinaryForm { coeffs: vec![c] }
    }

    /// `c * s^(d-i) t^i`
    pub fn monomial(degree: usize, i: usize, c: T) -> Self {
        let mut f = Self::zero(degree);
        f.coeffs[i] = c;
        f
    }

    /// `a s + b t`
    pub fn linear(a: T, b: T) -> Self {
        BinaryForm { coeffs: vec![a, b] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Exactly the zero form.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> BinaryForm<U> {
        BinaryForm {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        BinaryForm { coeffs: out }
    }

    /// # Panics
    /// Panics when the degrees differ.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.degree(), other.degree(), "adding forms of different degree");
        BinaryForm {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-T::one()))
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|a| a.clone() * c.clone())
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = BinaryForm::constant(T::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitute `s -> a s + b t`, `t -> c s + d t`.
    pub fn substitute(&self, m: &[[T; 2]; 2]) -> Self {
        let d = self.degree();
        let ls = BinaryForm::linear(m[0][0].clone(), m[0][1].clone());
        let lt = BinaryForm::linear(m[1][0].clone(), m[1][1].clone());
        let spow: Vec<Self> = (0..=d).map(|e| ls.pow(e)).collect();
        let tpow: Vec<Self> = (0..=d).map(|e| lt.pow(e)).collect();
        let mut out = Self::zero(d);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out = out.add(&spow[d - i].mul(&tpow[i]).scale(c));
        }
        out
    }

    /// Partial derivative in `s` (degree drops by one; degree-0 forms give 0).
    pub fn ds(&self) -> Self {
        let d = self.degree();
        if d == 0 {
            return Self::zero(0);
        }
        let coeffs = (0..d)
            .map(|i| self.coeffs[i].clone() * small_int::<T>(d - i))
            .collect();
        BinaryForm { coeffs }
    }

    pub fn dt(&self) -> Self {
        let d = self.degree();
        if d == 0 {
            return Self::zero(0);
        }
        let coeffs = (0..d)
            .map(|i| self.coeffs[i + 1].clone() * small_int::<T>(i + 1))
            .collect();
        BinaryForm { coeffs }
    }
}

pub(crate) fn small_int<T: Ring>(n: usize) -> T {
    let mut acc = T::zero();
    for _ in 0..n {
        acc = acc + T::one();
    }
    acc
}

impl<T: Scalar> BinaryForm<T> {
    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.magnitude().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// All coefficients below `tol * scale` (exact fields: exactly zero).
    pub fn is_negligible(&self, scale: f64, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.is_negligible(scale, tol))
    }

    /// The quotient `self / d` when `d` divides `self` (floating fields: up to
    /// a remainder below `1e-10` of the norm).
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let p = d.coeffs.iter().position(|c| !c.is_zero())?;
        if d.degree() > self.degree() {
            return None;
        }
        let n = self.degree() - d.degree();
        let mut q: Vec<T> = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let mut acc = self.coeffs.get(i + p).cloned().unwrap_or_else(T::zero);
            for (j, qj) in q.iter().enumerate() {
                if let Some(dc) = d.coeffs.get(i + p - j) {
                    acc = acc - qj.clone() * dc.clone();
                }
            }
            q.push(acc / d.coeffs[p].clone());
        }
        let q = BinaryForm { coeffs: q };
        let rem = self.sub(&q.mul(d));
        rem.is_negligible(self.norm().max(f64::MIN_POSITIVE), 1e-10).then_some(q)
    }

    /// Divide by the first nonzero coefficient.
    pub fn normalized_leading(&self) -> Result<Self> {
        let lead = self
            .coeffs
            .iter()
            .find(|c| !c.is_zero())
            .ok_or(Error::ZeroForm)?
            .clone();
        Ok(self.map(|c| c.clone() / lead.clone()))
    }

    /// Scale to unit coefficient norm (floating fields only make sense here).
    pub fn unit(&self) -> Result<BinaryForm<Complex64>> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroForm);
        }
        Ok(self.map(|c| c.to_c64() / n))
    }

    /// Number of leading coefficients that vanish exactly: the multiplicity of `[1:0]`.
    pub fn multiplicity_at_infinity(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// Dehomogenize at `t = 1`: ascending coefficients in `x = s/t`, trailing
    /// exact zeros (the root at infinity) removed.
    pub fn dehomogenize(&self) -> Vec<T> {
        let mut a: Vec<T> = self.coeffs.iter().rev().cloned().collect();
        while a.len() > 1 && a.last().is_some_and(|c| c.is_zero()) {
            a.pop();
        }
        a
    }

    /// Value at `p` by compensated Horner in the better-conditioned chart.
    pub fn eval(&self, p: &PointP1<T>) -> T {
        let d = self.degree();
        let use_s = if T::EXACT {
            !p.s.is_zero()
        } else {
            p.s.magnitude() >= p.t.magnitude()
        };
        if use_s {
            // s^d * sum c_i r^i, r = t/s
            let r = p.t.clone() / p.s.clone();
            let v = T::horner(&self.coeffs, &r);
            v * pow_scalar(&p.s, d)
        } else {
            let x = p.s.clone() / p.t.clone();
            let asc: Vec<T> = self.coeffs.iter().rev().cloned().collect();
            T::horner(&asc, &x) * pow_scalar(&p.t, d)
        }
    }

    /// `f o M` for an invertible 2x2 matrix.
    pub fn mobius(&self, m: &[[T; 2]; 2]) -> Result<Self> {
        let det = m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone();
        let scale = m
            .iter()
            .flat_map(|r| r.iter().map(|x| x.magnitude()))
            .fold(0.0, f64::max);
        if det.is_negligible(scale * scale, 1e-14) {
            return Err(Error::InvalidParameters("singular Mobius matrix".into()));
        }
        Ok(self.substitute(m))
    }

    pub fn to_c64(&self) -> BinaryForm<Complex64> {
        self.map(|c| c.to_c64())
    }
}

/// Free-function form of [`BinaryForm::eval`].
pub fn eval_form<T: Scalar>(f: &BinaryForm<T>, p: &PointP1<T>) -> T {
    f.eval(p)
}

/// Free-function form of [`BinaryForm::mobius`].
pub fn mobius_transform<T: Scalar>(f: &BinaryForm<T>, m: &[[T; 2]; 2]) -> Result<BinaryForm<T>> {
    f.mobius(m)
}

pub(crate) fn pow_scalar<T: Ring>(x: &T, e: usize) -> T {
    let mut acc = T::one();
    for _ in 0..e {
        acc = acc * x.clone();
    }
    acc
}

/// Effective divisor on the projective line.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorP1<T> {
    points: Vec<(PointP1<T>, usize)>,
}

impl<T: Scalar> DivisorP1<T> {
    pub fn empty() -> Self {
        DivisorP1 { points: vec![] }
    }

    /// Merge coincident points (within [`DEDUP_TOL`] for floating fields) and
    /// drop zero multiplicities.
    pub fn new(points: Vec<(PointP1<T>, usize)>) -> Self {
        let mut out: Vec<(PointP1<T>, usize)> = Vec::new();
        for (p, m) in points {
            if m == 0 {
                continue;
            }
            let p = p.canonical();
            match out.iter_mut().find(|(q, _)| q.approx_eq(&p, DEDUP_TOL)) {
                Some((_, mm)) => *mm += m,
                None => out.push((p, m)),
            }
        }
        DivisorP1 { points: out }
    }

    pub fn points(&self) -> &[(PointP1<T>, usize)] {
        &self.points
    }

    pub fn degree(&self) -> usize {
        self.points.iter().map(|(_, m)| m).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.points.iter().all(|(_, m)| *m == 1)
    }

    pub fn multiplicity_of(&self, p: &PointP1<T>, tol: f64) -> usize {
        self.points
            .iter()
            .find(|(q, _)| q.approx_eq(p, tol))
            .map_or(0, |(_, m)| *m)
    }

    /// `other <= self` pointwise.
    pub fn contains(&self, other: &Self, tol: f64) -> bool {
        other
            .points
            .iter()
            .all(|(p, m)| self.multiplicity_of(p, tol) >= *m)
    }

    /// Same points with the same multiplicities.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.degree() == other.degree() && self.contains(other, tol) && other.contains(self, tol)
    }

    /// The form of degree `deg D` whose divisor is exactly `D`, leading
    /// nonzero coefficient normalised to 1.
    pub fn to_form(&self) -> Result<BinaryForm<T>> {
        form_from_divisor(self)
    }

    pub fn to_c64(&self) -> DivisorP1<Complex64> {
        DivisorP1::new(self.points.iter().map(|(p, m)| (p.to_c64(), *m)).collect())
    }
}

/// Product of the vanishing linear forms, normalised.
pub fn form_from_divisor<T: Scalar>(d: &DivisorP1<T>) -> Result<BinaryForm<T>> {
    if d.is_empty() {
        return Err(Error::InvalidParameters("empty divisor".into()));
    }
    let mut f = BinaryForm::constant(T::one());
    for (p, m) in &d.points {
        f = f.mul(&p.vanishing_form().pow(*m));
    }
    f.normalized_leading()
}

impl<T: Ring + One> Default for BinaryForm<T> {
    fn default() -> Self {
        BinaryForm::constant(T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Q = BigRational;

    fn q(v: &[i64]) -> BinaryForm<Q> {
        BinaryForm::new(v.iter().map(|&x| rat(x, 1)).collect())
    }

    fn qp(s: i64, t: i64) -> PointP1<Q> {
        PointP1::new(rat(s, 1), rat(t, 1)).unwrap()
    }

    #[test]
    fn eval_planted_root_and_monomials() {
        // s^2 t - t^3
        let f = q(&[0, 1, 0, -1]);
        assert_eq!(f.eval(&qp(1, 1)), rat(0, 1));
        let s5 = q(&[1, 0, 0, 0, 0, 0]);
        assert_eq!(s5.eval(&qp(0, 1)), rat(0, 1));
        assert_eq!(s5.eval(&qp(1, 0)), rat(1, 1));
    }

    #[test]
    fn eval_matches_direct_monomial_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let c: Vec<Complex64> = (0..6)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let f = BinaryForm::new(c.clone());
            let s = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let t = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let direct: Complex64 = (0..6).map(|i| c[i] * s.powu(5 - i as u32) * t.powu(i as u32)).sum();
            let mag: f64 = (0..6)
                .map(|i| c[i].norm() * s.norm().powi(5 - i as i32) * t.norm().powi(i as i32))
                .sum();
            let v = f.eval(&PointP1::new(s, t).unwrap());
            assert!((v - direct).norm() <= 1e-12 * mag, "{v} vs {direct}");
        }
    }

    #[test]
    fn canonical_forms() {
        let p = qp(2, 4).canonical();
        assert_eq!(p, PointP1::new(rat(1, 1), rat(2, 1)).unwrap());
        let z = qp(0, 3).canonical();
        assert_eq!(z, qp(0, 1));
        let c = PointP1::new(Complex64::new(0.5, 0.0), Complex64::new(0.0, 2.0)).unwrap();
        let cc = c.canonical();
        assert_eq!(cc.t(), &Complex64::new(1.0, 0.0));
        assert!(PointP1::<Q>::new(rat(0, 1), rat(0, 1)).is_err());
    }

    #[test]
    fn form_from_divisor_examples() {
        let d = DivisorP1::new(vec![(PointP1::infinity(), 1), (qp(0, 1), 1)]);
        assert_eq!(form_from_divisor(&d).unwrap(), q(&[0, 1, 0]));
        let d3 = DivisorP1::new(vec![(qp(1, 1), 3)]);
        // (s - t)^3
        assert_eq!(form_from_divisor(&d3).unwrap(), q(&[1, -3, 3, -1]));
        assert!(form_from_divisor(&DivisorP1::<Q>::empty()).is_err());
    }

    #[test]
    fn divisor_merges_equal_points() {
        let d = DivisorP1::new(vec![(qp(1, 2), 1), (qp(2, 4), 2), (qp(1, 0), 1)]);
        assert_eq!(d.points().len(), 2);
        assert_eq!(d.degree(), 4);
        assert!(!d.is_reduced());
    }

    #[test]
    fn mobius_examples() {
        let f = q(&[2, -1, 5, 3]);
        let id = [[rat(1, 1), rat(0, 1)], [rat(0, 1), rat(1, 1)]];
        assert_eq!(f.mobius(&id).unwrap(), f);
        // swap s and t on s^3 t
        let s3t = q(&[0, 1, 0, 0, 0]);
        let swap = [[rat(0, 1), rat(1, 1)], [rat(1, 1), rat(0, 1)]];
        assert_eq!(s3t.mobius(&swap).unwrap(), q(&[0, 0, 0, 1, 0]));
        let sing = [[rat(1, 1), rat(2, 1)], [rat(2, 1), rat(4, 1)]];
        assert!(f.mobius(&sing).is_err());
    }

    #[test]
    fn derivatives_satisfy_euler() {
        let f = q(&[3, -2, 0, 7]);
        let s = q(&[1, 0]);
        let t = q(&[0, 1]);
        let lhs = s.mul(&f.ds()).add(&t.mul(&f.dt()));
        assert_eq!(lhs, f.scale(&rat(3, 1)));
    }
}
