//! Scalar fields the library is generic over.
//!
//! Every container is parametrised by its field, so mixing an exact form with
//! a floating one is a type error. The dynamic JSON layer carries a
//! [`FieldKind`] tag and rejects mismatches at runtime.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Commutative ring with unit. Blanket-implemented.
pub trait Ring:
    Clone
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone
        + Debug
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Rational,
    Real,
    Complex,
}

impl std::fmt::Display for FieldKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FieldKind::Rational => "rational",
            FieldKind::Real => "real",
            FieldKind::Complex => "complex",
        };
        f.write_str(s)
    }
}

/// A field element: exact rational or floating (real or complex).
pub trait Scalar: Ring + PartialEq + Div<Output = Self> + Send + Sync + 'static {
    /// Exact fields test zero exactly; floating ones compare against a tolerance.
    const EXACT: bool;
    const KIND: FieldKind;

    /// Absolute value as a double (used for pivoting and thresholds).
    fn magnitude(&self) -> f64;

    fn from_i64(v: i64) -> Self;

    fn to_c64(&self) -> Complex64;

    /// Nearest field element to a double (exact fields convert exactly).
    fn from_f64_lossy(x: f64) -> Self;

    /// Zero test relative to `scale`. Exact fields ignore the tolerance.
    fn is_negligible(&self, scale: f64, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= tol * scale
        }
    }

    /// Evaluate `sum c_i x^i` (coeffs in ascending powers).
    fn horner(coeffs: &[Self], x: &Self) -> Self {
        let mut acc = Self::zero();
        for c in coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const KIND: FieldKind = FieldKind::Rational;

    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn from_f64_lossy(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(BigRational::zero)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const KIND: FieldKind = FieldKind::Real;

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }

    fn from_f64_lossy(x: f64) -> Self {
        x
    }

    fn horner(coeffs: &[Self], x: &Self) -> Self {
        compensated_horner_real(coeffs, *x)
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;
    const KIND: FieldKind = FieldKind::Complex;

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn from_f64_lossy(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }

    fn horner(coeffs: &[Self], x: &Self) -> Self {
        compensated_horner_complex(coeffs, *x)
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn compensated_horner_real(coeffs: &[f64], x: f64) -> f64 {
    let mut s = 0.0;
    let mut err = 0.0;
    for &c in coeffs.iter().rev() {
        let (p, pe) = two_prod(s, x);
        let (ns, se) = two_sum(p, c);
        s = ns;
        err = err * x + (pe + se);
    }
    s + err
}

/// Complex product split into a rounded value and its exact error terms.
#[inline]
fn two_prod_complex(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let (p1, e1) = two_prod(a.re, b.re);
    let (p2, e2) = two_prod(a.im, b.im);
    let (p3, e3) = two_prod(a.re, b.im);
    let (p4, e4) = two_prod(a.im, b.re);
    let (re, e5) = two_sum(p1, -p2);
    let (im, e6) = two_sum(p3, p4);
    (
        Complex64::new(re, im),
        Complex64::new(e1 - e2 + e5, e3 + e4 + e6),
    )
}

fn compensated_horner_complex(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    let mut err = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        let (p, pe) = two_prod_complex(s, x);
        let (re, e_re) = two_sum(p.re, c.re);
        let (im, e_im) = two_sum(p.im, c.im);
        s = Complex64::new(re, im);
        err = err * x + pe + Complex64::new(e_re, e_im);
    }
    s + err
}

/// Parse "p/q" or "p" into a reduced rational with positive denominator.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if d.is_zero() {
        return None;
    }
    // BigRational::new reduces and normalises the sign of the denominator
    Some(BigRational::new(n, d))
}

pub fn format_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_are_reduced_with_positive_denominator() {
        let q = parse_rational("6/-4").unwrap();
        assert_eq!(format_rational(&q), "-3/2");
        assert_eq!(parse_rational("7").unwrap(), rat(7, 1));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }

    #[test]
    fn compensated_horner_beats_cancellation() {
        // (x-1)^7 expanded, evaluated next to its root
        let c: [f64; 8] = [-1.0, 7.0, -21.0, 35.0, -35.0, 21.0, -7.0, 1.0];
        let x = 1.0 + 1e-3;
        let exact = 1e-21;
        let v = f64::horner(&c, &x);
        assert!((v - exact).abs() < 1e-26, "{v}");
        let z = Complex64::horner(
            &c.iter().map(|&r| Complex64::new(r, 0.0)).collect::<Vec<_>>(),
            &Complex64::new(x, 0.0),
        );
        assert!((z.re - exact).abs() < 1e-26 && z.im.abs() < 1e-26);
    }
}
