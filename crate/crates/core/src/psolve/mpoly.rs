use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

/// Sparse multivariate polynomial with complex coefficients.
///
/// Exponent vectors are stored with trailing zeros trimmed, so polynomials in
/// different numbers of variables combine freely; [`super::PolySystem`] fixes
/// the variable count.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MPoly {
    terms: BTreeMap<Vec<u32>, Complex64>,
}

fn trimmed(mut e: Vec<u32>) -> Vec<u32> {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

impl MPoly {
    pub fn from_terms(terms: impl IntoIterator<Item = (Vec<u32>, Complex64)>) -> Self {
        let mut p = MPoly::default();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn constant(c: Complex64) -> Self {
        MPoly::from_terms([(vec![], c)])
    }

    /// The variable `x_i`.
    pub fn var(i: usize) -> Self {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        MPoly::from_terms([(e, Complex64::new(1.0, 0.0))])
    }

    /// `c0 + sum c_i x_{offset + i}`
    pub fn affine_linear(c0: Complex64, coeffs: &[Complex64], offset: usize) -> Self {
        let mut p = MPoly::constant(c0);
        for (i, &c) in coeffs.iter().enumerate() {
            p = p + MPoly::var(offset + i) * MPoly::constant(c);
        }
        p
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let e = trimmed(e);
        let entry = self.terms.entry(e.clone()).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Number of variables actually occurring (highest index + 1).
    pub fn min_vars(&self) -> usize {
        self.terms.keys().map(|e| e.len()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        MPoly::from_terms(self.terms.iter().map(|(e, v)| (e.clone(), v * c)))
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .enumerate()
                    .fold(*c, |acc, (i, &k)| acc * x[i].powu(k))
            })
            .sum()
    }

    /// Sum of the term magnitudes at `x`, the scale for backward residuals.
    pub fn eval_abs(&self, x: &[Complex64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .enumerate()
                    .fold(c.norm(), |acc, (i, &k)| acc * x[i].norm().powi(k as i32))
            })
            .sum()
    }

    pub fn partial(&self, i: usize) -> Self {
        MPoly::from_terms(self.terms.iter().filter_map(|(e, c)| {
            let k = *e.get(i)?;
            if k == 0 {
                return None;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            Some((e2, c * k as f64))
        }))
    }

    /// Substitute `x_i -> subs[i]` for every variable.
    pub fn compose(&self, subs: &[MPoly]) -> MPoly {
        let mut out = MPoly::zero();
        for (e, c) in &self.terms {
            let mut term = MPoly::constant(*c);
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term = term * subs[i].clone();
                }
            }
            out = out + term;
        }
        out
    }
}

impl Zero for MPoly {
    fn zero() -> Self {
        MPoly::default()
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for MPoly {
    fn one() -> Self {
        MPoly::constant(Complex64::new(1.0, 0.0))
    }
}

impl Add for MPoly {
    type Output = MPoly;

    fn add(mut self, rhs: MPoly) -> MPoly {
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl Sub for MPoly {
    type Output = MPoly;

    fn sub(self, rhs: MPoly) -> MPoly {
        self + (-rhs)
    }
}

impl Neg for MPoly {
    type Output = MPoly;

    fn neg(self) -> MPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for MPoly {
    type Output = MPoly;

    fn mul(self, rhs: MPoly) -> MPoly {
        let mut out = MPoly::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let n = ea.len().max(eb.len());
                let e: Vec<u32> = (0..n)
                    .map(|i| ea.get(i).copied().unwrap_or(0) + eb.get(i).copied().unwrap_or(0))
                    .collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn arithmetic_and_eval() {
        let x = MPoly::var(0);
        let y = MPoly::var(1);
        let p = (x.clone() + y.clone()) * (x.clone() - y.clone());
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.total_degree(), 2);
        let v = p.eval(&[c(3.0), c(2.0)]);
        assert_eq!(v, c(5.0));
        let dx = p.partial(0);
        assert_eq!(dx.eval(&[c(3.0), c(2.0)]), c(6.0));
        let q = p.compose(&[y.clone(), x.clone()]);
        assert_eq!(q.eval(&[c(3.0), c(2.0)]), c(-5.0));
        assert!((p.clone() - p).is_zero());
    }
}
