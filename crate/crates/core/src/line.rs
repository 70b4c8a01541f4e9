//! Lines in projective 3-space.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{nullspace, rank_by_elimination};
use crate::scalar::Scalar;

/// Index pairs of the Plücker coordinates, in storage order.
pub const PLUCKER_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// A line given by two spanning points, with its dual frame (two independent
/// linear forms cutting it out) and Plücker coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct LineP3<T> {
    frame: [[T; 4]; 2],
    dual: [[T; 4]; 2],
    plucker: [T; 6],
}

fn tol_for<T: Scalar>() -> f64 {
    if T::EXACT {
        0.0
    } else {
        1e-12
    }
}

fn to_arr<T: Scalar>(v: &[T]) -> [T; 4] {
    [v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()]
}

fn plucker_of<T: Scalar>(p: &[T; 4], q: &[T; 4]) -> [T; 6] {
    let e = |(i, j): (usize, usize)| p[i].clone() * q[j].clone() - p[j].clone() * q[i].clone();
    [
        e(PLUCKER_PAIRS[0]),
        e(PLUCKER_PAIRS[1]),
        e(PLUCKER_PAIRS[2]),
        e(PLUCKER_PAIRS[3]),
        e(PLUCKER_PAIRS[4]),
        e(PLUCKER_PAIRS[5]),
    ]
}

impl<T: Scalar> LineP3<T> {
    /// The line through two distinct points.
    pub fn from_points(p: [T; 4], q: [T; 4]) -> Result<Self> {
        let rows = vec![p.to_vec(), q.to_vec()];
        if rank_by_elimination(&rows, tol_for::<T>()) < 2 {
            return Err(Error::InvalidParameters("line needs two distinct points".into()));
        }
        let ns = nullspace(&rows, 4, tol_for::<T>());
        let dual = [to_arr(&ns[0]), to_arr(&ns[1])];
        let plucker = plucker_of(&p, &q);
        Ok(LineP3 {
            frame: [p, q],
            dual,
            plucker,
        })
    }

    /// The common zero set of two independent linear forms.
    pub fn from_dual(a: [T; 4], b: [T; 4]) -> Result<Self> {
        let rows = vec![a.to_vec(), b.to_vec()];
        if rank_by_elimination(&rows, tol_for::<T>()) < 2 {
            return Err(Error::InvalidParameters("dependent linear forms".into()));
        }
        let ns = nullspace(&rows, 4, tol_for::<T>());
        let (p, q) = (to_arr(&ns[0]), to_arr(&ns[1]));
        let plucker = plucker_of(&p, &q);
        Ok(LineP3 {
            frame: [p, q],
            dual: [a, b],
            plucker,
        })
    }

    pub fn frame(&self) -> &[[T; 4]; 2] {
        &self.frame
    }

    pub fn dual_frame(&self) -> &[[T; 4]; 2] {
        &self.dual
    }

    pub fn plucker(&self) -> &[T; 6] {
        &self.plucker
    }

    /// `p01 p23 - p02 p13 + p03 p12`, relative to `|p|^2`.
    pub fn plucker_residual(&self) -> f64 {
        let p = &self.plucker;
        let v = p[0].clone() * p[5].clone() - p[1].clone() * p[4].clone() + p[2].clone() * p[3].clone();
        let n: f64 = p.iter().map(|x| x.magnitude().powi(2)).sum();
        if n == 0.0 {
            0.0
        } else {
            v.magnitude() / n
        }
    }

    /// Largest relative value of the dual forms on the frame points.
    pub fn frame_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.dual {
            for p in &self.frame {
                let v = dot(a, p).magnitude();
                let s = norm4(a) * norm4(p);
                if s > 0.0 {
                    worst = worst.max(v / s);
                }
            }
        }
        worst
    }

    /// Relative incidence `max |<a, x>| / (|a||x|)` over the dual frame.
    pub fn point_distance(&self, x: &[T; 4]) -> f64 {
        self.dual
            .iter()
            .map(|a| dot(a, x).magnitude() / (norm4(a) * norm4(x)))
            .fold(0.0, f64::max)
    }

    /// Image under the point transformation `x -> M x`.
    pub fn transform(&self, m: &[[T; 4]; 4]) -> Result<Self> {
        let apply = |p: &[T; 4]| -> [T; 4] {
            let mut out = [T::zero(), T::zero(), T::zero(), T::zero()];
            for (i, row) in m.iter().enumerate() {
                out[i] = dot(row, p);
            }
            out
        };
        LineP3::from_points(apply(&self.frame[0]), apply(&self.frame[1]))
    }

    pub fn to_c64(&self) -> LineP3<Complex64> {
        let c4 = |p: &[T; 4]| [p[0].to_c64(), p[1].to_c64(), p[2].to_c64(), p[3].to_c64()];
        let c6 = |p: &[T; 6]| {
            [
                p[0].to_c64(),
                p[1].to_c64(),
                p[2].to_c64(),
                p[3].to_c64(),
                p[4].to_c64(),
                p[5].to_c64(),
            ]
        };
        LineP3 {
            frame: [c4(&self.frame[0]), c4(&self.frame[1])],
            dual: [c4(&self.dual[0]), c4(&self.dual[1])],
            plucker: c6(&self.plucker),
        }
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T; 4], b: &[T; 4]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

fn norm4<T: Scalar>(a: &[T; 4]) -> f64 {
    a.iter().map(|x| x.magnitude().powi(2)).sum::<f64>().sqrt()
}

impl LineP3<Complex64> {
    /// Plücker vector scaled to unit norm with its largest entry real positive.
    pub fn normalized_plucker(&self) -> [Complex64; 6] {
        let p = self.plucker;
        let (imax, _) = p
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, v)| if v.norm() > acc.1 { (i, v.norm()) } else { acc });
        let n: f64 = p.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let phase = p[imax] / p[imax].norm();
        p.map(|v| v / (phase * n))
    }

    /// Equality as lines within `tol` in normalised Plücker coordinates.
    pub fn same_line(&self, other: &Self, tol: f64) -> bool {
        let a = self.normalized_plucker();
        let b = other.normalized_plucker();
        a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_rational::BigRational;

    fn q4(v: [i64; 4]) -> [BigRational; 4] {
        v.map(|x| rat(x, 1))
    }

    #[test]
    fn exact_line_invariants() {
        let l = LineP3::from_points(q4([1, 2, 0, -1]), q4([0, 1, 3, 2])).unwrap();
        assert_eq!(l.plucker_residual(), 0.0);
        assert_eq!(l.frame_residual(), 0.0);
        let m = LineP3::from_dual(l.dual_frame()[0].clone(), l.dual_frame()[1].clone()).unwrap();
        assert!(m.to_c64().same_line(&l.to_c64(), 1e-12));
        assert!(LineP3::from_points(q4([1, 2, 0, -1]), q4([2, 4, 0, -2])).is_err());
    }

    #[test]
    fn complex_line_and_transform() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let p = [c(1.0, 0.5), c(0.0, 1.0), c(2.0, 0.0), c(-1.0, 0.0)];
        let q = [c(0.0, 0.0), c(1.0, 0.0), c(0.5, -0.5), c(1.0, 1.0)];
        let l = LineP3::from_points(p, q).unwrap();
        assert!(l.plucker_residual() < 1e-14);
        assert!(l.frame_residual() < 1e-14);
        // a different frame of the same line
        let p2 = [0, 1, 2, 3].map(|i| p[i] * c(2.0, 1.0) + q[i] * c(-1.0, 0.0));
        let l2 = LineP3::from_points(p2, q).unwrap();
        assert!(l.same_line(&l2, 1e-12));
        let m = [
            [c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            [c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ];
        let t = l.transform(&m).unwrap();
        assert!(t.plucker_residual() < 1e-14);
    }
}
