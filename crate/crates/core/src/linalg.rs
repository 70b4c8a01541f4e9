//! Small dense linear algebra: exact elimination over any [`Scalar`] field and
//! SVD-based numerical rank for complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative singular-value cutoff used for numerical rank decisions.
pub const RANK_REL_CUTOFF: f64 = 1e-7;
/// A rank decision is trusted only when the singular values jump by this factor
/// across the cutoff.
pub const RANK_MIN_GAP: f64 = 1e3;

/// Row-echelon reduction in place. Returns the pivot columns.
///
/// Pivots are chosen by magnitude; for floating fields entries below
/// `tol * max|a|` are treated as zero.
fn row_echelon<T: Scalar>(m: &mut [Vec<T>], ncols: usize, tol: f64) -> Vec<usize> {
    let scale = m
        .iter()
        .flat_map(|r| r.iter().map(|x| x.magnitude()))
        .fold(0.0f64, f64::max);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == m.len() {
            break;
        }
        let (best, best_mag) = (row..m.len())
            .map(|r| (r, m[r][col].magnitude()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if m[best][col].is_negligible(scale, tol) || best_mag <= 0.0 {
            continue;
        }
        m.swap(row, best);
        let inv = T::one() / m[row][col].clone();
        for c in col..ncols {
            m[row][c] = m[row][c].clone() * inv.clone();
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..ncols {
                    let v = m[row][c].clone() * f.clone();
                    m[r][c] = m[r][c].clone() - v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Rank by elimination. Exact for exact fields; for floating fields prefer
/// [`numerical_rank`].
pub fn rank_by_elimination<T: Scalar>(rows: &[Vec<T>], tol: f64) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut m = rows.to_vec();
    row_echelon(&mut m, ncols, tol).len()
}

/// Basis of the right null space `{x : M x = 0}`.
pub fn nullspace<T: Scalar>(rows: &[Vec<T>], ncols: usize, tol: f64) -> Vec<Vec<T>> {
    let mut m = rows.to_vec();
    let pivots = row_echelon(&mut m, ncols, tol);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); ncols];
            v[f] = T::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Determinant by Gaussian elimination with magnitude pivoting.
pub fn determinant<T: Scalar>(rows: &[Vec<T>]) -> T {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut det = T::one();
    for col in 0..n {
        let best = (col..n)
            .max_by(|&a, &b| m[a][col].magnitude().total_cmp(&m[b][col].magnitude()))
            .unwrap();
        if m[best][col].is_zero() {
            return T::zero();
        }
        if best != col {
            m.swap(best, col);
            det = -det;
        }
        let piv = m[col][col].clone();
        det = det * piv.clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone() / piv.clone();
            for c in col..n {
                let v = m[col][c].clone() * f.clone();
                m[r][c] = m[r][c].clone() - v;
            }
        }
    }
    det
}

#[derive(Clone, Debug)]
pub struct RankReport {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// Ratio between the last kept and the first dropped singular value.
    /// Infinite when nothing is dropped or everything is.
    pub gap: f64,
}

impl RankReport {
    pub fn is_ambiguous(&self) -> bool {
        self.gap < RANK_MIN_GAP
    }
}

/// Numerical rank via SVD with a relative cutoff.
pub fn numerical_rank(rows: &[Vec<Complex64>], ncols: usize, rel_cutoff: f64) -> RankReport {
    let nrows = rows.len();
    if nrows == 0 || ncols == 0 {
        return RankReport {
            rank: 0,
            singular_values: vec![],
            gap: f64::INFINITY,
        };
    }
    let m = DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let smax = sv[0];
    if smax == 0.0 {
        return RankReport {
            rank: 0,
            singular_values: sv,
            gap: f64::INFINITY,
        };
    }
    let rank = sv.iter().filter(|&&s| s > rel_cutoff * smax).count();
    let gap = if rank == sv.len() {
        // compare the smallest kept value with the unit roundoff floor
        sv[rank - 1] / (smax * f64::EPSILON * (nrows.max(ncols) as f64))
    } else {
        let dropped = sv[rank].max(smax * f64::EPSILON);
        sv[rank - 1] / dropped
    };
    RankReport {
        rank,
        singular_values: sv,
        gap,
    }
}

/// Rank over any field: exact elimination for exact fields, gap-checked SVD
/// otherwise.
pub fn rank<T: Scalar>(rows: &[Vec<T>], context: &'static str) -> Result<usize> {
    if T::EXACT {
        return Ok(rank_by_elimination(rows, 0.0));
    }
    let ncols = rows.first().map_or(0, |r| r.len());
    let c: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| r.iter().map(|x| x.to_c64()).collect())
        .collect();
    let rep = numerical_rank(&c, ncols, RANK_REL_CUTOFF);
    if rep.is_ambiguous() {
        return Err(Error::RankAmbiguous {
            context,
            gap: rep.gap,
        });
    }
    Ok(rep.rank)
}

/// In-place LU solve of the dense `n x n` system `a x = b` (row-major).
/// Returns `false` on an exactly singular pivot.
pub fn lu_solve(a: &mut [Complex64], n: usize, b: &mut [Complex64]) -> bool {
    for col in 0..n {
        let mut best = col;
        let mut best_mag = a[col * n + col].norm_sqr();
        for r in col + 1..n {
            let m = a[r * n + col].norm_sqr();
            if m > best_mag {
                best = r;
                best_mag = m;
            }
        }
        if best_mag == 0.0 || !best_mag.is_finite() {
            return false;
        }
        if best != col {
            for c in 0..n {
                a.swap(best * n + c, col * n + c);
            }
            b.swap(best, col);
        }
        let inv = 1.0 / a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] * inv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in col + 1..n {
                let v = a[col * n + c];
                a[r * n + c] -= f * v;
            }
            let bc = b[col];
            b[r] -= f * bc;
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for c in col + 1..n {
            s -= a[col * n + c] * b[c];
        }
        b[col] = s / a[col * n + col];
    }
    true
}

/// Smallest-to-largest singular value ratio of a square complex matrix.
pub fn inverse_condition(a: &[Complex64], n: usize) -> f64 {
    let m = DMatrix::from_row_slice(n, n, a);
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_rational::BigRational;

    #[test]
    fn exact_rank_and_nullspace() {
        let m: Vec<Vec<BigRational>> = vec![
            vec![rat(1, 1), rat(2, 1), rat(3, 1)],
            vec![rat(2, 1), rat(4, 1), rat(6, 1)],
            vec![rat(1, 1), rat(0, 1), rat(1, 1)],
        ];
        assert_eq!(rank(&m, "t").unwrap(), 2);
        let ns = nullspace(&m, 3, 0.0);
        assert_eq!(ns.len(), 1);
        for row in &m {
            let dot = row
                .iter()
                .zip(&ns[0])
                .fold(rat(0, 1), |acc, (a, b)| acc + a.clone() * b.clone());
            assert_eq!(dot, rat(0, 1));
        }
    }

    #[test]
    fn determinant_matches_cofactor() {
        let m: Vec<Vec<BigRational>> = vec![
            vec![rat(2, 1), rat(-1, 1), rat(0, 1)],
            vec![rat(1, 3), rat(5, 1), rat(1, 1)],
            vec![rat(0, 1), rat(7, 2), rat(-4, 1)],
        ];
        // cofactor expansion along the first row
        let cof = rat(2, 1) * (rat(5, 1) * rat(-4, 1) - rat(1, 1) * rat(7, 2))
            - rat(-1, 1) * (rat(1, 3) * rat(-4, 1) - rat(1, 1) * rat(0, 1));
        assert_eq!(determinant(&m), cof);
    }

    #[test]
    fn numerical_rank_reports_gap() {
        let c = |x: f64| Complex64::new(x, 0.0);
        let rows = vec![
            vec![c(1.0), c(0.0), c(1.0)],
            vec![c(0.0), c(1.0), c(1.0)],
            vec![c(1.0), c(1.0), c(2.0)],
        ];
        let r = numerical_rank(&rows, 3, RANK_REL_CUTOFF);
        assert_eq!(r.rank, 2);
        assert!(r.gap > 1e10);
    }

    #[test]
    fn lu_solves_small_system() {
        let c = |x: f64, y: f64| Complex64::new(x, y);
        let mut a = vec![c(0.0, 0.0), c(2.0, 1.0), c(1.0, 0.0), c(3.0, -1.0)];
        let mut b = vec![c(1.0, 0.0), c(0.0, 1.0)];
        let (a0, b0) = (a.clone(), b.clone());
        assert!(lu_solve(&mut a, 2, &mut b));
        for i in 0..2 {
            let r = a0[2 * i] * b[0] + a0[2 * i + 1] * b[1] - b0[i];
            assert!(r.norm() < 1e-14);
        }
    }
}
