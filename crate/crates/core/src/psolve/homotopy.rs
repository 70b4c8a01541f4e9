use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::eval::{Compiled, Scratch};
use super::newton;
use super::SolveOptions;
use crate::linalg::lu_solve;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

const H_INIT: f64 = 0.02;
const H_MAX: f64 = 0.25;
const H_MIN: f64 = 1e-11;
const TRACK_TOL: f64 = 1e-9;
/// Endpoints with `|z0| / |z|` below this are treated as points at infinity.
const INFINITY_TOL: f64 = 1e-8;
/// Endpoints that fail the regularity test and have `|z0| / |z|` below this
/// are taken to be slowly converging paths to infinity.
const INFINITY_SOFT_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum EndKind {
    Regular,
    Singular,
    Infinity,
    Failed,
}

#[derive(Clone, Debug)]
pub(crate) struct PathEnd {
    pub kind: EndKind,
    /// Affine endpoint (empty at infinity).
    pub x: Vec<Complex64>,
}

pub(crate) fn gaussian_c(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

struct Homotopy<'a> {
    f: &'a Compiled,
    gamma: Complex64,
    patch: Vec<Complex64>,
    s: Scratch,
    fv: Vec<Complex64>,
    fj: Vec<Complex64>,
    mat: Vec<Complex64>,
    rhs: Vec<Complex64>,
}

impl<'a> Homotopy<'a> {
    fn new(f: &'a Compiled, gamma: Complex64, patch: Vec<Complex64>) -> Self {
        let n = f.n;
        Homotopy {
            f,
            gamma,
            patch,
            s: f.scratch(),
            fv: vec![ZERO; n],
            fj: vec![ZERO; n * (n + 1)],
            mat: vec![ZERO; (n + 1) * (n + 1)],
            rhs: vec![ZERO; n + 1],
        }
    }

    /// Fill `mat` with dH/dz and `rhs` with H (when `want_dt` is false) or
    /// with dH/dtau (when true).
    fn assemble(&mut self, z: &[Complex64], tau: f64, want_dt: bool) {
        let n = self.f.n;
        let nv = n + 1;
        self.f.eval_hom(z, &mut self.fv, Some(&mut self.fj), &mut self.s);
        let g = self.gamma * (1.0 - tau);
        for i in 0..n {
            let d = self.f.degrees[i] as i32;
            let zi = z[i + 1];
            let zi_pow = zi.powi(d - 1);
            let z0_pow = z[0].powi(d - 1);
            let gi = zi_pow * zi - z0_pow * z[0];
            let row = &mut self.mat[i * nv..(i + 1) * nv];
            for j in 0..nv {
                row[j] = self.fj[i * nv + j] * tau;
            }
            row[0] -= g * z0_pow * d as f64;
            row[i + 1] += g * zi_pow * d as f64;
            self.rhs[i] = if want_dt {
                self.fv[i] - self.gamma * gi
            } else {
                self.fv[i] * tau + g * gi
            };
        }
        let row = &mut self.mat[n * nv..];
        row.copy_from_slice(&self.patch);
        self.rhs[n] = if want_dt {
            ZERO
        } else {
            self.patch.iter().zip(z).map(|(a, b)| a * b).sum::<Complex64>() - ONE
        };
    }

    /// Newton correction at fixed tau. Returns false when not contracting.
    fn correct(&mut self, z: &mut [Complex64], tau: f64, tol: f64, its: usize) -> bool {
        let nv = self.f.n + 1;
        let mut prev = f64::INFINITY;
        for _ in 0..its {
            self.assemble(z, tau, false);
            if !lu_solve(&mut self.mat, nv, &mut self.rhs) {
                return false;
            }
            let dn = norm(&self.rhs);
            for j in 0..nv {
                z[j] -= self.rhs[j];
            }
            let zn = norm(z);
            if !dn.is_finite() || dn > 0.5 * prev {
                return false;
            }
            if dn <= tol * zn.max(1e-300) {
                return true;
            }
            prev = dn;
        }
        false
    }

    /// `-dz/dtau` at `(z, tau)` into `out`.
    fn tangent(&mut self, z: &[Complex64], tau: f64, out: &mut [Complex64]) -> bool {
        let nv = self.f.n + 1;
        self.assemble(z, tau, true);
        if !lu_solve(&mut self.mat, nv, &mut self.rhs) {
            return false;
        }
        out.copy_from_slice(&self.rhs);
        true
    }

    /// Classical Runge-Kutta step of length `h` along the path.
    fn predict(&mut self, z: &[Complex64], tau: f64, h: f64, out: &mut [Complex64]) -> bool {
        let nv = z.len();
        let mut k = [vec![ZERO; nv], vec![ZERO; nv], vec![ZERO; nv], vec![ZERO; nv]];
        let mut w = vec![ZERO; nv];
        if !self.tangent(z, tau, &mut k[0]) {
            return false;
        }
        for (stage, frac) in [(1, 0.5), (2, 0.5), (3, 1.0)] {
            for j in 0..nv {
                w[j] = z[j] - k[stage - 1][j] * (h * frac);
            }
            let rest = &mut k[stage..];
            if !self.tangent(&w, tau + h * frac, &mut rest[0]) {
                return false;
            }
        }
        for j in 0..nv {
            out[j] = z[j] - (k[0][j] + k[1][j] * 2.0 + k[2][j] * 2.0 + k[3][j]) * (h / 6.0);
        }
        true
    }

    fn track(&mut self, z: &mut Vec<Complex64>, max_steps: usize) -> f64 {
        let nv = self.f.n + 1;
        let mut tau = 0.0;
        let mut h = H_INIT;
        let mut good = 0;
        let mut trial = vec![ZERO; nv];
        for _ in 0..max_steps {
            if tau >= 1.0 {
                break;
            }
            let step = h.min(1.0 - tau);
            if !self.predict(z, tau, step, &mut trial) {
                return tau;
            }
            let t_next = if step == 1.0 - tau { 1.0 } else { tau + step };
            if self.correct(&mut trial, t_next, TRACK_TOL, 3) {
                z.copy_from_slice(&trial);
                tau = t_next;
                good += 1;
                if good >= 3 {
                    h = (h * 2.0).min(H_MAX);
                    good = 0;
                }
            } else {
                h *= 0.5;
                good = 0;
                if h < H_MIN {
                    return tau;
                }
            }
        }
        tau
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Track every start path of the total-degree homotopy with one random gamma
/// and classify the endpoints.
pub(crate) fn track_all(f: &Compiled, rng: &mut ChaCha8Rng, opts: &SolveOptions) -> Vec<PathEnd> {
    let n = f.n;
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let gamma = Complex64::from_polar(1.0, theta);
    let mut patch: Vec<Complex64> = (0..=n).map(|_| gaussian_c(rng)).collect();
    let pn = norm(&patch);
    patch.iter_mut().for_each(|a| *a /= pn);
    let mut hom = Homotopy::new(f, gamma, patch.clone());
    let degs: Vec<usize> = f.degrees.iter().map(|&d| d as usize).collect();
    let total: usize = degs.iter().product();
    let mut idx = vec![0usize; n];
    let mut ends = Vec::with_capacity(total);
    for _ in 0..total {
        // start point (1, w_1, ..., w_n) scaled onto the patch
        let mut z = vec![ONE; n + 1];
        for i in 0..n {
            let ang = std::f64::consts::TAU * idx[i] as f64 / degs[i] as f64;
            z[i + 1] = Complex64::from_polar(1.0, ang);
        }
        let dot: Complex64 = patch.iter().zip(&z).map(|(a, b)| a * b).sum();
        z.iter_mut().for_each(|v| *v /= dot);
        let tau = hom.track(&mut z, opts.max_steps);
        ends.push(classify(&mut hom, z, tau, opts));
        for i in 0..n {
            idx[i] += 1;
            if idx[i] < degs[i] {
                break;
            }
            idx[i] = 0;
        }
    }
    ends
}

fn classify(hom: &mut Homotopy, mut z: Vec<Complex64>, tau: f64, opts: &SolveOptions) -> PathEnd {
    if tau < 0.9 {
        return PathEnd {
            kind: EndKind::Failed,
            x: vec![],
        };
    }
    if tau < 1.0 {
        // endgame stand-in: a few Newton steps straight at the target
        let mut w = z.clone();
        if hom.correct(&mut w, 1.0, 1e-12, 6) {
            z = w;
        }
    }
    let zn = norm(&z);
    if z[0].norm() <= INFINITY_TOL * zn {
        return PathEnd {
            kind: EndKind::Infinity,
            x: vec![],
        };
    }
    let mut x: Vec<Complex64> = z[1..].iter().map(|v| v / z[0]).collect();
    let (res, rcond) = newton::polish(hom.f, &mut x, 8);
    let kind = if res <= opts.residual_tol && rcond >= 1e-9 {
        EndKind::Regular
    } else if z[0].norm() <= INFINITY_SOFT_TOL * zn {
        EndKind::Infinity
    } else if res <= 1e-6 {
        EndKind::Singular
    } else if x.iter().any(|v| v.norm() > 1.0 / INFINITY_TOL) {
        EndKind::Infinity
    } else {
        EndKind::Failed
    };
    PathEnd { kind, x }
}
