use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::eval::Compiled;
use super::homotopy::gaussian_c;
use super::{dedup_and_sort, MPoly, PolySystem, SolveOptions};
use crate::linalg::{inverse_condition, lu_solve};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

struct Affine<'a> {
    f: &'a Compiled,
    z: Vec<Complex64>,
    vals: Vec<Complex64>,
    jh: Vec<Complex64>,
    abs: Vec<f64>,
    s: super::eval::Scratch,
}

impl<'a> Affine<'a> {
    fn new(f: &'a Compiled) -> Self {
        let n = f.n;
        Affine {
            f,
            z: vec![Complex64::new(1.0, 0.0); n + 1],
            vals: vec![ZERO; n],
            jh: vec![ZERO; n * (n + 1)],
            abs: vec![0.0; n],
            s: f.scratch(),
        }
    }

    fn load(&mut self, x: &[Complex64]) {
        self.z[1..].copy_from_slice(x);
    }

    /// Values and the `n x n` affine Jacobian.
    fn eval(&mut self, x: &[Complex64], jac: &mut [Complex64]) {
        let n = self.f.n;
        self.load(x);
        self.f.eval_hom(&self.z, &mut self.vals, Some(&mut self.jh), &mut self.s);
        for i in 0..n {
            for j in 0..n {
                jac[i * n + j] = self.jh[i * (n + 1) + j + 1];
            }
        }
    }

    fn residual(&mut self, x: &[Complex64]) -> f64 {
        self.load(x);
        self.f.eval_hom(&self.z, &mut self.vals, None, &mut self.s);
        self.f.eval_abs(&self.z, &mut self.abs);
        self.vals
            .iter()
            .zip(&self.abs)
            .map(|(v, a)| if *a == 0.0 { 0.0 } else { v.norm() / a })
            .fold(0.0, f64::max)
    }
}

/// Newton on the affine system. Returns the backward residual and the inverse
/// condition number of the Jacobian at the final point.
pub(crate) fn polish(f: &Compiled, x: &mut [Complex64], its: usize) -> (f64, f64) {
    let n = f.n;
    let mut a = Affine::new(f);
    let mut jac = vec![ZERO; n * n];
    let mut best = (a.residual(x), x.to_vec());
    for _ in 0..its {
        a.eval(x, &mut jac);
        let mut rhs = a.vals.clone();
        if !lu_solve(&mut jac, n, &mut rhs) {
            break;
        }
        for j in 0..n {
            x[j] -= rhs[j];
        }
        if x.iter().any(|v| !v.is_finite()) {
            break;
        }
        let r = a.residual(x);
        if r < best.0 {
            best = (r, x.to_vec());
        }
        if r <= 1e-15 {
            break;
        }
    }
    x.copy_from_slice(&best.1);
    a.eval(x, &mut jac);
    (best.0, inverse_condition(&jac, n))
}

/// Damped Newton from `starts` random points; returns the polished
/// nonsingular solutions (not deduplicated).
///
/// Iterates on the homogenised system with a random affine patch per start,
/// so solutions of large modulus are as reachable as small ones.
pub(crate) fn multistart_compiled(
    f: &Compiled,
    starts: usize,
    rng: &mut ChaCha8Rng,
    opts: &SolveOptions,
) -> Vec<Vec<Complex64>> {
    let n = f.n;
    let nv = n + 1;
    let mut s = f.scratch();
    let mut vals = vec![ZERO; n];
    let mut jh = vec![ZERO; n * nv];
    let mut mat = vec![ZERO; nv * nv];
    let mut rhs = vec![ZERO; nv];
    let mut out = Vec::new();
    let merit = |z: &[Complex64], patch: &[Complex64], vals: &mut [Complex64], s: &mut super::eval::Scratch| {
        f.eval_hom(z, vals, None, s);
        let p: Complex64 = patch.iter().zip(z).map(|(a, b)| a * b).sum::<Complex64>() - 1.0;
        vals.iter().map(|v| v.norm_sqr()).sum::<f64>() + p.norm_sqr()
    };
    for _ in 0..starts {
        let patch: Vec<Complex64> = (0..nv).map(|_| gaussian_c(rng)).collect();
        let mut z: Vec<Complex64> = (0..nv).map(|_| gaussian_c(rng)).collect();
        let dot: Complex64 = patch.iter().zip(&z).map(|(a, b)| a * b).sum();
        z.iter_mut().for_each(|v| *v /= dot);
        let mut m = merit(&z, &patch, &mut vals, &mut s);
        let mut converged = false;
        for _ in 0..100 {
            f.eval_hom(&z, &mut vals, Some(&mut jh), &mut s);
            mat[..n * nv].copy_from_slice(&jh);
            mat[n * nv..].copy_from_slice(&patch);
            rhs[..n].copy_from_slice(&vals);
            rhs[n] = patch.iter().zip(&z).map(|(a, b)| a * b).sum::<Complex64>() - 1.0;
            if !lu_solve(&mut mat, nv, &mut rhs) {
                break;
            }
            let step_norm: f64 = rhs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..12 {
                let trial: Vec<Complex64> = z.iter().zip(&rhs).map(|(v, d)| v - d * lambda).collect();
                let mt = merit(&trial, &patch, &mut vals, &mut s);
                if mt.is_finite() && mt < m {
                    z = trial;
                    m = mt;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            let zn: f64 = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if step_norm <= 1e-13 * zn || m <= 1e-28 {
                converged = true;
                break;
            }
            if !accepted {
                break;
            }
        }
        if !converged || z[0].norm() <= 1e-8 * z.iter().map(|v| v.norm()).fold(0.0, f64::max) {
            continue;
        }
        let mut x: Vec<Complex64> = z[1..].iter().map(|v| v / z[0]).collect();
        let (r, rc) = polish(f, &mut x, 4);
        if r <= opts.residual_tol && rc >= 1e-9 {
            out.push(x);
        }
    }
    out
}

/// Deduplicated nonsingular solutions reached by damped Newton from `starts`
/// random starts. Independent of the homotopy tracker; used as its oracle.
pub fn multistart_newton(sys: &PolySystem, starts: usize, opts: &SolveOptions) -> Vec<Vec<Complex64>> {
    let scaled: Vec<MPoly> = sys
        .polys()
        .iter()
        .map(|p| p.scale(Complex64::new(1.0 / p.max_coeff().max(f64::MIN_POSITIVE), 0.0)))
        .collect();
    let scaled = PolySystem::new(sys.n_vars(), scaled).expect("square by construction");
    let comp = Compiled::new(&scaled);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9_7f4a_7c15);
    let found = multistart_compiled(&comp, starts, &mut rng, opts);
    dedup_and_sort(found, opts.dedup_tol)
}
