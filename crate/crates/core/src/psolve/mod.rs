//! Square polynomial systems over the complex numbers: total-degree homotopy
//! continuation in projective space, with damped multistart Newton as a
//! cross-check and rescue.

mod eval;
mod homotopy;
mod mpoly;
mod newton;

pub use mpoly::MPoly;
pub use newton::multistart_newton;
pub(crate) use homotopy::gaussian_c as gaussian;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use eval::Compiled;
use homotopy::{EndKind, PathEnd};

/// Square system: `n_vars` polynomials in `n_vars` unknowns.
#[derive(Clone, Debug)]
pub struct PolySystem {
    n_vars: usize,
    polys: Vec<MPoly>,
}

impl PolySystem {
    pub fn new(n_vars: usize, polys: Vec<MPoly>) -> Result<Self> {
        if polys.len() != n_vars {
            return Err(Error::NonSquare {
                equations: polys.len(),
                variables: n_vars,
            });
        }
        if let Some(p) = polys.iter().find(|p| p.min_vars() > n_vars) {
            return Err(Error::InvalidParameters(format!(
                "polynomial uses {} variables, system has {n_vars}",
                p.min_vars()
            )));
        }
        Ok(PolySystem { n_vars, polys })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn polys(&self) -> &[MPoly] {
        &self.polys
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.polys.iter().map(|p| p.total_degree()).collect()
    }

    pub fn eval(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.polys.iter().map(|p| p.eval(x)).collect()
    }

    /// Normwise backward residual: `max_i |f_i(x)| / sum_terms |c x^e|`.
    pub fn residual(&self, x: &[Complex64]) -> f64 {
        self.polys
            .iter()
            .map(|p| {
                let scale = p.eval_abs(x);
                if scale == 0.0 {
                    0.0
                } else {
                    p.eval(x).norm() / scale
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Product of total degrees.
pub fn bezout_bound(sys: &PolySystem) -> Result<u64> {
    if let Some(i) = sys.polys.iter().position(|p| p.num_terms() == 0) {
        return Err(Error::ZeroPolynomial(i));
    }
    Ok(sys.degrees().iter().map(|&d| d as u64).product())
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveOptions {
    pub seed: u64,
    /// Accepted solutions have backward residual at most this.
    pub residual_tol: f64,
    /// Relative distance under which two solutions are identified.
    pub dedup_tol: f64,
    /// Allowed fraction of failed paths per gamma attempt.
    pub failure_cap: f64,
    pub gamma_attempts: usize,
    /// Fraction of singular finite endpoints above which the solution set is
    /// declared suspect of being positive dimensional.
    pub singular_cap: f64,
    /// Multistart Newton starts used when every gamma attempt exceeds the
    /// failure cap; zero turns the rescue off and makes that case an error.
    pub rescue_starts: usize,
    pub max_steps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            seed: 0,
            residual_tol: 1e-10,
            dedup_tol: 1e-8,
            failure_cap: 0.05,
            gamma_attempts: 3,
            singular_cap: 0.2,
            rescue_starts: 2000,
            max_steps: 5000,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct SolveDiagnostics {
    pub paths_tracked: usize,
    pub path_failures: usize,
    pub bezout_bound: u64,
    pub max_residual: f64,
    pub seed: u64,
    pub at_infinity: usize,
    pub singular_endpoints: usize,
    pub gamma_attempts: usize,
    pub rescued: bool,
}

/// Output of [`solve_square_system`].
#[derive(Clone, Debug)]
pub struct SolveOutput {
    /// Isolated, nonsingular, polished, deduplicated, canonically sorted.
    pub solutions: Vec<Vec<Complex64>>,
    /// Finite endpoints where the Jacobian is rank deficient (deduplicated).
    /// They are not certified solutions but callers may refine them.
    pub singular: Vec<Vec<Complex64>>,
    pub diagnostics: SolveDiagnostics,
}

/// Regular solutions closer than this to another one are reclassified as
/// singular.
const CLUSTER_TOL: f64 = 1e-6;

pub(crate) fn rel_dist(x: &[Complex64], y: &[Complex64]) -> f64 {
    let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let n: f64 = x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    d / n.max(1.0)
}

/// Deduplicate within `tol` relative distance and sort lexicographically.
pub fn dedup_and_sort(points: Vec<Vec<Complex64>>, tol: f64) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::new();
    for p in points {
        if !out.iter().any(|q| rel_dist(&p, q) <= tol) {
            out.push(p);
        }
    }
    out.sort_by(|a, b| {
        for (x, y) in a.iter().zip(b) {
            let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
            if o != std::cmp::Ordering::Equal {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    });
    out
}

/// Solve a square system by total-degree homotopy continuation.
///
/// Deterministic given the seed. Each gamma attempt tracks every start path;
/// if too many fail, another attempt with a fresh gamma is made and the
/// results are merged.
pub fn solve_square_system(sys: &PolySystem, opts: &SolveOptions) -> Result<SolveOutput> {
    let bezout = bezout_bound(sys)?;
    let n = sys.n_vars();
    let mut diag = SolveDiagnostics {
        bezout_bound: bezout,
        seed: opts.seed,
        ..Default::default()
    };
    if n == 0 {
        return Ok(SolveOutput {
            solutions: vec![],
            singular: vec![],
            diagnostics: diag,
        });
    }
    // a nonzero constant equation has no solutions
    if sys.degrees().contains(&0) {
        return Ok(SolveOutput {
            solutions: vec![],
            singular: vec![],
            diagnostics: diag,
        });
    }
    let scaled: Vec<MPoly> = sys
        .polys()
        .iter()
        .map(|p| p.scale(Complex64::new(1.0 / p.max_coeff(), 0.0)))
        .collect();
    let scaled = PolySystem::new(n, scaled)?;
    let comp = Compiled::new(&scaled);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut regular = Vec::new();
    let mut singular = Vec::new();
    let mut best_failures = usize::MAX;
    let mut first_singular_count = None;
    for attempt in 0..opts.gamma_attempts.max(1) {
        diag.gamma_attempts = attempt + 1;
        let ends: Vec<PathEnd> = homotopy::track_all(&comp, &mut rng, opts);
        let failures = ends.iter().filter(|e| e.kind == EndKind::Failed).count();
        let sing = ends.iter().filter(|e| e.kind == EndKind::Singular).count();
        let inf = ends.iter().filter(|e| e.kind == EndKind::Infinity).count();
        first_singular_count.get_or_insert(sing);
        diag.paths_tracked = ends.len();
        if failures < best_failures {
            best_failures = failures;
            diag.path_failures = failures;
            diag.at_infinity = inf;
            diag.singular_endpoints = sing;
        }
        for e in ends {
            match e.kind {
                EndKind::Regular => regular.push(e.x),
                EndKind::Singular => singular.push(e.x),
                _ => {}
            }
        }
        if (failures as f64) <= opts.failure_cap * diag.paths_tracked as f64 {
            break;
        }
    }
    let tracked = diag.paths_tracked;
    if (best_failures as f64) > opts.failure_cap * tracked as f64 {
        if opts.rescue_starts == 0 {
            return Err(Error::PathFailureCap {
                failed: best_failures,
                tracked,
                attempts: diag.gamma_attempts,
            });
        }
        diag.rescued = true;
        let extra = newton::multistart_compiled(&comp, opts.rescue_starts, &mut rng, opts);
        regular.extend(extra);
    }
    let sing_count = first_singular_count.unwrap_or(0);
    if (sing_count as f64) > opts.singular_cap * tracked as f64 {
        return Err(Error::NonFiniteSuspect {
            singular: sing_count,
            tracked,
        });
    }
    // polish against the unscaled system for the reported residuals
    let mut solutions = Vec::new();
    for x in regular {
        let r = sys.residual(&x);
        if r <= opts.residual_tol {
            diag.max_residual = diag.max_residual.max(r);
            solutions.push(x);
        }
    }
    let solutions = dedup_and_sort(solutions, opts.dedup_tol);
    // distinct "regular" endpoints bunched together are a multiple root
    let (solutions, clustered): (Vec<_>, Vec<_>) = solutions.iter().cloned().partition(|x| {
        !solutions
            .iter()
            .any(|y| rel_dist(x, y) > 0.0 && rel_dist(x, y) <= CLUSTER_TOL)
    });
    singular.extend(clustered);
    let singular: Vec<Vec<Complex64>> = dedup_and_sort(singular, 1e-5)
        .into_iter()
        .filter(|s| !solutions.iter().any(|x| rel_dist(x, s) <= 1e-5))
        .collect();
    if solutions.len() as u64 > bezout {
        return Err(Error::ContractViolation(format!(
            "{} solutions exceed the Bezout bound {bezout}",
            solutions.len()
        )));
    }
    Ok(SolveOutput {
        solutions,
        singular,
        diagnostics: diag,
    })
}


#[cfg(test)]
mod oracle_tests {
    use super::tests::random_system;
    use super::*;

    #[test]
    fn three_quadrics_match_multistart() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for trial in 0..3 {
            let sys = random_system(&mut rng, 3, &[2, 2, 2]);
            let opts = SolveOptions { seed: trial, ..Default::default() };
            let hom = solve_square_system(&sys, &opts).unwrap();
            let ms = multistart_newton(&sys, 10_000, &opts);
            assert!(hom.solutions.len() <= 8);
            assert_eq!(hom.solutions.len(), ms.len(), "trial {trial}");
            for s in &hom.solutions {
                assert!(sys.residual(s) < 1e-10);
                assert!(ms.iter().any(|t| rel_dist(s, t) < 1e-8));
            }
        }
    }
}
