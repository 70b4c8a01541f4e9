use num_complex::Complex64;

use super::PolySystem;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A system flattened for repeated evaluation in homogeneous coordinates
/// `z = (z0, z1, ..., zn)`, each polynomial homogenised with `z0`.
#[derive(Clone, Debug)]
pub(crate) struct Compiled {
    pub n: usize,
    pub degrees: Vec<u32>,
    max_deg: usize,
    polys: Vec<Flat>,
}

#[derive(Clone, Debug)]
struct Flat {
    coeffs: Vec<Complex64>,
    /// `n + 1` exponents per term, the homogenising one first.
    exps: Vec<u32>,
}

/// Scratch buffers for [`Compiled::eval_hom`].
pub(crate) struct Scratch {
    pows: Vec<Complex64>,
    prefix: Vec<Complex64>,
    suffix: Vec<Complex64>,
}

impl Compiled {
    pub fn new(sys: &PolySystem) -> Self {
        let n = sys.n_vars();
        let degrees: Vec<u32> = sys.polys().iter().map(|p| p.total_degree()).collect();
        let polys = sys
            .polys()
            .iter()
            .zip(&degrees)
            .map(|(p, &d)| {
                let mut coeffs = Vec::new();
                let mut exps = Vec::new();
                for (e, c) in p.terms() {
                    let deg: u32 = e.iter().sum();
                    coeffs.push(*c);
                    exps.push(d - deg);
                    for i in 0..n {
                        exps.push(e.get(i).copied().unwrap_or(0));
                    }
                }
                Flat { coeffs, exps }
            })
            .collect();
        let max_deg = degrees.iter().copied().max().unwrap_or(0) as usize;
        Compiled {
            n,
            degrees,
            max_deg,
            polys,
        }
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            pows: vec![ZERO; (self.n + 1) * (self.max_deg + 1)],
            prefix: vec![ZERO; self.n + 2],
            suffix: vec![ZERO; self.n + 2],
        }
    }

    /// Values of the homogenised polynomials at `z` and (optionally) their
    /// Jacobian, `n x (n + 1)` row-major.
    pub fn eval_hom(&self, z: &[Complex64], vals: &mut [Complex64], jac: Option<&mut [Complex64]>, s: &mut Scratch) {
        let nv = self.n + 1;
        let stride = self.max_deg + 1;
        for j in 0..nv {
            let base = j * stride;
            s.pows[base] = Complex64::new(1.0, 0.0);
            for k in 1..stride {
                s.pows[base + k] = s.pows[base + k - 1] * z[j];
            }
        }
        match jac {
            None => {
                for (i, p) in self.polys.iter().enumerate() {
                    let mut acc = ZERO;
                    for (t, c) in p.coeffs.iter().enumerate() {
                        let e = &p.exps[t * nv..(t + 1) * nv];
                        let mut m = *c;
                        for j in 0..nv {
                            if e[j] > 0 {
                                m *= s.pows[j * stride + e[j] as usize];
                            }
                        }
                        acc += m;
                    }
                    vals[i] = acc;
                }
            }
            Some(jac) => {
                jac.iter_mut().for_each(|x| *x = ZERO);
                for (i, p) in self.polys.iter().enumerate() {
                    let mut acc = ZERO;
                    let row = &mut jac[i * nv..(i + 1) * nv];
                    for (t, c) in p.coeffs.iter().enumerate() {
                        let e = &p.exps[t * nv..(t + 1) * nv];
                        // prefix[j] = prod_{i<j} z_i^e_i, suffix[j] = prod_{i>=j}
                        s.prefix[0] = Complex64::new(1.0, 0.0);
                        for j in 0..nv {
                            let f = s.pows[j * stride + e[j] as usize];
                            s.prefix[j + 1] = s.prefix[j] * f;
                        }
                        s.suffix[nv] = Complex64::new(1.0, 0.0);
                        for j in (0..nv).rev() {
                            let f = s.pows[j * stride + e[j] as usize];
                            s.suffix[j] = s.suffix[j + 1] * f;
                        }
                        acc += c * s.prefix[nv];
                        for j in 0..nv {
                            if e[j] == 0 {
                                continue;
                            }
                            let d = s.pows[j * stride + e[j] as usize - 1] * (e[j] as f64);
                            row[j] += c * s.prefix[j] * d * s.suffix[j + 1];
                        }
                    }
                    vals[i] = acc;
                }
            }
        }
    }

    /// Sum of term magnitudes of each polynomial at `z`.
    pub fn eval_abs(&self, z: &[Complex64], out: &mut [f64]) {
        let nv = self.n + 1;
        let az: Vec<f64> = z.iter().map(|v| v.norm()).collect();
        for (i, p) in self.polys.iter().enumerate() {
            let mut acc = 0.0;
            for (t, c) in p.coeffs.iter().enumerate() {
                let e = &p.exps[t * nv..(t + 1) * nv];
                let mut m = c.norm();
                for j in 0..nv {
                    if e[j] > 0 {
                        m *= az[j].powi(e[j] as i32);
                    }
                }
                acc += m;
            }
            out[i] = acc;
        }
    }
}
