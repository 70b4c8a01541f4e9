//! Complete intersection curves `F_a = F_b = 0` in projective 3-space.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::binary_forms::{gcd_degree, BinaryForm, DivisorP1, JsonScalar};
use crate::error::{Error, Result};
use crate::line::LineP3;
use crate::psolve::{self, MPoly, PolySystem, SolveOptions};
use crate::rational_curves::invert4;
use crate::scalar::{FieldKind, Ring, Scalar};
use crate::secant::{
    child_rng, common_divisor, finish, kernel_system, make_record, screen_candidate, numeric_gcd_degree, solve_charts, square_up,
    Chart, SearchDiagnostics, SecantOptions, SecantOrder, SecantRecord, SecantSearch,
};

type C = Complex64;

/// Exponents of `x0, x1, x2, x3`.
pub type Exponent = [u32; 4];

/// A nonzero homogeneous polynomial in four variables.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfacePoly<T> {
    degree: usize,
    /// Sorted by exponent, no zero coefficients, no repeats.
    terms: Vec<(Exponent, T)>,
}

/// All exponents of total degree `d`, in lexicographic order.
pub fn monomials(d: usize) -> Vec<Exponent> {
    let d = d as u32;
    let mut out = Vec::new();
    for e0 in (0..=d).rev() {
        for e1 in (0..=d - e0).rev() {
            for e2 in (0..=d - e0 - e1).rev() {
                out.push([e0, e1, e2, d - e0 - e1 - e2]);
            }
        }
    }
    out
}

fn mul_maps<T: Ring>(a: &BTreeMap<Exponent, T>, b: &BTreeMap<Exponent, T>) -> BTreeMap<Exponent, T> {
    let mut out: BTreeMap<Exponent, T> = BTreeMap::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e = std::array::from_fn(|i| ea[i] + eb[i]);
            let v = out.remove(&e).unwrap_or_else(T::zero) + ca.clone() * cb.clone();
            out.insert(e, v);
        }
    }
    out
}

impl<T: Scalar> SurfacePoly<T> {
    /// Repeated exponents are summed; zero coefficients dropped.
    pub fn new(degree: usize, terms: Vec<(Exponent, T)>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidParameters("surface degree must be positive".into()));
        }
        let mut map: BTreeMap<Exponent, T> = BTreeMap::new();
        for (e, c) in terms {
            let deg: u32 = e.iter().sum();
            if deg as usize != degree {
                return Err(Error::InvalidParameters(format!(
                    "term {e:?} has degree {deg} in a surface of degree {degree}"
                )));
            }
            let v = map.remove(&e).unwrap_or_else(T::zero) + c;
            map.insert(e, v);
        }
        Self::from_map(degree, map)
    }

    fn from_map(degree: usize, map: BTreeMap<Exponent, T>) -> Result<Self> {
        let terms: Vec<(Exponent, T)> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if terms.is_empty() {
            return Err(Error::InvalidParameters("zero surface polynomial".into()));
        }
        Ok(SurfacePoly { degree, terms })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[(Exponent, T)] {
        &self.terms
    }

    pub fn eval(&self, x: &[T; 4]) -> T {
        self.terms.iter().fold(T::zero(), |acc, (e, c)| {
            let mut m = c.clone();
            for i in 0..4 {
                for _ in 0..e[i] {
                    m = m * x[i].clone();
                }
            }
            acc + m
        })
    }

    /// Sum of coefficient magnitudes.
    pub fn norm1(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.magnitude()).sum()
    }

    /// `F(M x)`.
    pub fn compose_linear(&self, m: &[[T; 4]; 4]) -> Result<Self> {
        let lin: Vec<BTreeMap<Exponent, T>> = (0..4)
            .map(|i| {
                let mut l = BTreeMap::new();
                for j in 0..4 {
                    if !m[i][j].is_zero() {
                        let mut e = [0; 4];
                        e[j] = 1;
                        l.insert(e, m[i][j].clone());
                    }
                }
                l
            })
            .collect();
        let one: BTreeMap<Exponent, T> = [([0; 4], T::one())].into_iter().collect();
        let pows: Vec<Vec<BTreeMap<Exponent, T>>> = lin
            .iter()
            .map(|l| {
                let mut v = vec![one.clone()];
                for k in 0..self.degree {
                    let next = mul_maps(&v[k], l);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out: BTreeMap<Exponent, T> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut t: BTreeMap<Exponent, T> = [([0; 4], c.clone())].into_iter().collect();
            for i in 0..4 {
                t = mul_maps(&t, &pows[i][e[i] as usize]);
            }
            for (ee, cc) in t {
                let v = out.remove(&ee).unwrap_or_else(T::zero) + cc;
                out.insert(ee, v);
            }
        }
        Self::from_map(self.degree, out)
    }

    /// `F(p s + q t)` over any ring the coefficients lift to.
    pub fn restrict_frame<R: Ring>(&self, p: &[R; 4], q: &[R; 4], lift: impl Fn(&T) -> R) -> BinaryForm<R> {
        let pows: Vec<Vec<BinaryForm<R>>> = (0..4)
            .map(|i| {
                let l = BinaryForm::linear(p[i].clone(), q[i].clone());
                let mut v = vec![BinaryForm::constant(R::one())];
                for k in 0..self.degree {
                    let next = v[k].mul(&l);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = BinaryForm::zero(self.degree);
        for (e, c) in &self.terms {
            let mut t = BinaryForm::constant(lift(c));
            for i in 0..4 {
                if e[i] > 0 {
                    t = t.mul(&pows[i][e[i] as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// The restriction to `L` in the parameter of its frame.
    pub fn restrict_to_line(&self, l: &LineP3<T>) -> BinaryForm<T> {
        let [p, q] = l.frame();
        self.restrict_frame(p, q, |c| c.clone())
    }

    /// Coefficient scale of `F(p s + q t)` without cancellation: the norm of
    /// the restriction of `|F|` to `|p| s + |q| t`.
    pub fn restriction_scale(&self, p: &[T; 4], q: &[T; 4]) -> f64 {
        let ap: [f64; 4] = std::array::from_fn(|i| p[i].magnitude());
        let aq: [f64; 4] = std::array::from_fn(|i| q[i].magnitude());
        let r = self.restrict_frame(&ap, &aq, |c| c.magnitude());
        r.coeffs().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn to_c64(&self) -> SurfacePoly<C> {
        SurfacePoly {
            degree: self.degree,
            terms: self.terms.iter().map(|(e, c)| (*e, c.to_c64())).collect(),
        }
    }

    /// As a polynomial in `x0..x3` for the solver.
    pub fn to_mpoly(&self) -> MPoly {
        MPoly::from_terms(self.terms.iter().map(|(e, c)| (e.to_vec(), c.to_c64())))
    }
}

/// Random integer coefficients in `[-r, r]` on every monomial.
pub fn random_integer_surface(rng: &mut ChaCha8Rng, degree: usize, r: i64) -> SurfacePoly<BigRational> {
    loop {
        let terms = monomials(degree)
            .into_iter()
            .map(|e| (e, <BigRational as Scalar>::from_i64(rng.random_range(-r..=r))))
            .collect();
        if let Ok(f) = SurfacePoly::new(degree, terms) {
            return f;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    /// The Jacobian-minor system was solved and has no solution on the curve.
    Verified,
    /// Full Jacobian rank at sampled curve points only.
    VerifiedAtSamples,
    #[default]
    Unknown,
}

/// The curve `F_a = F_b = 0`, `a <= b`.
#[derive(Clone, Debug, PartialEq)]
pub struct CICurve<T> {
    fa: SurfacePoly<T>,
    fb: SurfacePoly<T>,
    smoothness: Smoothness,
}

fn random_int_point<T: Scalar>(rng: &mut ChaCha8Rng) -> [T; 4] {
    std::array::from_fn(|_| T::from_i64(rng.random_range(-9..=9)))
}

impl<T: Scalar> CICurve<T> {
    /// Checks `a <= b` and that the surfaces share no component (their
    /// restrictions to two random lines are coprime). Smoothness is unknown.
    pub fn new(fa: SurfacePoly<T>, fb: SurfacePoly<T>) -> Result<Self> {
        if fa.degree() > fb.degree() {
            return Err(Error::InvalidParameters(format!(
                "need deg Fa <= deg Fb, got {} > {}",
                fa.degree(),
                fb.degree()
            )));
        }
        let mut rng = child_rng(0, 0xc1_c0b7);
        let mut shared = 0;
        for _ in 0..2 {
            let (p, q) = loop {
                let (p, q) = (random_int_point::<T>(&mut rng), random_int_point::<T>(&mut rng));
                if LineP3::from_points(p.clone(), q.clone()).is_ok() {
                    break (p, q);
                }
            };
            let ra = fa.restrict_frame(&p, &q, |c| c.clone());
            let rb = fb.restrict_frame(&p, &q, |c| c.clone());
            let g = if T::EXACT {
                if ra.is_zero() || rb.is_zero() {
                    1
                } else {
                    gcd_degree(&ra, &rb)?
                }
            } else {
                numeric_gcd_degree(&ra.to_c64(), &rb.to_c64())?
            };
            if g > 0 {
                shared += 1;
            }
        }
        if shared == 2 {
            return Err(Error::InvalidParameters("surfaces share a common component".into()));
        }
        Ok(CICurve {
            fa,
            fb,
            smoothness: Smoothness::Unknown,
        })
    }

    pub fn fa(&self) -> &SurfacePoly<T> {
        &self.fa
    }

    pub fn fb(&self) -> &SurfacePoly<T> {
        &self.fb
    }

    pub fn a(&self) -> usize {
        self.fa.degree()
    }

    pub fn b(&self) -> usize {
        self.fb.degree()
    }

    pub fn degree(&self) -> usize {
        self.a() * self.b()
    }

    /// The twist `alpha` with `omega_C = O_C(alpha)`.
    pub fn alpha(&self) -> i64 {
        (self.a() + self.b()) as i64 - 4
    }

    /// `ab(a + b - 4)/2 + 1`.
    pub fn genus(&self) -> i64 {
        (self.a() * self.b()) as i64 * self.alpha() / 2 + 1
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn with_smoothness(mut self, s: Smoothness) -> Self {
        self.smoothness = s;
        self
    }

    pub fn to_c64(&self) -> CICurve<C> {
        CICurve {
            fa: self.fa.to_c64(),
            fb: self.fb.to_c64(),
            smoothness: self.smoothness,
        }
    }

    fn restrictions_at(&self, p: &[T; 4], q: &[T; 4]) -> (BinaryForm<T>, BinaryForm<T>) {
        (
            self.fa.restrict_frame(p, q, |c| c.clone()),
            self.fb.restrict_frame(p, q, |c| c.clone()),
        )
    }
}

const LINE_IN_CURVE: &str = "line lies on both surfaces";

/// `C ∩ L` as a divisor in the parameter of the line's frame.
pub fn line_intersection_divisor<T: Scalar>(c: &CICurve<T>, l: &LineP3<T>) -> Result<DivisorP1<C>> {
    let [p, q] = l.frame();
    let (ra, rb) = c.restrictions_at(p, q);
    let scales = (c.fa.restriction_scale(p, q), c.fb.restriction_scale(p, q));
    if T::EXACT && ra.is_zero() && rb.is_zero() {
        return Err(Error::ContractViolation(LINE_IN_CURVE.into()));
    }
    match common_divisor(&ra.to_c64(), &rb.to_c64(), scales.0, scales.1) {
        Err(Error::ContractViolation(_)) => Err(Error::ContractViolation(LINE_IN_CURVE.into())),
        other => other,
    }
}

/// Length of `C ∩ L` with multiplicity.
pub fn line_intersection_length<T: Scalar>(c: &CICurve<T>, l: &LineP3<T>) -> Result<usize> {
    if !T::EXACT {
        return Ok(line_intersection_divisor(c, l)?.degree());
    }
    let [p, q] = l.frame();
    let (ra, rb) = c.restrictions_at(p, q);
    match (ra.is_zero(), rb.is_zero()) {
        (true, true) => Err(Error::ContractViolation(LINE_IN_CURVE.into())),
        (true, false) => Ok(rb.degree()),
        (false, true) => Ok(ra.degree()),
        (false, false) => gcd_degree(&ra, &rb),
    }
}

/// Line-chart unknowns for the CI searches: the chart rows are two points
/// spanning the line.
fn symbolic_restrictions(c: &CICurve<C>, chart: &Chart) -> (BinaryForm<MPoly>, BinaryForm<MPoly>) {
    let [p, q] = chart.symbolic_rows();
    let lift = |x: &C| MPoly::constant(*x);
    (c.fa.restrict_frame(&p, &q, lift), c.fb.restrict_frame(&p, &q, lift))
}

/// Gram-Schmidt on the chart rows. Far out in a chart the rows are large and
/// badly scaled, and the restrictions in that frame fake common roots.
fn orthonormal_rows(rows: [[C; 4]; 2]) -> Option<[[C; 4]; 2]> {
    let dot = |x: &[C; 4], y: &[C; 4]| -> C { (0..4).map(|i| x[i].conj() * y[i]).sum() };
    let unit = |x: [C; 4]| -> Option<[C; 4]> {
        let n = dot(&x, &x).re.sqrt();
        (n > 0.0 && n.is_finite()).then(|| x.map(|v| v / n))
    };
    let p = unit(rows[0])?;
    let pq = dot(&p, &rows[1]);
    let q = unit(std::array::from_fn(|i| rows[1][i] - p[i] * pq))?;
    Some([p, q])
}

fn record_at(c: &CICurve<C>, rows: [[C; 4]; 2], k: usize) -> Result<Option<SecantRecord>> {
    let Some([p, q]) = orthonormal_rows(rows) else { return Ok(None) };
    let Ok(line) = LineP3::from_points(p, q) else { return Ok(None) };
    let (ra, rb) = c.restrictions_at(&p, &q);
    let scales = (c.fa.restriction_scale(&p, &q), c.fb.restriction_scale(&p, &q));
    match make_record(line, &ra, &rb, scales, k) {
        Err(Error::ContractViolation(_)) => Err(Error::ContractViolation(LINE_IN_CURVE.into())),
        other => other,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Surface {
    A,
    B,
}

/// Records (length at least `k`) of the lines lying on one of the surfaces.
fn surface_line_search(c: &CICurve<C>, which: Surface, k: usize, opts: &SecantOptions, diag: &mut SearchDiagnostics) -> Result<Vec<SecantRecord>> {
    let tag = 0x5f11_0000 + which as u64;
    let mut rng = child_rng(opts.seed, tag);
    let charts = Chart::all(opts.charts, &mut rng);
    // the chart's closure carries a positive-dimensional family at infinity
    // (lines through a point of the base plane), which attracts slow paths
    let solve = SolveOptions {
        singular_cap: 1.0,
        ..opts.solve.clone()
    };
    let sols = solve_charts(&charts, opts.seed, tag, &solve, opts.solver, diag, |chart, rng| {
        let (pa, pb) = symbolic_restrictions(c, chart);
        let f = if which == Surface::A { pa } else { pb };
        let eqs: Vec<MPoly> = f.into_coeffs().into_iter().filter(|p| p.num_terms() > 0).collect();
        square_up(eqs, vec![], 4, 4, rng)
    })?;
    let mut recs = Vec::new();
    for (ci, y) in sols {
        if let Some(r) = screen_candidate(record_at(c, charts[ci].rows_at(&y), k), diag)? {
            recs.push(r);
        }
    }
    Ok(recs)
}

/// Records from the kernel system at exactly `k`.
fn kernel_search_ci(c: &CICurve<C>, k: usize, opts: &SecantOptions, diag: &mut SearchDiagnostics) -> Result<Vec<SecantRecord>> {
    let tag = 0x6369_0000 + k as u64;
    let mut rng = child_rng(opts.seed, tag);
    let charts = Chart::all(opts.charts, &mut rng);
    // same family at infinity as in the surface-line search
    let solve = SolveOptions {
        singular_cap: 1.0,
        ..opts.solve.clone()
    };
    let sols = solve_charts(&charts, opts.seed, tag, &solve, opts.solver, diag, |chart, rng| {
        let (pa, pb) = symbolic_restrictions(c, chart);
        kernel_system(&pa, &pb, k, rng)
    })?;
    let mut recs = Vec::new();
    for (ci, y) in sols {
        if let Some(r) = screen_candidate(record_at(c, charts[ci].rows_at(&y), k), diag)? {
            recs.push(r);
        }
    }
    Ok(recs)
}

/// All lines meeting the curve in length at least `k`.
///
/// A line meeting `C` in length above `a` lies on `F_a` and then meets `C`
/// in length exactly `b`, so for `k > a` only the lines on `F_a` are searched.
/// For `k <= a` the kernel searches at `k..=a` are added, and the lines on
/// `F_b` (length `a`) when `a < b`. A line on both surfaces is a contract
/// violation. For `k = 3` kernel results are a witness sample of a surface.
pub fn find_k_secants_ci<T: Scalar>(c: &CICurve<T>, k: usize, opts: &SecantOptions) -> Result<SecantSearch> {
    if k < 3 {
        return Err(Error::InvalidParameters(format!("k = {k} < 3")));
    }
    let cc = c.to_c64();
    let (a, b) = (c.a(), c.b());
    let mut diag = SearchDiagnostics::default();
    let mut recs = surface_line_search(&cc, Surface::A, k, opts, &mut diag)?;
    if k <= a {
        for kk in k..=a {
            recs.extend(kernel_search_ci(&cc, kk, opts, &mut diag)?);
        }
        if a < b {
            recs.extend(surface_line_search(&cc, Surface::B, k, opts, &mut diag)?);
        }
    }
    Ok(SecantSearch {
        records: finish(recs, k),
        diagnostics: diag,
    })
}

fn order_at(recs: Vec<SecantRecord>, k: usize, diag: SearchDiagnostics) -> SecantOrder {
    let recs = finish(recs, k);
    let l = recs.iter().map(|r| r.length).max().unwrap_or(k);
    let witnesses = recs
        .into_iter()
        .filter(|r| r.length == l)
        .map(|mut r| {
            r.maximal = true;
            r.proper = true;
            r
        })
        .collect();
    SecantOrder {
        l,
        witnesses,
        diagnostics: diag,
    }
}

/// Maximal intersection length of a line with the curve, searched top-down:
/// lines on `F_a` first (length `b`), then the kernel levels `a, a - 1, ..., 3`.
/// Falls back to a chord through two curve points.
pub fn secant_order_ci<T: Scalar>(c: &CICurve<T>, opts: &SecantOptions) -> Result<SecantOrder> {
    let cc = c.to_c64();
    let (a, b) = (c.a(), c.b());
    let mut diag = SearchDiagnostics::default();
    let mut recs = surface_line_search(&cc, Surface::A, b, opts, &mut diag)?;
    if a < b && !recs.is_empty() {
        return Ok(order_at(recs, b, diag));
    }
    for k in (3..=a).rev() {
        recs.extend(kernel_search_ci(&cc, k, opts, &mut diag)?);
        if k == a && a < b {
            recs.extend(surface_line_search(&cc, Surface::B, a, opts, &mut diag)?);
        }
        if !recs.is_empty() {
            return Ok(order_at(recs, k, diag));
        }
    }
    let mut rng = child_rng(opts.seed, 0xc40d);
    let mut pts = Vec::new();
    while pts.len() < 2 {
        pts.extend(plane_section(&cc, &mut rng, &opts.solve)?);
    }
    let rec = record_at(&cc, [pts[0], pts[1]], 2)?
        .ok_or_else(|| Error::ContractViolation("chord meets the curve in fewer than 2 points".into()))?;
    Ok(order_at(vec![rec], 2, diag))
}

/// Full Jacobian-minor solving is used when `a + b` is at most this.
pub const SMOOTH_SOLVE_CAP: usize = 9;
/// Curve points checked above the cap.
pub const SMOOTH_SAMPLES: usize = 10_000;
/// A point is singular when the normalised gradients of the two surfaces have
/// second singular value below this.
pub const SINGULAR_POINT_TOL: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct SmoothnessScreen {
    pub status: Smoothness,
    pub points_checked: usize,
    /// Failed paths leave the screen inconclusive.
    pub path_failures: usize,
    pub singular_points: Vec<[C; 4]>,
}

impl SmoothnessScreen {
    pub fn passed(&self) -> bool {
        self.singular_points.is_empty() && self.path_failures == 0
    }
}

struct Gradients {
    fa: [MPoly; 4],
    fb: [MPoly; 4],
}

impl Gradients {
    fn new(c: &CICurve<C>) -> Self {
        let (ma, mb) = (c.fa.to_mpoly(), c.fb.to_mpoly());
        Gradients {
            fa: std::array::from_fn(|i| ma.partial(i)),
            fb: std::array::from_fn(|i| mb.partial(i)),
        }
    }

    /// Second singular value of the Jacobian at `x`, rows scaled by the
    /// coefficient size of each gradient at `|x|`.
    fn sigma2(&self, x: &[C; 4]) -> f64 {
        let xm = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let row = |g: &[MPoly; 4]| -> Vec<C> {
            let d = g.iter().map(|p| p.total_degree()).max().unwrap_or(0) as i32;
            let s: f64 = g.iter().map(|p| p.terms().map(|(_, c)| c.norm()).sum::<f64>()).sum::<f64>() * xm.powi(d);
            g.iter().map(|p| p.eval(x) / s).collect()
        };
        let (ra, rb) = (row(&self.fa), row(&self.fb));
        let n2 = |v: &[C]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let ip: C = ra.iter().zip(&rb).map(|(u, v)| u.conj() * v).sum();
        let sum = n2(&ra) + n2(&rb);
        let det = (n2(&ra) * n2(&rb) - ip.norm_sqr()).max(0.0);
        (2.0 * det / (sum + (sum * sum - 4.0 * det).max(0.0).sqrt())).sqrt()
    }
}

/// Points of the curve on a random plane.
fn plane_section(c: &CICurve<C>, rng: &mut ChaCha8Rng, opts: &SolveOptions) -> Result<Vec<[C; 4]>> {
    let subs: Vec<MPoly> = (0..4)
        .map(|_| {
            let (c0, c1, c2) = (psolve::gaussian(rng), psolve::gaussian(rng), psolve::gaussian(rng));
            MPoly::affine_linear(c0, &[c1, c2], 0)
        })
        .collect();
    let sys = PolySystem::new(2, vec![c.fa.to_mpoly().compose(&subs), c.fb.to_mpoly().compose(&subs)])?;
    let so = SolveOptions {
        seed: rng.random(),
        ..opts.clone()
    };
    let out = psolve::solve_square_system(&sys, &so)?;
    Ok(out
        .solutions
        .iter()
        .map(|uv| std::array::from_fn(|i| subs[i].eval(uv)))
        .collect())
}

/// Smoothness screen: for `a + b <= SMOOTH_SOLVE_CAP` the system
/// `{F_a, F_b, random combination of the 2x2 Jacobian minors}` is solved in
/// an affine chart in random coordinates and every endpoint, singular ones
/// included, is tested for a rank drop;
/// above the cap the test runs on `SMOOTH_SAMPLES` points from plane sections.
pub fn smoothness_screen<T: Scalar>(c: &CICurve<T>, seed: u64) -> Result<SmoothnessScreen> {
    let cc = c.to_c64();
    let grads = Gradients::new(&cc);
    let mut rng = child_rng(seed, 0x5300_7401);
    let opts = SolveOptions::default();
    let mut singular_points = Vec::new();
    let mut checked = 0;
    if c.a() + c.b() <= SMOOTH_SOLVE_CAP {
        let mut minors = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                minors.push(
                    grads.fa[i].clone() * grads.fb[j].clone() - grads.fa[j].clone() * grads.fb[i].clone(),
                );
            }
        }
        let combo = minors
            .iter()
            .fold(MPoly::zero(), |acc, m| acc + m.scale(psolve::gaussian(&mut rng)));
        let (ma, mb) = (cc.fa.to_mpoly(), cc.fb.to_mpoly());
        // x = M (1, u): one chart in random coordinates
        let subs: Vec<MPoly> = (0..4)
            .map(|_| {
                let c: Vec<C> = (0..4).map(|_| psolve::gaussian(&mut rng)).collect();
                MPoly::affine_linear(c[0], &c[1..], 0)
            })
            .collect();
        let sys = PolySystem::new(3, vec![ma.compose(&subs), mb.compose(&subs), combo.compose(&subs)])?;
        let so = SolveOptions {
            seed: rng.random(),
            singular_cap: 1.0,
            rescue_starts: 0,
            ..opts.clone()
        };
        let out = psolve::solve_square_system(&sys, &so)?;
        let failures = out.diagnostics.path_failures;
        for x in out.solutions.iter().chain(&out.singular) {
            let pt: [C; 4] = std::array::from_fn(|i| subs[i].eval(x));
            checked += 1;
            if grads.sigma2(&pt) <= SINGULAR_POINT_TOL {
                singular_points.push(pt);
            }
        }
        return Ok(SmoothnessScreen {
            status: Smoothness::Verified,
            points_checked: checked,
            path_failures: failures,
            singular_points,
        });
    }
    while checked < SMOOTH_SAMPLES {
        for pt in plane_section(&cc, &mut rng, &opts)? {
            checked += 1;
            if grads.sigma2(&pt) <= SINGULAR_POINT_TOL {
                singular_points.push(pt);
            }
        }
    }
    Ok(SmoothnessScreen {
        status: Smoothness::VerifiedAtSamples,
        points_checked: checked,
        path_failures: 0,
        singular_points,
    })
}

const RETRY_BUDGET: u64 = 20;

fn check_types(a: usize, b: usize) -> Result<()> {
    if a < 2 || a > b {
        return Err(Error::InvalidParameters(format!("need 2 <= a <= b, got ({a}, {b})")));
    }
    Ok(())
}

/// Random integer surfaces, resampled until they meet properly and pass the
/// smoothness screen.
pub fn random_smooth_ci(a: usize, b: usize, seed: u64) -> Result<CICurve<BigRational>> {
    check_types(a, b)?;
    let mut tried = Vec::new();
    for attempt in 0..RETRY_BUDGET {
        let s = seed.wrapping_add(attempt * 0x1_0000_0001);
        tried.push(s);
        let mut rng = child_rng(s, 0xc1_5eed);
        let fa = random_integer_surface(&mut rng, a, 9);
        let fb = random_integer_surface(&mut rng, b, 9);
        let Ok(c) = CICurve::new(fa, fb) else { continue };
        if let Ok(scr) = smoothness_screen(&c, s) {
            if scr.passed() {
                return Ok(c.with_smoothness(scr.status));
            }
        }
    }
    Err(Error::RetryExhausted {
        seeds: tried,
        reason: "no smooth complete intersection".into(),
    })
}

/// A complete intersection with a line on `F_a`.
#[derive(Clone, Debug)]
pub struct PlantedCI {
    pub curve: CICurve<BigRational>,
    pub line: LineP3<BigRational>,
    pub record: SecantRecord,
    /// `a = b`: generality of `F_a` among surfaces through the line is not
    /// checked, so the line need not be the only long secant.
    pub equal_degrees: bool,
    pub seeds: Vec<u64>,
}

fn random_invertible_int(rng: &mut ChaCha8Rng) -> ([[BigRational; 4]; 4], [[BigRational; 4]; 4]) {
    loop {
        let m: [[BigRational; 4]; 4] =
            std::array::from_fn(|_| std::array::from_fn(|_| <BigRational as Scalar>::from_i64(rng.random_range(-2..=2))));
        if let Some(inv) = invert4(&m) {
            return (m, inv);
        }
    }
}

/// `F_a = x2 P + x3 Q` contains `x2 = x3 = 0`; with a random `F_b` and a
/// random coordinate change the line is a `b`-secant. Resampled until the
/// smoothness screen passes.
pub fn construct_ci_with_secant_line(a: usize, b: usize, seed: u64) -> Result<PlantedCI> {
    if a < 4 || a > b {
        return Err(Error::InvalidParameters(format!("need 4 <= a <= b, got ({a}, {b})")));
    }
    let mut tried = Vec::new();
    for attempt in 0..RETRY_BUDGET {
        let s = seed.wrapping_add(attempt * 0x1_0000_0001);
        tried.push(s);
        let mut rng = child_rng(s, 0xc1_91a7);
        let p = random_integer_surface(&mut rng, a - 1, 9);
        let q = random_integer_surface(&mut rng, a - 1, 9);
        let shift = |f: &SurfacePoly<BigRational>, var: usize| -> Vec<(Exponent, BigRational)> {
            f.terms()
                .iter()
                .map(|(e, c)| {
                    let mut e = *e;
                    e[var] += 1;
                    (e, c.clone())
                })
                .collect()
        };
        let Ok(fa) = SurfacePoly::new(a, [shift(&p, 2), shift(&q, 3)].concat()) else { continue };
        let fb = random_integer_surface(&mut rng, b, 9);
        let (g, ginv) = random_invertible_int(&mut rng);
        // F(g^-1 x) vanishes on g L0
        let (fa, fb) = (fa.compose_linear(&ginv)?, fb.compose_linear(&ginv)?);
        let Ok(curve) = CICurve::new(fa, fb) else { continue };
        let col = |j: usize| -> [BigRational; 4] { std::array::from_fn(|i| g[i][j].clone()) };
        let line = LineP3::from_points(col(0), col(1))?;
        if line_intersection_length(&curve, &line)? != b {
            continue;
        }
        let Ok(scr) = smoothness_screen(&curve, s) else { continue };
        if !scr.passed() {
            continue;
        }
        let curve = curve.with_smoothness(scr.status);
        let cc = curve.to_c64();
        let lc = line.to_c64();
        let Some(record) = record_at(&cc, *lc.frame(), b)? else { continue };
        return Ok(PlantedCI {
            curve,
            line,
            record,
            equal_degrees: a == b,
            seeds: tried,
        });
    }
    Err(Error::RetryExhausted {
        seeds: tried,
        reason: "no smooth complete intersection through a line".into(),
    })
}

fn h0(n: usize) -> i64 {
    let n = n as i64;
    (n + 1) * (n + 2) * (n + 3) / 6
}

/// Dimension of the Hilbert scheme of complete intersections of type `(a, b)`.
pub fn hilbert_dim_ci(a: usize, b: usize) -> Result<i64> {
    if a < 1 || a > b {
        return Err(Error::InvalidParameters(format!("need 1 <= a <= b, got ({a}, {b})")));
    }
    if a == b {
        Ok(2 * h0(a) - 4)
    } else {
        Ok(h0(a) + h0(b) - h0(b - a) - 2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub exps: Exponent,
    pub coeff: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CICurveJson {
    pub kind: String,
    pub a: usize,
    pub b: usize,
    pub field: FieldKind,
    #[serde(rename = "Fa")]
    pub fa: Vec<TermJson>,
    #[serde(rename = "Fb")]
    pub fb: Vec<TermJson>,
    #[serde(default)]
    pub smoothness: Smoothness,
}

impl<T: JsonScalar> CICurve<T> {
    pub fn to_json(&self) -> CICurveJson {
        let terms = |f: &SurfacePoly<T>| {
            f.terms()
                .iter()
                .map(|(e, c)| TermJson {
                    exps: *e,
                    coeff: c.to_json(),
                })
                .collect()
        };
        CICurveJson {
            kind: "ci".into(),
            a: self.a(),
            b: self.b(),
            field: T::KIND,
            fa: terms(&self.fa),
            fb: terms(&self.fb),
            smoothness: self.smoothness,
        }
    }

    /// The recorded smoothness status is carried over, not re-checked.
    pub fn from_json(j: &CICurveJson) -> Result<Self> {
        if j.kind != "ci" {
            return Err(Error::Parse(format!("expected kind \"ci\", got {:?}", j.kind)));
        }
        if j.field != T::KIND {
            return Err(Error::FieldMismatch {
                left: T::KIND,
                right: j.field,
            });
        }
        let surface = |d: usize, ts: &[TermJson]| -> Result<SurfacePoly<T>> {
            let terms = ts
                .iter()
                .map(|t| Ok((t.exps, T::from_json(&t.coeff)?)))
                .collect::<Result<Vec<_>>>()?;
            SurfacePoly::new(d, terms)
        };
        let c = CICurve::new(surface(j.a, &j.fa)?, surface(j.b, &j.fb)?)?;
        Ok(c.with_smoothness(j.smoothness))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn sp(d: usize, t: &[([u32; 4], i64)]) -> SurfacePoly<BigRational> {
        SurfacePoly::new(d, t.iter().map(|(e, c)| (*e, rat(*c, 1))).collect()).unwrap()
    }

    fn q4(v: [i64; 4]) -> [BigRational; 4] {
        v.map(|x| rat(x, 1))
    }

    #[test]
    fn restriction_examples() {
        let l = LineP3::from_points(q4([1, 0, 0, 0]), q4([0, 1, 0, 0])).unwrap();
        let quadric = sp(2, &[([1, 0, 0, 1], 1), ([0, 1, 1, 0], -1)]);
        assert!(quadric.restrict_to_line(&l).is_zero());
        let sphere = sp(2, &[([2, 0, 0, 0], 1), ([0, 2, 0, 0], 1), ([0, 0, 2, 0], 1), ([0, 0, 0, 2], 1)]);
        let r = sphere.restrict_to_line(&l);
        assert_eq!(r, BinaryForm::new(vec![rat(1, 1), rat(0, 1), rat(1, 1)]));
    }

    #[test]
    fn restriction_matches_substitution() {
        let mut rng = child_rng(3, 1);
        let f = random_integer_surface(&mut rng, 4, 9).to_c64();
        let p: [C; 4] = std::array::from_fn(|_| psolve::gaussian(&mut rng));
        let q: [C; 4] = std::array::from_fn(|_| psolve::gaussian(&mut rng));
        let r = f.restrict_frame(&p, &q, |c| *c);
        for _ in 0..5 {
            let (s, t) = (psolve::gaussian(&mut rng), psolve::gaussian(&mut rng));
            let x: [C; 4] = std::array::from_fn(|i| p[i] * s + q[i] * t);
            let direct = f.eval(&x);
            let via = r.eval(&crate::binary_forms::PointP1::new(s, t).unwrap());
            assert!((direct - via).norm() <= 1e-12 * f.restriction_scale(&p, &q));
        }
    }

    #[test]
    fn compose_matches_evaluation() {
        let mut rng = child_rng(4, 2);
        let f = random_integer_surface(&mut rng, 3, 5);
        let (m, _) = random_invertible_int(&mut rng);
        let g = f.compose_linear(&m).unwrap();
        let x = q4([2, -1, 3, 1]);
        let mx: [BigRational; 4] = std::array::from_fn(|i| {
            (0..4).fold(rat(0, 1), |acc, j| acc + m[i][j].clone() * x[j].clone())
        });
        assert_eq!(g.eval(&x), f.eval(&mx));
    }

    #[test]
    fn hilbert_dims() {
        assert_eq!(hilbert_dim_ci(1, 1).unwrap(), 4);
        assert_eq!(hilbert_dim_ci(4, 4).unwrap(), 66);
        assert_eq!(hilbert_dim_ci(4, 5).unwrap(), 85);
        assert!(hilbert_dim_ci(3, 2).is_err());
    }

    #[test]
    fn random_small_types() {
        let c = random_smooth_ci(2, 2, 1).unwrap();
        assert_eq!(c.degree(), 4);
        assert_eq!(c.genus(), 1);
        assert_eq!(c.smoothness(), Smoothness::Verified);
        let c = random_smooth_ci(2, 3, 1).unwrap();
        assert_eq!(c.degree(), 6);
        assert_eq!(c.genus(), 4);
    }

    #[test]
    fn cone_section_is_singular() {
        // the cone x1^2 + x2^2 - x3^2 and a quadric through its vertex
        let fa = sp(2, &[([0, 2, 0, 0], 1), ([0, 0, 2, 0], 1), ([0, 0, 0, 2], -1)]);
        let fb = sp(2, &[([1, 1, 0, 0], 1), ([0, 0, 2, 0], 1), ([0, 0, 0, 2], 3), ([0, 1, 0, 1], -1), ([1, 0, 1, 0], 2)]);
        let c = CICurve::new(fa, fb).unwrap();
        let scr = smoothness_screen(&c, 5).unwrap();
        assert!(!scr.passed());
        let v = scr.singular_points[0];
        assert!(v[1].norm() + v[2].norm() + v[3].norm() <= 1e-5 * v[0].norm());
    }

    #[test]
    fn intersection_lengths() {
        let c = random_smooth_ci(2, 2, 3).unwrap();
        let l = LineP3::from_points(q4([1, 2, 0, 5]), q4([0, 3, -1, 1])).unwrap();
        assert_eq!(line_intersection_length(&c, &l).unwrap(), 0);
        // chord through two curve points
        let cc = c.to_c64();
        let mut rng = child_rng(9, 9);
        let pts = plane_section(&cc, &mut rng, &SolveOptions::default()).unwrap();
        let chord = LineP3::from_points(pts[0], pts[1]).unwrap();
        assert_eq!(line_intersection_length(&cc, &chord).unwrap(), 2);
    }

    #[test]
    fn planted_line_on_fa() {
        let p = construct_ci_with_secant_line(4, 5, 1).unwrap();
        assert!(p.curve.fa().restrict_to_line(&p.line).is_zero());
        assert_eq!(line_intersection_length(&p.curve, &p.line).unwrap(), 5);
        assert_eq!(p.record.length, 5);
        assert!(!p.equal_degrees);
    }

    #[test]
    fn json_round_trip() {
        let c = random_smooth_ci(2, 3, 2).unwrap();
        let s = serde_json::to_string(&c.to_json()).unwrap();
        let back: CICurveJson = serde_json::from_str(&s).unwrap();
        assert_eq!(CICurve::<BigRational>::from_json(&back).unwrap(), c);
    }
}
