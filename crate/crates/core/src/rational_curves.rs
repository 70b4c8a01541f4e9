//! Rational space curves given by four binary forms of the same degree.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binary_forms::{
    gcd_form_exact, roots_of_form, BinaryForm, DivisorP1, FormJson, JsonScalar, PointP1,
};
use crate::error::{Error, Result};
use crate::line::LineP3;
use crate::linalg::{numerical_rank, rank, RANK_REL_CUTOFF};
use crate::psolve::{self, MPoly, PolySystem};
use crate::scalar::Scalar;
pub use crate::secant::{SecantOrder, SecantSearch};
use crate::secant::{
    child_rng, common_divisor, finish, kernel_system, make_record, screen_candidate, solve_charts, Chart, SearchDiagnostics,
    SecantOptions, SecantRecord, ZERO_FORM_TOL,
};

type C = Complex64;

/// The map `P^1 -> P^3`, `p -> (f0(p) : f1(p) : f2(p) : f3(p))`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalCurveMap<T> {
    forms: [BinaryForm<T>; 4],
}

impl<T: Scalar> RationalCurveMap<T> {
    /// Four forms of one common degree `d >= 3`. Independence and the absence
    /// of base points are checked by [`validate_embedding`].
    pub fn new(forms: [BinaryForm<T>; 4]) -> Result<Self> {
        let d = forms[0].degree();
        if d < 3 {
            return Err(Error::InvalidParameters(format!("degree {d} < 3")));
        }
        if forms.iter().any(|f| f.degree() != d) {
            return Err(Error::InvalidParameters("forms must share one degree".into()));
        }
        Ok(RationalCurveMap { forms })
    }

    pub fn degree(&self) -> usize {
        self.forms[0].degree()
    }

    pub fn forms(&self) -> &[BinaryForm<T>; 4] {
        &self.forms
    }

    pub fn eval(&self, p: &PointP1<T>) -> [T; 4] {
        std::array::from_fn(|i| self.forms[i].eval(p))
    }

    /// `sum a_c f_c`, the pull-back of the linear form `a`.
    pub fn restrict(&self, a: &[T; 4]) -> BinaryForm<T> {
        let mut out = BinaryForm::zero(self.degree());
        for (f, c) in self.forms.iter().zip(a) {
            out = out.add(&f.scale(c));
        }
        out
    }

    /// Upper bound for the coefficient norm of `restrict(a)`.
    pub fn restriction_scale(&self, a: &[T; 4]) -> f64 {
        self.forms.iter().zip(a).map(|(f, c)| c.magnitude() * f.norm()).sum()
    }

    /// Image under `x -> M x` on `P^3`.
    pub fn transform(&self, m: &[[T; 4]; 4]) -> Self {
        RationalCurveMap {
            forms: std::array::from_fn(|r| self.restrict(&m[r])),
        }
    }

    /// Precompose with a Möbius transformation of the parameter.
    pub fn reparametrize(&self, m: &[[T; 2]; 2]) -> Result<Self> {
        let forms = [0, 1, 2, 3].map(|i| self.forms[i].mobius(m));
        let [a, b, c, d] = forms;
        Ok(RationalCurveMap {
            forms: [a?, b?, c?, d?],
        })
    }

    pub fn coefficient_rows(&self) -> Vec<Vec<T>> {
        self.forms.iter().map(|f| f.coeffs().to_vec()).collect()
    }

    pub fn to_c64(&self) -> RationalCurveMap<C> {
        RationalCurveMap {
            forms: std::array::from_fn(|i| self.forms[i].to_c64()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingFailure {
    BasePoint,
    NonInjective,
    NonImmersive,
    /// The forms are dependent, so the image lies in a plane.
    Degenerate,
}

/// Outcome of [`validate_embedding`]. When there are base points the
/// injectivity and immersion checks are skipped (left empty).
#[derive(Clone, Debug)]
pub struct EmbeddingReport {
    pub independent: bool,
    pub base_locus: DivisorP1<C>,
    /// Pairs of distinct parameters with the same image.
    pub double_points: Vec<(PointP1<C>, PointP1<C>)>,
    /// Parameters where the differential has rank below 2.
    pub non_immersive: Vec<PointP1<C>>,
}

impl EmbeddingReport {
    /// First failing check, in the order base points, injectivity, immersion,
    /// independence.
    pub fn failure(&self) -> Option<EmbeddingFailure> {
        if !self.base_locus.is_empty() {
            Some(EmbeddingFailure::BasePoint)
        } else if !self.double_points.is_empty() {
            Some(EmbeddingFailure::NonInjective)
        } else if !self.non_immersive.is_empty() {
            Some(EmbeddingFailure::NonImmersive)
        } else if !self.independent {
            Some(EmbeddingFailure::Degenerate)
        } else {
            None
        }
    }

    pub fn is_valid(&self) -> bool {
        self.failure().is_none()
    }
}

/// Relative residual below which a double-point or ramification candidate
/// is accepted.
const EMBED_TOL: f64 = 1e-8;
/// Parameter pairs closer than this (chordally) count as diagonal.
const DIAGONAL_TOL: f64 = 1e-6;

/// Check that the curve is a nondegenerate embedding: no base points, no
/// double points off the diagonal, immersive everywhere, independent forms.
pub fn validate_embedding<T: Scalar>(c: &RationalCurveMap<T>) -> Result<EmbeddingReport> {
    validate_embedding_seeded(c, 0)
}

/// [`validate_embedding`] with an explicit seed for the random
/// reparametrisation and the squaring-up combinations.
pub fn validate_embedding_seeded<T: Scalar>(c: &RationalCurveMap<T>, seed: u64) -> Result<EmbeddingReport> {
    if c.forms.iter().all(|f| f.is_zero()) {
        return Err(Error::ContractViolation("all four forms vanish".into()));
    }
    let independent = rank(&c.coefficient_rows(), "independence of the forms")? == 4;
    let base_locus = base_locus(c, seed)?;
    let mut report = EmbeddingReport {
        independent,
        base_locus,
        double_points: vec![],
        non_immersive: vec![],
    };
    if !report.base_locus.is_empty() {
        return Ok(report);
    }
    let cc = c.to_c64();
    report.non_immersive = ramification_points(&cc, seed)?;
    // near a cusp the double-point system has solutions bunched around the
    // diagonal; those belong to the ramification point
    let near_cusp = |p: &PointP1<C>| report.non_immersive.iter().any(|r| r.chordal_distance(p) <= 1e-3);
    report.double_points = double_points(&cc, seed)?
        .into_iter()
        .filter(|(p, q)| !(near_cusp(p) && near_cusp(q)))
        .collect();
    Ok(report)
}

fn base_locus<T: Scalar>(c: &RationalCurveMap<T>, seed: u64) -> Result<DivisorP1<C>> {
    let nonzero: Vec<&BinaryForm<T>> = c.forms.iter().filter(|f| !f.is_zero()).collect();
    if T::EXACT {
        let mut g = nonzero[0].clone();
        for f in &nonzero[1..] {
            g = gcd_form_exact(&g, f)?;
        }
        if g.degree() == 0 {
            return Ok(DivisorP1::empty());
        }
        return roots_of_form(&g.to_c64());
    }
    // the gcd of two generic combinations is the gcd of all four
    let cc = c.to_c64();
    let mut rng = child_rng(seed, 0xba5e);
    let r1: [C; 4] = std::array::from_fn(|_| psolve::gaussian(&mut rng));
    let r2: [C; 4] = std::array::from_fn(|_| psolve::gaussian(&mut rng));
    let (a, b) = (cc.restrict(&r1), cc.restrict(&r2));
    common_divisor(&a, &b, cc.restriction_scale(&r1), cc.restriction_scale(&r2))
}

fn random_mobius(rng: &mut ChaCha8Rng) -> [[C; 2]; 2] {
    std::array::from_fn(|_| std::array::from_fn(|_| psolve::gaussian(rng)))
}

/// Apply `[s:t] -> [a s + b t : c s + d t]` to a point.
fn map_point(m: &[[C; 2]; 2], p: &PointP1<C>) -> PointP1<C> {
    let (s, t) = (*p.s(), *p.t());
    PointP1::new(m[0][0] * s + m[0][1] * t, m[1][0] * s + m[1][1] * t)
        .expect("invertible map")
        .canonical()
}

/// Points where all 2x2 minors of the 4x2 Jacobian `(df/ds, df/dt)` vanish.
fn ramification_points(c: &RationalCurveMap<C>, seed: u64) -> Result<Vec<PointP1<C>>> {
    let mut minors = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let (fi, fj) = (&c.forms[i], &c.forms[j]);
            let m = fi.ds().mul(&fj.dt()).sub(&fj.ds().mul(&fi.dt()));
            let scale = fi.norm() * fj.norm() * (c.degree() * c.degree()) as f64;
            if scale > 0.0 {
                minors.push((m, scale));
            }
        }
    }
    if minors.iter().all(|(m, s)| m.norm() <= EMBED_TOL * s) {
        return Err(Error::ContractViolation("differential vanishes identically".into()));
    }
    let mut rng = child_rng(seed, 0x4a4a);
    let combo = |rng: &mut ChaCha8Rng| {
        let mut out = BinaryForm::zero(2 * c.degree() - 2);
        let mut scale = 0.0;
        for (m, s) in &minors {
            let r = psolve::gaussian(rng) / *s;
            scale += r.norm() * m.norm();
            out = out.add(&m.scale(&r));
        }
        (out, scale)
    };
    let (w1, s1) = combo(&mut rng);
    if w1.norm() <= ZERO_FORM_TOL * s1 {
        return Err(Error::ContractViolation("differential minors vanish identically".into()));
    }
    // every ramification point is a root of one generic combination
    let cand = roots_of_form(&w1)?;
    let mut out = Vec::new();
    for (p, _) in cand.points() {
        if jacobian_rank(c, p)? < 2 {
            out.push(p.clone());
        }
    }
    // and a few random samples
    for _ in 0..8 {
        let p = PointP1::affine(psolve::gaussian(&mut rng));
        if jacobian_rank(c, &p)? < 2 {
            out.push(p);
        }
    }
    Ok(out)
}

fn jacobian_rank(c: &RationalCurveMap<C>, p: &PointP1<C>) -> Result<usize> {
    let n = (p.s().norm_sqr() + p.t().norm_sqr()).sqrt();
    let p = PointP1::new(p.s() / n, p.t() / n)?;
    let rows: Vec<Vec<C>> = c
        .forms
        .iter()
        .map(|f| {
            let s = f.norm().max(f64::MIN_POSITIVE);
            vec![f.ds().eval(&p) / s, f.dt().eval(&p) / s]
        })
        .collect();
    let rep = numerical_rank(&rows, 2, RANK_REL_CUTOFF);
    if rep.is_ambiguous() {
        return Err(Error::RankAmbiguous {
            context: "immersion check",
            gap: rep.gap,
        });
    }
    Ok(rep.rank)
}

/// Coefficients of `F(x) = f(x, 1)` in ascending powers (length `d + 1`).
fn affine_coeffs(f: &BinaryForm<C>) -> Vec<C> {
    f.coeffs().iter().rev().copied().collect()
}

/// `(F_i(x) F_j(y) - F_j(x) F_i(y)) / (x - y)` in the variables `x = 0`, `y = 1`.
fn divided_minor(a: &[C], b: &[C]) -> MPoly {
    let mut p = MPoly::zero();
    for k in 0..a.len() {
        for l in 0..k {
            let ckl = a[k] * b[l] - b[k] * a[l];
            if ckl == C::new(0.0, 0.0) {
                continue;
            }
            for m in 0..(k - l) as u32 {
                let ex = l as u32 + m;
                let ey = l as u32 + (k - l) as u32 - 1 - m;
                p.add_term(vec![ex, ey], ckl);
            }
        }
    }
    p
}

fn double_points(c: &RationalCurveMap<C>, seed: u64) -> Result<Vec<(PointP1<C>, PointP1<C>)>> {
    let mut rng = child_rng(seed, 0xd0b1);
    // a random reparametrisation keeps solutions away from t = 0
    let m = random_mobius(&mut rng);
    let g = c.reparametrize(&m)?;
    let aff: Vec<Vec<C>> = g.forms.iter().map(affine_coeffs).collect();
    let mut minors = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let p = divided_minor(&aff[i], &aff[j]);
            if p.num_terms() > 0 {
                minors.push(p.scale(C::new(1.0 / p.max_coeff(), 0.0)));
            }
        }
    }
    if minors.is_empty() {
        return Err(Error::ContractViolation("degenerate parametrisation".into()));
    }
    let combo = |rng: &mut ChaCha8Rng| {
        minors
            .iter()
            .fold(MPoly::zero(), |acc, p| acc + p.scale(psolve::gaussian(rng)))
    };
    let sys = PolySystem::new(2, vec![combo(&mut rng), combo(&mut rng)])?;
    // endpoints at infinity of the affine chart are expected here
    let opts = psolve::SolveOptions {
        seed: rng.random(),
        singular_cap: 1.0,
        ..Default::default()
    };
    let out = psolve::solve_square_system(&sys, &opts)?;
    let mut pairs: Vec<(PointP1<C>, PointP1<C>)> = Vec::new();
    for x in out.solutions.iter().chain(&out.singular) {
        let (p, q) = (PointP1::affine(x[0]), PointP1::affine(x[1]));
        let (p, q) = (map_point(&m, &p), map_point(&m, &q));
        if p.chordal_distance(&q) <= DIAGONAL_TOL || image_ratio(c, &p, &q) > EMBED_TOL {
            continue;
        }
        let dup = pairs.iter().any(|(a, b)| {
            (a.approx_eq(&p, 1e-6) && b.approx_eq(&q, 1e-6)) || (a.approx_eq(&q, 1e-6) && b.approx_eq(&p, 1e-6))
        });
        if !dup {
            pairs.push((p, q));
        }
    }
    Ok(pairs)
}

/// `sigma_2 / sigma_1` of the two normalised image vectors; zero when the
/// images coincide.
fn image_ratio(c: &RationalCurveMap<C>, p: &PointP1<C>, q: &PointP1<C>) -> f64 {
    let unit = |p: &PointP1<C>| {
        let n = (p.s().norm_sqr() + p.t().norm_sqr()).sqrt();
        let p = PointP1::new(p.s() / n, p.t() / n).expect("nonzero");
        let v = c.eval(&p);
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.map(|z| z / vn)
    };
    let rows = vec![unit(p).to_vec(), unit(q).to_vec()];
    let rep = numerical_rank(&rows, 4, RANK_REL_CUTOFF);
    if rep.singular_values.len() < 2 {
        return 0.0;
    }
    rep.singular_values[1] / rep.singular_values[0]
}

/// Whether the images of `pts` lie on one line.
///
/// Computes both the rank of the evaluation matrix `[f_j(x_i)]` (at most 2)
/// and the dimension of the subspace of the linear system divisible by the
/// form of the point set (at least 2), and errors if they disagree.
pub fn is_aligned<T: Scalar>(c: &RationalCurveMap<T>, pts: &[PointP1<T>]) -> Result<bool> {
    if pts.len() < 2 {
        return Err(Error::InvalidParameters("need at least two points".into()));
    }
    for i in 0..pts.len() {
        for j in 0..i {
            let distinct = if T::EXACT {
                pts[i].canonical() != pts[j].canonical()
            } else {
                pts[i].chordal_distance(&pts[j]) > DIAGONAL_TOL
            };
            if !distinct {
                return Err(Error::InvalidParameters("points must be distinct".into()));
            }
        }
    }
    let by_rank = evaluation_rank(c, pts)? <= 2;
    let by_pencil = pencil_dimension(c, pts)? >= 2;
    if by_rank != by_pencil {
        return Err(Error::ContractViolation(
            "evaluation-rank and pencil-dimension alignment tests disagree".into(),
        ));
    }
    Ok(by_rank)
}

/// Rank of the `k x 4` matrix of values, points scaled to unit norm.
pub fn evaluation_rank<T: Scalar>(c: &RationalCurveMap<T>, pts: &[PointP1<T>]) -> Result<usize> {
    let rows: Vec<Vec<T>> = pts.iter().map(|p| c.eval(&p.canonical()).to_vec()).collect();
    rank(&rows, "evaluation matrix")
}

/// Dimension of `delta ∩ m S_{d-k}` where `m` vanishes on the points:
/// `4 + (d - k + 1) - rank [delta; m S_{d-k}]`.
pub fn pencil_dimension<T: Scalar>(c: &RationalCurveMap<T>, pts: &[PointP1<T>]) -> Result<usize> {
    let d = c.degree();
    let k = pts.len();
    let indep = rank(&c.coefficient_rows(), "independence of the forms")?;
    if k > d {
        // only the zero form vanishes at more than d points
        return Ok(0);
    }
    let mut m = BinaryForm::constant(T::one());
    for p in pts {
        m = m.mul(&p.canonical().vanishing_form());
    }
    let mut rows = c.coefficient_rows();
    for i in 0..=d - k {
        rows.push(m.mul(&BinaryForm::monomial(d - k, i, T::one())).coeffs().to_vec());
    }
    let r = rank(&rows, "pencil dimension")?;
    Ok(indep + (d - k + 1) - r)
}

/// Intersection divisor of the curve with a line, in the curve parameter.
pub fn intersection_divisor_with_line<T: Scalar>(c: &RationalCurveMap<T>, l: &LineP3<T>) -> Result<DivisorP1<C>> {
    let [a, b] = l.dual_frame();
    let (fa, fb) = (c.restrict(a), c.restrict(b));
    if T::EXACT {
        return match (fa.is_zero(), fb.is_zero()) {
            (true, true) => Err(Error::ContractViolation("curve contained in the line".into())),
            (true, false) => roots_of_form(&fb.to_c64()),
            (false, true) => roots_of_form(&fa.to_c64()),
            (false, false) => {
                let g = gcd_form_exact(&fa, &fb)?;
                if g.degree() == 0 {
                    Ok(DivisorP1::empty())
                } else {
                    roots_of_form(&g.to_c64())
                }
            }
        };
    }
    let r = common_divisor(&fa.to_c64(), &fb.to_c64(), c.restriction_scale(a), c.restriction_scale(b));
    match r {
        Err(Error::ContractViolation(_)) => Err(Error::ContractViolation("curve contained in the line".into())),
        other => other,
    }
}

/// Records of all lines found by the kernel search at exactly `k`.
fn kernel_search(c: &RationalCurveMap<C>, k: usize, opts: &SecantOptions, diag: &mut SearchDiagnostics) -> Result<Vec<SecantRecord>> {
    let tag = 0x7261_0000 + k as u64;
    let mut rng = child_rng(opts.seed, tag);
    let charts = Chart::all(opts.charts, &mut rng);
    let pforms: Vec<BinaryForm<MPoly>> = c.forms.iter().map(|f| f.map(|x| MPoly::constant(*x))).collect();
    let restrict_sym = |row: &[MPoly; 4]| {
        let mut out = BinaryForm::zero(c.degree());
        for (f, r) in pforms.iter().zip(row) {
            out = out.add(&f.scale(r));
        }
        out
    };
    let sols = solve_charts(&charts, opts.seed, tag, &opts.solve, opts.solver, diag, |chart, rng| {
        let rows = chart.symbolic_rows();
        kernel_system(&restrict_sym(&rows[0]), &restrict_sym(&rows[1]), k, rng)
    })?;
    let mut recs = Vec::new();
    for (ci, y) in sols {
        let [r0, r1] = charts[ci].rows_at(&y);
        let Ok(line) = LineP3::from_dual(r0, r1) else { continue };
        let (a, b) = (c.restrict(&r0), c.restrict(&r1));
        let scales = (c.restriction_scale(&r0), c.restriction_scale(&r1));
        if let Some(r) = screen_candidate(make_record(line, &a, &b, scales, k), diag)? {
            recs.push(r);
        }
    }
    Ok(recs)
}

/// Check `3 <= k <= d` and validity of the map for secant searches.
fn check_k<T: Scalar>(c: &RationalCurveMap<T>, k: usize) -> Result<()> {
    if k > c.degree() {
        return Err(Error::InvalidParameters(format!(
            "k exceeds curve degree ({k} > {})",
            c.degree()
        )));
    }
    if k < 3 {
        return Err(Error::InvalidParameters(format!("k = {k} < 3")));
    }
    Ok(())
}

/// All lines meeting the curve in length at least `k`.
///
/// For `k >= 4` the set is finite for a general curve and is the union of the
/// isolated solutions of the kernel searches at `k, k + 1, ..., d - 1`
/// (a longer secant is a positive-dimensional kernel component at `k`). For
/// `k = 3` the trisecants form a surface and the result is a witness sample:
/// those meeting one random linear slice of the chart, plus all longer
/// secants. No line meets a nondegenerate curve of degree `d` in length `d`.
pub fn find_k_secants<T: Scalar>(c: &RationalCurveMap<T>, k: usize, opts: &SecantOptions) -> Result<SecantSearch> {
    check_k(c, k)?;
    let cc = c.to_c64();
    let mut diag = SearchDiagnostics::default();
    let mut recs = Vec::new();
    for kk in k..c.degree() {
        recs.extend(kernel_search(&cc, kk, opts, &mut diag)?);
    }
    Ok(SecantSearch {
        records: finish(recs, k),
        diagnostics: diag,
    })
}

/// Maximal intersection length of a line with the curve.
///
/// Searches top-down from `k = d - 1`; the first nonempty level gives `l`
/// (its longest records are the witnesses). When no line of length 3 exists
/// the order is 2, witnessed by a chord through two random curve points.
pub fn secant_order<T: Scalar>(c: &RationalCurveMap<T>, opts: &SecantOptions) -> Result<SecantOrder> {
    let cc = c.to_c64();
    let d = c.degree();
    let mut diag = SearchDiagnostics::default();
    let mut recs: Vec<SecantRecord> = Vec::new();
    for k in (3..d).rev() {
        recs.extend(kernel_search(&cc, k, opts, &mut diag)?);
        if !recs.is_empty() {
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
            return Ok(SecantOrder {
                l,
                witnesses,
                diagnostics: diag,
            });
        }
    }
    let mut rng = child_rng(opts.seed, 0xc40d);
    let p = PointP1::affine(psolve::gaussian(&mut rng));
    let q = PointP1::affine(psolve::gaussian(&mut rng));
    let line = LineP3::from_points(cc.eval(&p), cc.eval(&q))?;
    let [a, b] = *line.dual_frame();
    let rec = make_record(
        line,
        &cc.restrict(&a),
        &cc.restrict(&b),
        (cc.restriction_scale(&a), cc.restriction_scale(&b)),
        2,
    )?
    .ok_or_else(|| Error::ContractViolation("chord meets the curve in fewer than 2 points".into()))?;
    let mut rec = rec;
    rec.maximal = true;
    rec.proper = rec.length == 2;
    Ok(SecantOrder {
        l: 2,
        witnesses: vec![rec],
        diagnostics: diag,
    })
}

/// Random form with integer coefficients in `[-r, r]`.
pub fn random_integer_form(rng: &mut ChaCha8Rng, d: usize, r: i64) -> BinaryForm<BigRational> {
    BinaryForm::new((0..=d).map(|_| <BigRational as Scalar>::from_i64(rng.random_range(-r..=r))).collect())
}

const RETRY_BUDGET: u64 = 20;

/// A valid rational curve of degree `d` with random integer coefficients.
pub fn random_rational_curve(d: usize, seed: u64) -> Result<RationalCurveMap<BigRational>> {
    if d < 3 {
        return Err(Error::InvalidParameters(format!("degree {d} < 3")));
    }
    let mut tried = Vec::new();
    for attempt in 0..RETRY_BUDGET {
        let s = seed.wrapping_add(attempt * 0x1_0000_0001);
        tried.push(s);
        let mut rng = child_rng(s, 0xc0_77e5);
        let forms = std::array::from_fn(|_| random_integer_form(&mut rng, d, 9));
        let c = RationalCurveMap::new(forms)?;
        if let Ok(rep) = validate_embedding(&c) {
            if rep.is_valid() {
                return Ok(c);
            }
        }
    }
    Err(Error::RetryExhausted {
        seeds: tried,
        reason: "no valid random curve".into(),
    })
}

fn random_point_q(rng: &mut ChaCha8Rng) -> PointP1<BigRational> {
    let a = rng.random_range(-9..=9i64);
    let b = rng.random_range(1..=5i64);
    PointP1::affine(crate::scalar::rat(a, b))
}

/// Distinct random rational points.
pub fn random_points_q(rng: &mut ChaCha8Rng, k: usize) -> Vec<PointP1<BigRational>> {
    let mut pts: Vec<PointP1<BigRational>> = Vec::new();
    while pts.len() < k {
        let p = random_point_q(rng);
        if !pts.iter().any(|q| q.canonical() == p.canonical()) {
            pts.push(p);
        }
    }
    pts
}

fn random_invertible_q(rng: &mut ChaCha8Rng) -> ([[BigRational; 4]; 4], [[BigRational; 4]; 4]) {
    loop {
        let m: [[BigRational; 4]; 4] = std::array::from_fn(|_| {
            std::array::from_fn(|_| <BigRational as Scalar>::from_i64(rng.random_range(-3..=3)))
        });
        if let Some(inv) = invert4(&m) {
            return (m, inv);
        }
    }
}

/// Exact inverse by Gauss–Jordan.
pub(crate) fn invert4<T: Scalar>(m: &[[T; 4]; 4]) -> Option<[[T; 4]; 4]> {
    let mut a: Vec<Vec<T>> = (0..4)
        .map(|i| {
            let mut r = m[i].to_vec();
            r.extend((0..4).map(|j| if i == j { T::one() } else { T::zero() }));
            r
        })
        .collect();
    for col in 0..4 {
        let piv = (col..4).max_by(|&x, &y| a[x][col].magnitude().total_cmp(&a[y][col].magnitude()))?;
        if a[piv][col].magnitude() <= if T::EXACT { 0.0 } else { 1e-12 } {
            return None;
        }
        a.swap(col, piv);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = v.clone() / p.clone();
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col].clone();
                for j in 0..8 {
                    let v = a[col][j].clone() * f.clone();
                    a[r][j] = a[r][j].clone() - v;
                }
            }
        }
    }
    Some(std::array::from_fn(|i| std::array::from_fn(|j| a[i][4 + j].clone())))
}

/// A curve with a planted line of intersection length exactly `k`.
#[derive(Clone, Debug)]
pub struct PlantedCurve {
    pub curve: RationalCurveMap<BigRational>,
    /// The planted line, exact.
    pub line: LineP3<BigRational>,
    /// The planted degree-`k` divisor on the parameter line.
    pub divisor: DivisorP1<BigRational>,
    pub record: SecantRecord,
    /// Seeds tried, the last one succeeded.
    pub seeds: Vec<u64>,
}

/// Draw a degree-`k` divisor `D` with form `m`; the pencil `{m u, m v}`
/// (`u, v` coprime of degree `d - k`, or `s, t` when `k = d - 1`) plus two
/// random forms span the linear system, in random coordinates. Seeds are
/// retried until the map is a valid embedding.
pub fn construct_with_k_secant(d: usize, k: usize, seed: u64) -> Result<PlantedCurve> {
    if d < 4 || k < 3 || k + 1 > d {
        return Err(Error::InvalidParameters(format!(
            "need 3 <= k <= d - 1 and d >= 4, got d = {d}, k = {k}"
        )));
    }
    let mut seeds = Vec::new();
    for attempt in 0..RETRY_BUDGET {
        let s = seed.wrapping_add(attempt * 0x1_0000_0001);
        seeds.push(s);
        let mut rng = child_rng(s, 0x91a7);
        let pts = random_points_q(&mut rng, k);
        let divisor = DivisorP1::new(pts.iter().map(|p| (p.clone(), 1)).collect());
        let m = pts
            .iter()
            .fold(BinaryForm::constant(<BigRational as Scalar>::from_i64(1)), |acc, p| acc.mul(&p.vanishing_form()));
        let (u, v) = if k + 1 == d {
            (BinaryForm::linear(num_traits::One::one(), num_traits::Zero::zero()), BinaryForm::linear(num_traits::Zero::zero(), num_traits::One::one()))
        } else {
            let u = random_integer_form(&mut rng, d - k, 5);
            let v = random_integer_form(&mut rng, d - k, 5);
            if u.is_zero() || v.is_zero() || gcd_form_exact(&u, &v)?.degree() > 0 {
                continue;
            }
            (u, v)
        };
        let base = [
            m.mul(&u),
            m.mul(&v),
            random_integer_form(&mut rng, d, 9),
            random_integer_form(&mut rng, d, 9),
        ];
        let base = RationalCurveMap::new(base)?;
        let (g, ginv) = random_invertible_q(&mut rng);
        let curve = base.transform(&g);
        if !matches!(validate_embedding(&curve), Ok(rep) if rep.is_valid()) {
            continue;
        }
        // x0 = x1 = 0 in the original coordinates
        let line = LineP3::from_dual(ginv[0].clone(), ginv[1].clone())?;
        let cc = curve.to_c64();
        let lc = line.to_c64();
        let inter = intersection_divisor_with_line(&curve, &line)?;
        let [a, b] = *lc.dual_frame();
        let (fa, fb) = (cc.restrict(&a), cc.restrict(&b));
        let residual = crate::secant::divisor_residual(&fa, &fb, &inter);
        let record = SecantRecord {
            line: lc,
            reduced: inter.is_reduced(),
            length: inter.degree(),
            proper: inter.degree() == k,
            maximal: k + 1 == d,
            divisor: inter,
            residual,
        };
        return Ok(PlantedCurve {
            curve,
            line,
            divisor,
            record,
            seeds,
        });
    }
    Err(Error::RetryExhausted {
        seeds,
        reason: format!("no valid curve with a planted {k}-secant in degree {d}"),
    })
}

/// Curve JSON: `{"kind": "rational", "degree": d, "forms": [4 forms]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalCurveJson {
    pub kind: String,
    pub degree: usize,
    pub forms: Vec<FormJson>,
}

impl<T: JsonScalar> RationalCurveMap<T> {
    pub fn to_json(&self) -> RationalCurveJson {
        RationalCurveJson {
            kind: "rational".into(),
            degree: self.degree(),
            forms: self.forms.iter().map(|f| f.to_json()).collect(),
        }
    }

    pub fn from_json(j: &RationalCurveJson) -> Result<Self> {
        if j.kind != "rational" {
            return Err(Error::Parse(format!("expected kind \"rational\", got {:?}", j.kind)));
        }
        if j.forms.len() != 4 {
            return Err(Error::Parse(format!("expected 4 forms, got {}", j.forms.len())));
        }
        let forms = j.forms.iter().map(BinaryForm::from_json).collect::<Result<Vec<_>>>()?;
        if forms.iter().any(|f| f.degree() != j.degree) {
            return Err(Error::Parse("form degree differs from the curve degree".into()));
        }
        let [a, b, c, d]: [BinaryForm<T>; 4] = forms.try_into().expect("length checked");
        RationalCurveMap::new([a, b, c, d])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use rand::SeedableRng;

    fn q(v: &[i64]) -> BinaryForm<BigRational> {
        BinaryForm::new(v.iter().map(|&x| rat(x, 1)).collect())
    }

    pub(crate) fn twisted_cubic() -> RationalCurveMap<BigRational> {
        RationalCurveMap::new([q(&[1, 0, 0, 0]), q(&[0, 1, 0, 0]), q(&[0, 0, 1, 0]), q(&[0, 0, 0, 1])]).unwrap()
    }

    #[test]
    fn embedding_examples() {
        assert!(validate_embedding(&twisted_cubic()).unwrap().is_valid());
        // s^4, s^3 t, s^2 t^2, s t^3: base point where s = 0
        let c = RationalCurveMap::new([
            q(&[1, 0, 0, 0, 0]),
            q(&[0, 1, 0, 0, 0]),
            q(&[0, 0, 1, 0, 0]),
            q(&[0, 0, 0, 1, 0]),
        ])
        .unwrap();
        let rep = validate_embedding(&c).unwrap();
        assert_eq!(rep.failure(), Some(EmbeddingFailure::BasePoint));
        assert_eq!(rep.base_locus.degree(), 1);
        let zero_s = PointP1::new(C::new(0.0, 0.0), C::new(1.0, 0.0)).unwrap();
        assert_eq!(rep.base_locus.multiplicity_of(&zero_s, 1e-12), 1);
        // nodal plane cubic: [1:1] and [1:-1] have the same image
        let c = RationalCurveMap::new([q(&[1, 0, -1, 0]), q(&[0, 1, 0, -1]), q(&[0, 0, 0, 1]), q(&[0, 0, 0, 0])]).unwrap();
        let one = PointP1::new(rat(1, 1), rat(1, 1)).unwrap();
        let minus = PointP1::new(rat(1, 1), rat(-1, 1)).unwrap();
        let (a, b) = (c.eval(&one), c.eval(&minus));
        assert!((0..4).all(|i| (0..4).all(|j| a[i].clone() * b[j].clone() == a[j].clone() * b[i].clone())));
        let rep = validate_embedding(&c).unwrap();
        assert_eq!(rep.failure(), Some(EmbeddingFailure::NonInjective));
        assert_eq!(rep.double_points.len(), 1);
        let (p, r) = &rep.double_points[0];
        let hit = |x: &PointP1<C>| x.approx_eq(&one.to_c64(), 1e-8) || x.approx_eq(&minus.to_c64(), 1e-8);
        assert!(hit(p) && hit(r));
    }

    #[test]
    fn cuspidal_curve_is_not_immersive() {
        // (s^4, s^2 t^2, s t^3, t^4) has a cusp at [1:0]
        let c = RationalCurveMap::new([
            q(&[1, 0, 0, 0, 0]),
            q(&[0, 0, 1, 0, 0]),
            q(&[0, 0, 0, 1, 0]),
            q(&[0, 0, 0, 0, 1]),
        ])
        .unwrap();
        let rep = validate_embedding(&c).unwrap();
        assert_eq!(rep.failure(), Some(EmbeddingFailure::NonImmersive));
    }

    #[test]
    fn alignment_examples() {
        let c = twisted_cubic();
        let pts = vec![
            PointP1::new(rat(1, 1), rat(0, 1)).unwrap(),
            PointP1::new(rat(0, 1), rat(1, 1)).unwrap(),
            PointP1::new(rat(1, 1), rat(1, 1)).unwrap(),
        ];
        assert!(is_aligned(&c, &pts[..2]).unwrap());
        assert!(!is_aligned(&c, &pts).unwrap());
        assert_eq!(evaluation_rank(&c, &pts).unwrap(), 3);
    }

    #[test]
    fn chord_of_twisted_cubic() {
        let c = twisted_cubic();
        // x1 = x2 = 0 restricts to s^2 t and s t^2
        let e = |i: usize| std::array::from_fn(|j| rat((i == j) as i64, 1));
        let l = LineP3::from_dual(e(1), e(2)).unwrap();
        let d = intersection_divisor_with_line(&c, &l).unwrap();
        assert_eq!(d.degree(), 2);
        assert!(d.is_reduced());
        let inf = PointP1::<C>::infinity();
        let zero = PointP1::affine(C::new(0.0, 0.0));
        assert_eq!(d.multiplicity_of(&inf, 1e-12), 1);
        assert_eq!(d.multiplicity_of(&zero, 1e-12), 1);
        // numeric path agrees
        let dn = intersection_divisor_with_line(&c.to_c64(), &l.to_c64()).unwrap();
        assert!(dn.approx_eq(&d, 1e-8));
        // a generic line misses
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: [C; 4] = std::array::from_fn(|_| psolve::gaussian(&mut rng));
        let b: [C; 4] = std::array::from_fn(|_| psolve::gaussian(&mut rng));
        let g = LineP3::from_dual(a, b).unwrap();
        assert!(intersection_divisor_with_line(&c.to_c64(), &g).unwrap().is_empty());
    }

    #[test]
    fn planted_construction_contains_its_divisor() {
        for (d, k) in [(5, 4), (6, 4), (7, 6), (6, 3)] {
            let p = construct_with_k_secant(d, k, 11).unwrap();
            assert!(validate_embedding(&p.curve).unwrap().is_valid());
            assert_eq!(p.record.length, k, "d={d} k={k}");
            assert!(p.record.proper);
            assert!(p.record.divisor.contains(&p.divisor.to_c64(), 1e-8));
            let pts: Vec<PointP1<BigRational>> = p.divisor.points().iter().map(|(x, _)| x.clone()).collect();
            assert!(is_aligned(&p.curve, &pts).unwrap());
        }
    }

    #[test]
    fn json_round_trip() {
        let c = twisted_cubic();
        let j = serde_json::to_string(&c.to_json()).unwrap();
        let back: RationalCurveJson = serde_json::from_str(&j).unwrap();
        assert_eq!(RationalCurveMap::<BigRational>::from_json(&back).unwrap(), c);
    }
}
