//! Shared k-secant machinery: Grassmannian charts, the kernel system whose
//! solutions are lines of intersection length at least `k`, chart solving,
//! deduplication and verification.
//!
//! A line is represented in a chart by a `2 x 4` matrix `[I | Y] T` with four
//! free entries `Y`. What the rows mean (dual forms or frame points) depends
//! on the curve type; the caller supplies the two restricted binary forms
//! `A(y)`, `B(y)`. The line has intersection length at least `k` iff
//! `deg gcd(A, B) >= k`, iff `u A + v B = 0` for some nonzero pair with
//! `deg u = deg B - k` and `deg v = deg A - k`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binary_forms::{gcd_degree_subresultant, roots_of_form, BinaryForm, DivisorP1, PointP1};
use crate::error::{Error, Result};
use crate::line::LineP3;
use crate::linalg::{numerical_rank, RANK_REL_CUTOFF};
use crate::psolve::{self, MPoly, PolySystem, SolveDiagnostics, SolveOptions};
use num_traits::Zero;

type C = Complex64;
type CForm = BinaryForm<C>;
type PForm = BinaryForm<MPoly>;

/// Restricted forms below this fraction of their a-priori scale count as
/// identically zero (the line lies on the corresponding hypersurface).
pub const ZERO_FORM_TOL: f64 = 1e-8;
/// Lines closer than this in normalised Plücker coordinates are identified.
pub const LINE_DEDUP_TOL: f64 = 1e-6;
/// Verified records must have divisor residual at most this.
pub const RECORD_RESIDUAL_TOL: f64 = 1e-8;

/// A verified line with its intersection divisor on the curve.
#[derive(Clone, Debug)]
pub struct SecantRecord {
    pub line: LineP3<C>,
    /// Intersection divisor, in the curve's parameter (rational curves) or in
    /// the line's own frame parameter (complete intersections).
    pub divisor: DivisorP1<C>,
    pub length: usize,
    pub proper: bool,
    pub maximal: bool,
    pub reduced: bool,
    pub residual: f64,
}

fn pair(c: &C) -> [f64; 2] {
    [c.re, c.im]
}

/// A point of a record's divisor: homogeneous coordinates and multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorPointJson {
    pub s: [f64; 2],
    pub t: [f64; 2],
    pub multiplicity: usize,
}

/// Report form of a [`SecantRecord`]; complex numbers are `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecantRecordJson {
    /// Plücker coordinates scaled to unit norm with the largest entry real positive.
    pub plucker: Vec<[f64; 2]>,
    pub frame: Vec<Vec<[f64; 2]>>,
    pub divisor: Vec<DivisorPointJson>,
    pub length: usize,
    pub proper: bool,
    pub maximal: bool,
    pub reduced: bool,
    pub residual: f64,
}

impl SecantRecord {
    pub fn to_json(&self) -> SecantRecordJson {
        SecantRecordJson {
            plucker: self.line.normalized_plucker().iter().map(pair).collect(),
            frame: self.line.frame().iter().map(|p| p.iter().map(pair).collect()).collect(),
            divisor: self
                .divisor
                .points()
                .iter()
                .map(|(p, m)| DivisorPointJson {
                    s: pair(p.s()),
                    t: pair(p.t()),
                    multiplicity: *m,
                })
                .collect(),
            length: self.length,
            proper: self.proper,
            maximal: self.maximal,
            reduced: self.reduced,
            residual: self.residual,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartMode {
    /// The six coordinate charts of the Grassmannian.
    Coordinate,
    /// One chart in randomly chosen coordinates; covers every line outside a
    /// measure-zero set.
    Generic,
}

/// How the chart systems are solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Homotopy,
    /// Damped Newton from random starts; finds nonsingular solutions only
    /// and has no completeness guarantee. Used as an oracle.
    Multistart { starts: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct SecantOptions {
    pub seed: u64,
    pub charts: ChartMode,
    pub solve: SolveOptions,
    pub solver: SolverKind,
}

impl Default for SecantOptions {
    fn default() -> Self {
        SecantOptions {
            seed: 0,
            charts: ChartMode::Generic,
            solve: SolveOptions::default(),
            solver: SolverKind::Homotopy,
        }
    }
}

/// Summed solver diagnostics of a search.
#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct SearchDiagnostics {
    pub systems_solved: usize,
    pub paths_tracked: usize,
    pub path_failures: usize,
    pub singular_endpoints: usize,
    pub candidates: usize,
    pub rescued: usize,
    /// Endpoints dropped because their gcd degree was numerically ambiguous.
    pub ambiguous_candidates: usize,
}

impl SearchDiagnostics {
    fn absorb(&mut self, d: &SolveDiagnostics) {
        self.systems_solved += 1;
        self.paths_tracked += d.paths_tracked;
        self.path_failures += d.path_failures;
        self.singular_endpoints += d.singular_endpoints;
        self.rescued += d.rescued as usize;
    }

    pub fn merge(&mut self, o: &SearchDiagnostics) {
        self.systems_solved += o.systems_solved;
        self.paths_tracked += o.paths_tracked;
        self.path_failures += o.path_failures;
        self.singular_endpoints += o.singular_endpoints;
        self.candidates += o.candidates;
        self.rescued += o.rescued;
        self.ambiguous_candidates += o.ambiguous_candidates;
    }
}

/// `[I | Y] T` with `T` invertible.
#[derive(Clone, Debug)]
pub(crate) struct Chart {
    t: [[C; 4]; 4],
}

impl Chart {
    fn coordinate(i: usize, j: usize) -> Self {
        let free: Vec<usize> = (0..4).filter(|&c| c != i && c != j).collect();
        let order = [i, j, free[0], free[1]];
        let mut t = [[C::new(0.0, 0.0); 4]; 4];
        for (r, &c) in order.iter().enumerate() {
            t[r][c] = C::new(1.0, 0.0);
        }
        Chart { t }
    }

    fn generic(rng: &mut ChaCha8Rng) -> Self {
        // a random unitary via QR of a Gaussian matrix
        let g = DMatrix::from_fn(4, 4, |_, _| psolve::gaussian(rng));
        let q = g.qr().q();
        let mut t = [[C::new(0.0, 0.0); 4]; 4];
        for (r, row) in t.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = q[(r, c)];
            }
        }
        Chart { t }
    }

    pub(crate) fn all(mode: ChartMode, rng: &mut ChaCha8Rng) -> Vec<Chart> {
        match mode {
            ChartMode::Coordinate => {
                let mut v = Vec::new();
                for i in 0..4 {
                    for j in i + 1..4 {
                        v.push(Chart::coordinate(i, j));
                    }
                }
                v
            }
            ChartMode::Generic => vec![Chart::generic(rng)],
        }
    }

    /// The two rows as vectors of affine-linear polynomials in `y0..y3`.
    pub(crate) fn symbolic_rows(&self) -> [[MPoly; 4]; 2] {
        let row = |r: usize| -> [MPoly; 4] {
            std::array::from_fn(|c| {
                MPoly::affine_linear(self.t[r][c], &[self.t[2][c], self.t[3][c]], 2 * r)
            })
        };
        [row(0), row(1)]
    }

    pub(crate) fn rows_at(&self, y: &[C]) -> [[C; 4]; 2] {
        let row = |r: usize| -> [C; 4] {
            std::array::from_fn(|c| self.t[r][c] + y[2 * r] * self.t[2][c] + y[2 * r + 1] * self.t[3][c])
        };
        [row(0), row(1)]
    }
}


fn mix(seed: u64, tag: u64) -> u64 {
    // splitmix64 step
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Reproducible child RNG for a labelled sub-task.
pub(crate) fn child_rng(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, tag))
}

/// Bring `eqs` in `n` unknowns to a square system: random combinations when
/// there are too many, random affine slices in the first `n_slice` unknowns
/// when too few. `None` if slicing would be needed beyond those unknowns.
pub(crate) fn square_up(mut eqs: Vec<MPoly>, keep: Vec<MPoly>, n: usize, n_slice: usize, rng: &mut ChaCha8Rng) -> Option<PolySystem> {
    let free = n.checked_sub(keep.len())?;
    if eqs.len() > free {
        let mixed: Vec<MPoly> = (0..free)
            .map(|_| {
                eqs.iter()
                    .fold(MPoly::zero(), |acc, e| acc + e.scale(psolve::gaussian(rng)))
            })
            .collect();
        eqs = mixed;
    } else if eqs.len() < free {
        let missing = free - eqs.len();
        if missing > n_slice {
            return None;
        }
        for _ in 0..missing {
            let coeffs: Vec<C> = (0..n_slice).map(|_| psolve::gaussian(rng)).collect();
            eqs.push(MPoly::affine_linear(psolve::gaussian(rng), &coeffs, 0));
        }
    }
    eqs.extend(keep);
    PolySystem::new(n, eqs).ok()
}

/// The kernel system for `deg gcd(A, B) >= k` in the chart unknowns
/// `y0..y3`, followed by the coefficients of `u` and `v` and a random
/// normalisation. `None` when `k` exceeds either degree.
pub(crate) fn kernel_system(a: &PForm, b: &PForm, k: usize, rng: &mut ChaCha8Rng) -> Option<PolySystem> {
    let (da, db) = (a.degree(), b.degree());
    if k == 0 || k > da || k > db {
        return None;
    }
    let nu = db - k + 1;
    let nv = da - k + 1;
    let u = BinaryForm::new((0..nu).map(|i| MPoly::var(4 + i)).collect());
    let v = BinaryForm::new((0..nv).map(|i| MPoly::var(4 + nu + i)).collect());
    let eqs: Vec<MPoly> = u
        .mul(a)
        .add(&v.mul(b))
        .into_coeffs()
        .into_iter()
        .filter(|p| p.num_terms() > 0)
        .collect();
    let n = 4 + nu + nv;
    let coeffs: Vec<C> = (0..nu + nv).map(|_| psolve::gaussian(rng)).collect();
    let norm = MPoly::affine_linear(C::new(-1.0, 0.0), &coeffs, 4);
    square_up(eqs, vec![norm], n, 4, rng)
}

/// Chart coordinates of every isolated solution (regular and singular
/// endpoints alike) of the per-chart systems produced by `build`.
pub(crate) fn solve_charts(
    charts: &[Chart],
    seed: u64,
    tag: u64,
    opts: &SolveOptions,
    solver: SolverKind,
    diag: &mut SearchDiagnostics,
    mut build: impl FnMut(&Chart, &mut ChaCha8Rng) -> Option<PolySystem>,
) -> Result<Vec<(usize, Vec<C>)>> {
    let mut out = Vec::new();
    for (ci, chart) in charts.iter().enumerate() {
        let mut rng = child_rng(seed, tag.wrapping_mul(31).wrapping_add(ci as u64));
        let Some(sys) = build(chart, &mut rng) else { continue };
        let so = SolveOptions {
            seed: mix(seed, tag ^ (0x5151 + ci as u64)),
            ..opts.clone()
        };
        match solver {
            SolverKind::Homotopy => {
                let res = psolve::solve_square_system(&sys, &so)?;
                diag.absorb(&res.diagnostics);
                for x in res.solutions.into_iter().chain(res.singular) {
                    out.push((ci, x[..4].to_vec()));
                }
            }
            SolverKind::Multistart { starts } => {
                diag.systems_solved += 1;
                for x in psolve::multistart_newton(&sys, starts, &so) {
                    out.push((ci, x[..4].to_vec()));
                }
            }
        }
    }
    diag.candidates += out.len();
    Ok(out)
}

/// Keep the first of every group of coincident lines.
pub fn dedup_lines<T: Clone>(items: Vec<T>, line_of: impl Fn(&T) -> &LineP3<C>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for it in items {
        if !out.iter().any(|o| line_of(o).same_line(line_of(&it), LINE_DEDUP_TOL)) {
            out.push(it);
        }
    }
    out
}

/// Sort records by normalised Plücker coordinates, for reproducible output.
pub fn sort_records(recs: &mut [SecantRecord]) {
    recs.sort_by(|a, b| {
        let (pa, pb) = (a.line.normalized_plucker(), b.line.normalized_plucker());
        for (x, y) in pa.iter().zip(&pb) {
            let o = round_key(x.re).total_cmp(&round_key(y.re)).then(round_key(x.im).total_cmp(&round_key(y.im)));
            if o != std::cmp::Ordering::Equal {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    });
}

fn round_key(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Degree of `gcd(a, b)` for nonzero complex forms: principal subresultants,
/// with a gap-checked Sylvester rank as fallback when a subresultant lands
/// near its threshold.
pub fn numeric_gcd_degree(a: &CForm, b: &CForm) -> Result<usize> {
    match gcd_degree_subresultant(a, b) {
        Ok(k) => Ok(k),
        Err(Error::AmbiguousThreshold { .. }) => {
            let (m, n) = (a.degree(), b.degree());
            let rows = sylvester(&a.unit()?, &b.unit()?);
            let rep = numerical_rank(&rows, m + n, RANK_REL_CUTOFF);
            if rep.is_ambiguous() {
                return Err(Error::RankAmbiguous {
                    context: "Sylvester gcd degree",
                    gap: rep.gap,
                });
            }
            Ok(m + n - rep.rank)
        }
        Err(e) => Err(e),
    }
}

/// Rows of the Sylvester matrix: `n` shifts of `a`, then `m` shifts of `b`.
fn sylvester(a: &CForm, b: &CForm) -> Vec<Vec<C>> {
    let (m, n) = (a.degree(), b.degree());
    let mut rows = Vec::with_capacity(m + n);
    for (f, shifts) in [(a, n), (b, m)] {
        for s in 0..shifts {
            let mut r = vec![C::new(0.0, 0.0); m + n];
            for (i, c) in f.coeffs().iter().enumerate() {
                r[s + i] = *c;
            }
            rows.push(r);
        }
    }
    rows
}

/// Approximate gcd of degree `k`: the kernel `(u, v)` of
/// `(u, v) -> u a + v b` gives the cofactor `a' = -v` up to scale, and the
/// gcd follows from `a = g a'` by least squares.
pub fn numeric_gcd_form(a: &CForm, b: &CForm, k: usize) -> Result<CForm> {
    let (da, db) = (a.degree(), b.degree());
    if k == 0 {
        return Ok(BinaryForm::constant(C::new(1.0, 0.0)));
    }
    if k > da.min(db) {
        return Err(Error::InvalidParameters("gcd degree exceeds the form degrees".into()));
    }
    let (a, b) = (a.unit()?, b.unit()?);
    let nu = db - k + 1;
    let nv = da - k + 1;
    let rows = da + db - k + 1;
    let mut m = DMatrix::<C>::zeros(rows, nu + nv);
    for j in 0..nu {
        for (i, c) in a.coeffs().iter().enumerate() {
            m[(i + j, j)] = *c;
        }
    }
    for j in 0..nv {
        for (i, c) in b.coeffs().iter().enumerate() {
            m[(i + j, nu + j)] = *c;
        }
    }
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.ok_or(Error::SingularMatrix)?;
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, s)| if *s < acc.1 { (i, *s) } else { acc });
    // smallest right singular vector, padded when the matrix is wide
    let null: Vec<C> = if vt.nrows() < nu + nv {
        full_null(&m)
    } else {
        (0..nu + nv).map(|j| vt[(imin, j)].conj()).collect()
    };
    let cof: Vec<C> = null[nu..].to_vec();
    // a = g * cof: columns are shifts of cof
    let mut mm = DMatrix::<C>::zeros(da + 1, k + 1);
    for j in 0..=k {
        for (i, c) in cof.iter().enumerate() {
            mm[(i + j, j)] = *c;
        }
    }
    let rhs = DVector::from_iterator(da + 1, a.coeffs().iter().copied());
    let g = mm
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|_| Error::SingularMatrix)?;
    Ok(BinaryForm::new(g.iter().copied().collect()))
}

fn full_null(m: &DMatrix<C>) -> Vec<C> {
    // pad with zero rows so the SVD is square
    let n = m.ncols();
    let mut sq = DMatrix::<C>::zeros(n.max(m.nrows()), n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, s)| if *s < acc.1 { (i, *s) } else { acc });
    (0..n).map(|j| vt[(imin, j)].conj()).collect()
}

/// Divisor of `gcd(a, b)` given a-priori scales for the zero tests. A form
/// below [`ZERO_FORM_TOL`] times its scale is treated as identically zero and
/// the divisor comes from the other one.
pub fn common_divisor(a: &CForm, b: &CForm, scale_a: f64, scale_b: f64) -> Result<DivisorP1<C>> {
    let za = a.norm() <= ZERO_FORM_TOL * scale_a;
    let zb = b.norm() <= ZERO_FORM_TOL * scale_b;
    match (za, zb) {
        (true, true) => Err(Error::ContractViolation("both restrictions vanish identically".into())),
        (true, false) => roots_of_form(b),
        (false, true) => roots_of_form(a),
        (false, false) => {
            let k = numeric_gcd_degree(a, b)?;
            if k == 0 {
                return Ok(DivisorP1::empty());
            }
            let g = numeric_gcd_form(a, b, k)?;
            let d = roots_of_form(&g)?;
            if d.degree() != k {
                return Err(Error::ContractViolation(format!(
                    "gcd form of degree {k} has {} roots",
                    d.degree()
                )));
            }
            Ok(d)
        }
    }
}

/// Largest relative value of the restrictions on the divisor points.
pub fn divisor_residual(a: &CForm, b: &CForm, d: &DivisorP1<C>) -> f64 {
    let rel = |f: &CForm, p: &PointP1<C>| -> f64 {
        let n = f.norm();
        if n == 0.0 {
            return 0.0;
        }
        let ps = (p.s().norm_sqr() + p.t().norm_sqr()).sqrt();
        let p = PointP1::new(p.s() / ps, p.t() / ps).expect("nonzero");
        f.eval(&p).norm() / n
    };
    d.points()
        .iter()
        .map(|(p, _)| rel(a, p).max(rel(b, p)))
        .fold(0.0, f64::max)
}

/// A record for `line` when its intersection length is at least `k` and the
/// divisor passes the residual check.
pub(crate) fn make_record(line: LineP3<C>, a: &CForm, b: &CForm, scales: (f64, f64), k: usize) -> Result<Option<SecantRecord>> {
    let divisor = common_divisor(a, b, scales.0, scales.1)?;
    let length = divisor.degree();
    if length < k {
        return Ok(None);
    }
    // a restriction flagged as identically zero does not enter the residual
    let zero = |f: &CForm, scale: f64| if f.norm() <= ZERO_FORM_TOL * scale { BinaryForm::zero(f.degree()) } else { f.clone() };
    let residual = divisor_residual(&zero(a, scales.0), &zero(b, scales.1), &divisor);
    if residual > RECORD_RESIDUAL_TOL {
        return Ok(None);
    }
    Ok(Some(SecantRecord {
        line,
        reduced: divisor.is_reduced(),
        divisor,
        length,
        proper: length == k,
        maximal: false,
        residual,
    }))
}

/// Solver endpoints whose gcd degree is ambiguous are not secants to within
/// the tolerances; they are counted and dropped.
pub(crate) fn screen_candidate(r: Result<Option<SecantRecord>>, diag: &mut SearchDiagnostics) -> Result<Option<SecantRecord>> {
    match r {
        Err(Error::RankAmbiguous { .. }) => {
            diag.ambiguous_candidates += 1;
            Ok(None)
        }
        other => other,
    }
}

/// Lines found by a k-secant search, with solver diagnostics.
#[derive(Clone, Debug)]
pub struct SecantSearch {
    pub records: Vec<SecantRecord>,
    pub diagnostics: SearchDiagnostics,
}

pub(crate) fn finish(mut recs: Vec<SecantRecord>, k: usize) -> Vec<SecantRecord> {
    recs.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    let mut recs = dedup_lines(recs, |r| &r.line);
    for r in &mut recs {
        r.proper = r.length == k;
    }
    sort_records(&mut recs);
    recs
}

/// Secant order with maximal witnesses.
#[derive(Clone, Debug)]
pub struct SecantOrder {
    pub l: usize,
    pub witnesses: Vec<SecantRecord>,
    pub diagnostics: SearchDiagnostics,
}
