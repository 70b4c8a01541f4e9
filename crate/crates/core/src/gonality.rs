//! Gonality and Clifford index from the secant order, the numeric hypotheses
//! behind them, and end-to-end curve analysis.
//!
//! For a curve `C` of degree `d(C)` with secant order `l`, gonality is
//! `d(C) - l` and the Clifford index is `d(C) - 6` when `l = 3`, otherwise
//! `gonality - 2`. Cohomological hypotheses are never evaluated; reports list
//! them as assumptions.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::ci_curves::{find_k_secants_ci, line_intersection_length, secant_order_ci, CICurve, Smoothness};
use crate::error::{Error, Result};
use crate::rational_curves::{intersection_divisor_with_line, secant_order, RationalCurveMap};
use crate::secant::{SearchDiagnostics, SecantOptions, SecantRecord, SecantRecordJson};

/// `d(C) - l`.
pub fn gonality_from_secants(dc: usize, l: usize) -> Result<usize> {
    if l < 2 || dc <= l {
        return Err(Error::InvalidParameters(format!("need l >= 2 and d(C) > l, got d(C) = {dc}, l = {l}")));
    }
    Ok(dc - l)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CliffordCase {
    #[serde(rename = "gon-2")]
    GonMinus2,
    #[serde(rename = "gon-3")]
    GonMinus3,
}

impl std::fmt::Display for CliffordCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CliffordCase::GonMinus2 => "gon-2",
            CliffordCase::GonMinus3 => "gon-3",
        })
    }
}

/// Clifford index and which of the two cases holds.
pub fn clifford_trichotomy(dc: usize, l: usize) -> Result<(usize, CliffordCase)> {
    if l < 3 {
        return Err(Error::InvalidParameters(format!("the trichotomy needs l >= 3, got {l}")));
    }
    if dc < l + 4 {
        return Err(Error::InvalidParameters(format!("need d(C) >= l + 4, got d(C) = {dc}, l = {l}")));
    }
    let gon = gonality_from_secants(dc, l)?;
    Ok(if l == 3 {
        (dc - 6, CliffordCase::GonMinus3)
    } else {
        (gon - 2, CliffordCase::GonMinus2)
    })
}

/// Genus `(alpha d(C) + 2) / 2` of a curve with `omega_C = O_C(alpha)`.
pub fn genus_subcanonical(alpha: i64, dc: usize) -> Result<i64> {
    let ad = alpha * dc as i64;
    if ad % 2 != 0 {
        return Err(Error::InvalidParameters(format!("alpha d(C) = {ad} is odd")));
    }
    Ok((ad + 2) / 2)
}

/// `floor(3 (clifford + 2) / 2)`.
pub fn cm_degree_bound(clifford: usize) -> usize {
    3 * (clifford + 2) / 2
}

/// Which set of numeric conditions to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TheoremMode {
    /// `f < alpha + 4`, `p - f + 4 > s + d/(sf)`, `d(C) <= 2 (p - f + 2) f`,
    /// with `p <= alpha`.
    Thm1_4 { p: i64 },
    /// `f < alpha + 4`, `alpha - f + 3 > s + d/(sf)`,
    /// `d(C) <= 2 (alpha - f + 1) f`.
    Thm1_10,
}

/// Outcome of the numeric conditions at one surface degree `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub alpha: i64,
    pub f: i64,
    pub p: i64,
    pub dc: i64,
    pub d_max: i64,
    /// Cohomological; never evaluated.
    pub cond_a_status: String,
    pub cond_b: bool,
    pub cond_c: bool,
    /// Smallest `s` witnessing condition c).
    pub cond_c_s: Option<i64>,
    pub cond_d: bool,
    pub overall: bool,
    /// `(p - f + 3) f`: the degree a non-planar destabilizing divisor would
    /// have to exceed. Informational.
    pub planar_degree_lower_bound: i64,
}

/// Per-`f` reports with the overall verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSummary {
    pub mode: TheoremMode,
    pub reports: Vec<HypothesisReport>,
    pub overall: bool,
    /// First passing `(f, s)`.
    pub witness: Option<(i64, i64)>,
}

/// Test conditions b)-d) for every `f` in `f_range`, with the divisor degree
/// in c) bounded by `d_max` (default `d(C) - 3`).
pub fn check_theorem_hypotheses(
    alpha: i64,
    dc: usize,
    mode: TheoremMode,
    f_range: std::ops::RangeInclusive<i64>,
    d_max: Option<i64>,
) -> Result<HypothesisSummary> {
    if f_range.is_empty() || *f_range.start() < 1 {
        return Err(Error::InvalidParameters(format!("empty or nonpositive f range {f_range:?}")));
    }
    let dc = dc as i64;
    let d = d_max.unwrap_or(dc - 3);
    if d < 1 {
        return Err(Error::InvalidParameters(format!("d_max = {d} must be positive")));
    }
    // the second mode is the first at p = alpha - 1
    let p = match mode {
        TheoremMode::Thm1_4 { p } => {
            if p > alpha {
                return Err(Error::InvalidParameters(format!("need p <= alpha, got p = {p}, alpha = {alpha}")));
            }
            p
        }
        TheoremMode::Thm1_10 => alpha - 1,
    };
    let mut reports = Vec::new();
    let mut witness = None;
    for f in f_range {
        let cond_b = f < alpha + 4;
        let lhs = p - f + 4;
        // lhs > s + d/(sf)  <=>  (lhs - s) s f > d
        let cond_c_s = if lhs >= 1 { (1..=f * lhs).find(|&s| (lhs - s) * s * f > d) } else { None };
        let cond_d = dc <= 2 * (p - f + 2) * f;
        let overall = cond_b && cond_c_s.is_some() && cond_d;
        if overall && witness.is_none() {
            witness = Some((f, cond_c_s.unwrap_or_default()));
        }
        reports.push(HypothesisReport {
            alpha,
            f,
            p,
            dc,
            d_max: d,
            cond_a_status: "assumed".into(),
            cond_b,
            cond_c: cond_c_s.is_some(),
            cond_c_s,
            cond_d,
            overall,
            planar_degree_lower_bound: (p - f + 3) * f,
        });
    }
    Ok(HypothesisSummary {
        mode,
        overall: witness.is_some(),
        witness,
        reports,
    })
}

/// Surface degrees `f` that can carry the liaison of condition (∘) for a
/// complete intersection `(a, b)`: `max(b, a + 1) <= f <= alpha + 3`.
pub fn ci_f_range(a: usize, b: usize) -> Result<std::ops::RangeInclusive<i64>> {
    if a < 1 || a > b {
        return Err(Error::InvalidParameters(format!("need 1 <= a <= b, got ({a}, {b})")));
    }
    let alpha = (a + b) as i64 - 4;
    Ok(b.max(a + 1) as i64..=alpha + 3)
}

/// [`check_theorem_hypotheses`] for a complete intersection, `p = alpha` in
/// the first mode.
pub fn ci_hypotheses(a: usize, b: usize, thm1_10: bool) -> Result<HypothesisSummary> {
    let alpha = (a + b) as i64 - 4;
    let mode = if thm1_10 { TheoremMode::Thm1_10 } else { TheoremMode::Thm1_4 { p: alpha } };
    check_theorem_hypotheses(alpha, a * b, mode, ci_f_range(a, b)?, None)
}

/// A curve to analyse.
#[derive(Clone, Debug)]
pub enum CurveInput {
    Rational(RationalCurveMap<BigRational>),
    Ci(CICurve<BigRational>),
}

impl CurveInput {
    pub fn degree(&self) -> usize {
        match self {
            CurveInput::Rational(c) => c.degree(),
            CurveInput::Ci(c) => c.degree(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct AnalyzeOptions {
    pub secant: SecantOptions,
    /// User assertion that the curve is not bielliptic; echoed in the report.
    pub non_bielliptic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    /// Gonality and Clifford index are filled from the formulas.
    TheoremLayer,
    /// Only the secant structure is reported.
    OutOfRegime { reason: String },
}

/// Re-verification of the maximal witnesses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCheck {
    /// Witnesses whose recomputed intersection length equals `l`.
    pub reverified: usize,
    pub total: usize,
    /// Some line of length `l + 1` was found.
    pub longer_found: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GonalityReport {
    pub kind: String,
    pub dc: usize,
    pub genus: Option<i64>,
    pub alpha: Option<i64>,
    pub l: usize,
    pub gonality: Option<usize>,
    pub clifford: Option<usize>,
    pub clifford_case: Option<CliffordCase>,
    pub regime: Regime,
    pub assumptions: Vec<String>,
    pub witnesses: Vec<SecantRecordJson>,
    pub witness_check: WitnessCheck,
    pub diagnostics: SearchDiagnostics,
}

impl GonalityReport {
    /// Witnesses re-verify and nothing longer was found.
    pub fn is_consistent(&self) -> bool {
        self.witness_check.reverified == self.witness_check.total && !self.witness_check.longer_found
    }
}

fn recheck_rational(c: &RationalCurveMap<BigRational>, recs: &[SecantRecord], l: usize) -> Result<usize> {
    let cc = c.to_c64();
    let mut ok = 0;
    for r in recs {
        let div = intersection_divisor_with_line(&cc, &r.line)?;
        if div.degree() == l {
            ok += 1;
        }
    }
    Ok(ok)
}

fn recheck_ci(c: &CICurve<BigRational>, recs: &[SecantRecord], l: usize) -> Result<usize> {
    let cc = c.to_c64();
    let mut ok = 0;
    for r in recs {
        if line_intersection_length(&cc, &r.line)? == l {
            ok += 1;
        }
    }
    Ok(ok)
}

/// Secant order, then the formula layer where it applies.
///
/// Rational curves have `omega = O(-2)` and are outside the subcanonical
/// regime; complete intersections with `a < 4` are outside the range where
/// the secant strata are controlled. Both get the secant structure only.
pub fn analyze_curve(curve: &CurveInput, opts: &AnalyzeOptions) -> Result<GonalityReport> {
    let dc = curve.degree();
    let (kind, order, genus, alpha) = match curve {
        CurveInput::Rational(c) => ("rational", secant_order(c, &opts.secant)?, Some(0), None),
        CurveInput::Ci(c) => ("ci", secant_order_ci(c, &opts.secant)?, Some(c.genus()), Some(c.alpha())),
    };
    let l = order.l;
    let total = order.witnesses.len();
    let (reverified, longer_found) = match curve {
        CurveInput::Rational(c) => {
            let longer = l + 1 < dc && !crate::rational_curves::find_k_secants(c, l + 1, &opts.secant)?.records.is_empty();
            (recheck_rational(c, &order.witnesses, l)?, longer)
        }
        CurveInput::Ci(c) => {
            // a line of length l + 1 > a lies on F_a, covered by the order search
            let longer = l < c.a() && !find_k_secants_ci(c, l + 1, &opts.secant)?.records.is_empty();
            (recheck_ci(c, &order.witnesses, l)?, longer)
        }
    };
    let mut assumptions = vec![
        "secant order from a numerical homotopy search; emptiness of the next level is solver emptiness".to_string(),
    ];
    let regime = match curve {
        CurveInput::Rational(_) => Regime::OutOfRegime {
            reason: "rational curves are not subcanonical with alpha >= 4".into(),
        },
        CurveInput::Ci(c) if c.a() < 4 => Regime::OutOfRegime {
            reason: format!("complete intersection with a = {} < 4", c.a()),
        },
        CurveInput::Ci(c) => {
            assumptions.push("condition (o): smooth surfaces T, F' through C with T n F' = C u D, D smooth (not checked)".into());
            assumptions.push("condition a): h^1(I_C(1)) = h^1(I_C(alpha)) = 0 (cohomological, not checked)".into());
            assumptions.push("high twist: the numeric conditions hold for s = 2 and t >> 0 (not checked)".into());
            assumptions.push(if opts.non_bielliptic {
                "C not bielliptic (asserted by the user)".into()
            } else {
                "C not bielliptic (assumed, not checked)".into()
            });
            assumptions.push("C not hyperelliptic (alpha > 0)".into());
            match c.smoothness() {
                Smoothness::Verified => {}
                Smoothness::VerifiedAtSamples => assumptions.push("smoothness of C checked at sampled points only".into()),
                Smoothness::Unknown => assumptions.push("smoothness of C not verified".into()),
            }
            Regime::TheoremLayer
        }
    };
    let (gonality, clifford, clifford_case) = if regime == Regime::TheoremLayer {
        let gon = gonality_from_secants(dc, l)?;
        let (cl, case) = clifford_trichotomy(dc, l)?;
        (Some(gon), Some(cl), Some(case))
    } else {
        (None, None, None)
    };
    Ok(GonalityReport {
        kind: kind.into(),
        dc,
        genus,
        alpha,
        l,
        gonality,
        clifford,
        clifford_case,
        regime,
        assumptions,
        witnesses: order.witnesses.iter().map(|r| r.to_json()).collect(),
        witness_check: WitnessCheck {
            reverified,
            total,
            longer_found,
        },
        diagnostics: order.diagnostics,
    })
}
