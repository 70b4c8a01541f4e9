use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use secant_scope::binary_forms::DivisorP1;
use secant_scope::ci_curves::{construct_ci_with_secant_line, random_smooth_ci, CICurve, CICurveJson};
use secant_scope::gonality::{
    analyze_curve, check_theorem_hypotheses, ci_hypotheses, AnalyzeOptions, CurveInput, Regime, TheoremMode,
};
use secant_scope::line::LineP3;
use secant_scope::rational_curves::{
    construct_with_k_secant, find_k_secants, random_rational_curve, RationalCurveJson, RationalCurveMap,
};
use secant_scope::scalar::format_rational;
use secant_scope::secant::{ChartMode, SearchDiagnostics, SecantOptions, SecantRecordJson};
use secant_scope::strata::{estimate_local_dimension, stratum_equations, DimensionReport, StratumLabel, Verdict};
use secant_scope::Rational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::{
    input_hash, read_input, to_json_text, write_output, CliError, CliResult, Exit, Format, Report, RunConfig,
    Tolerances, TOOL, VERSION,
};
use crate::{AnalyzeKind, ChartArg, Cli, Command, ConstructKind, HypArgs, ModeArg, TolFlags, VerifyKind};

/// Shared state of one invocation.
struct Run {
    config: RunConfig,
    inputs: Vec<Vec<u8>>,
    opts: SecantOptions,
}

impl Run {
    fn new(command: &str, seed: u64, tol: &TolFlags) -> Self {
        let mut opts = SecantOptions {
            seed,
            ..Default::default()
        };
        opts.solve.seed = seed;
        let mut over = BTreeMap::new();
        if let Some(v) = tol.residual_tol {
            opts.solve.residual_tol = v;
            over.insert("residual_tol".into(), json!(v));
        }
        if let Some(v) = tol.failure_cap {
            opts.solve.failure_cap = v;
            over.insert("failure_cap".into(), json!(v));
        }
        if let Some(v) = tol.gamma_attempts {
            opts.solve.gamma_attempts = v;
            over.insert("gamma_attempts".into(), json!(v));
        }
        if let Some(v) = tol.rescue_starts {
            opts.solve.rescue_starts = v;
            over.insert("rescue_starts".into(), json!(v));
        }
        if let Some(c) = tol.charts {
            opts.charts = match c {
                ChartArg::Generic => ChartMode::Generic,
                ChartArg::Coordinate => ChartMode::Coordinate,
            };
            over.insert("charts".into(), json!(opts.charts));
        }
        Run {
            config: RunConfig {
                command: command.into(),
                inputs: vec![],
                params: BTreeMap::new(),
                seed,
                tolerance_overrides: over,
                format: Format::Json,
            },
            inputs: vec![],
            opts,
        }
    }

    fn param(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.config.params.insert(key.into(), json!(v));
        self
    }

    fn read(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = read_input(path)?;
        self.config.inputs.push(path.display().to_string());
        self.inputs.push(bytes.clone());
        Ok(bytes)
    }

    fn report<R: Serialize>(&self, status: &str, assumptions: Vec<String>, result: R) -> Report<R> {
        Report {
            tool: TOOL,
            version: VERSION,
            input_sha256: input_hash(&self.config, &self.inputs),
            seed: self.config.seed,
            config: self.config.clone(),
            tolerances: Tolerances::new(&self.opts.solve),
            assumptions,
            status: status.into(),
            result,
        }
    }

    fn emit<R: Serialize>(&self, out: Option<&PathBuf>, status: &str, assumptions: Vec<String>, result: R) -> CliResult<()> {
        write_output(out, &to_json_text(&self.report(status, assumptions, result)))
    }
}

pub fn dispatch(cli: &Cli) -> CliResult<Exit> {
    match &cli.command {
        Command::Analyze { kind } => analyze(kind, &cli.tol),
        Command::Construct { kind } => construct(kind, &cli.tol),
        Command::Secants { input, k, seed, out } => secants(input, *k, *seed, out.as_ref(), &cli.tol),
        Command::Verify {
            kind: VerifyKind::Dims { seed, format, out },
        } => verify_dims(*seed, *format, out.as_ref(), &cli.tol),
        Command::Verify {
            kind: VerifyKind::Counts {
                degrees,
                curves,
                seed,
                out,
            },
        } => verify_counts(degrees, *curves, *seed, out.as_ref(), &cli.tol),
        Command::Hypcheck(args) => hypcheck(args, &cli.tol),
        Command::Selftest { trials, seed, out } => {
            let mut run = Run::new("selftest", *seed, &cli.tol);
            run.param("trials", trials);
            let suites = crate::selftest::run_all(*trials, *seed)?;
            let ok = suites.iter().all(|s| s.failures == 0);
            run.emit(out.as_ref(), if ok { "pass" } else { "fail" }, vec![], suites)?;
            Ok(if ok { Exit::Ok } else { Exit::Failed })
        }
    }
}

/// A curve file holds a bare curve object or a report whose result has one.
fn parse_curve(bytes: &[u8], path: &Path) -> CliResult<CurveInput> {
    let v: Value = serde_json::from_slice(bytes)
        .map_err(|e| CliError::invalid(format!("{}: malformed JSON: {e}", path.display())))?;
    let v = match v.get("result").and_then(|r| r.get("curve")) {
        Some(c) if v.get("tool").and_then(Value::as_str) == Some(TOOL) => c.clone(),
        _ => v,
    };
    let kind = v.get("kind").and_then(Value::as_str).unwrap_or_default().to_string();
    let bad = |e: serde_json::Error| CliError::invalid(format!("{}: malformed {kind} curve: {e}", path.display()));
    match kind.as_str() {
        "rational" => {
            let j: RationalCurveJson = serde_json::from_value(v).map_err(bad)?;
            Ok(CurveInput::Rational(RationalCurveMap::<Rational>::from_json(&j)?))
        }
        "ci" => {
            let j: CICurveJson = serde_json::from_value(v).map_err(bad)?;
            Ok(CurveInput::Ci(CICurve::<Rational>::from_json(&j)?))
        }
        _ => Err(CliError::invalid(format!(
            "{}: curve kind must be \"rational\" or \"ci\", got {kind:?}",
            path.display()
        ))),
    }
}

fn analyze(kind: &AnalyzeKind, tol: &TolFlags) -> CliResult<Exit> {
    let (args, want, non_bielliptic) = match kind {
        AnalyzeKind::Rational(a) => (a, "rational", false),
        AnalyzeKind::Ci { common, non_bielliptic } => (common, "ci", *non_bielliptic),
    };
    let mut run = Run::new(&format!("analyze {want}"), args.seed, tol);
    run.param("non_bielliptic", non_bielliptic);
    let bytes = run.read(&args.input)?;
    let curve = parse_curve(&bytes, &args.input)?;
    let got = match curve {
        CurveInput::Rational(_) => "rational",
        CurveInput::Ci(_) => "ci",
    };
    if got != want {
        return Err(CliError::invalid(format!("analyze {want} given a {got} curve")));
    }
    let opts = AnalyzeOptions {
        secant: run.opts.clone(),
        non_bielliptic,
    };
    let rep = analyze_curve(&curve, &opts)?;
    let (status, exit) = match (&rep.regime, rep.is_consistent()) {
        (_, false) => ("witness_check_failed", Exit::Ambiguous),
        (Regime::OutOfRegime { .. }, true) => ("out_of_regime", Exit::OutOfRegime),
        (Regime::TheoremLayer, true) => ("verified_with_assumptions", Exit::Ok),
    };
    run.emit(args.out.as_ref(), status, rep.assumptions.clone(), &rep)?;
    Ok(exit)
}

fn exact_line(l: &LineP3<Rational>) -> Vec<String> {
    l.plucker().iter().map(format_rational).collect()
}

fn exact_divisor(d: &DivisorP1<Rational>) -> Vec<Value> {
    d.points()
        .iter()
        .map(|(p, m)| json!({"s": format_rational(p.s()), "t": format_rational(p.t()), "multiplicity": m}))
        .collect()
}

fn construct(kind: &ConstructKind, tol: &TolFlags) -> CliResult<Exit> {
    match kind {
        ConstructKind::Rational {
            d,
            k,
            seed,
            random,
            out,
        } => {
            let mut run = Run::new("construct rational", *seed, tol);
            run.param("d", d).param("k", k).param("random", random);
            if *random {
                let c = random_rational_curve(*d, *seed)?;
                run.emit(out.as_ref(), "ok", vec![], json!({ "curve": c.to_json() }))?;
                return Ok(Exit::Ok);
            }
            let k = k.ok_or_else(|| CliError::invalid("construct rational needs --k (or --random)"))?;
            let p = construct_with_k_secant(*d, k, *seed)?;
            let result = json!({
                "curve": p.curve.to_json(),
                "planted": {
                    "plucker": exact_line(&p.line),
                    "divisor": exact_divisor(&p.divisor),
                    "record": p.record.to_json(),
                    "seeds": p.seeds,
                },
            });
            run.emit(out.as_ref(), "ok", vec![], result)?;
            Ok(Exit::Ok)
        }
        ConstructKind::Ci { a, b, seed, random, out } => {
            let mut run = Run::new("construct ci", *seed, tol);
            run.param("a", a).param("b", b).param("random", random);
            if *random {
                let c = random_smooth_ci(*a, *b, *seed)?;
                run.emit(out.as_ref(), "ok", vec![], json!({ "curve": c.to_json() }))?;
                return Ok(Exit::Ok);
            }
            let p = construct_ci_with_secant_line(*a, *b, *seed)?;
            let mut notes = vec![];
            if p.equal_degrees {
                notes.push("a = b: the planted line need not be the only line of its length".to_string());
            }
            let result = json!({
                "curve": p.curve.to_json(),
                "planted": {
                    "plucker": exact_line(&p.line),
                    "record": p.record.to_json(),
                    "seeds": p.seeds,
                },
            });
            run.emit(out.as_ref(), "ok", notes, result)?;
            Ok(Exit::Ok)
        }
    }
}

#[derive(Serialize)]
struct SecantsResult {
    kind: &'static str,
    degree: usize,
    k: usize,
    count: usize,
    records: Vec<SecantRecordJson>,
    diagnostics: SearchDiagnostics,
}

fn secants(input: &Path, k: usize, seed: u64, out: Option<&PathBuf>, tol: &TolFlags) -> CliResult<Exit> {
    let mut run = Run::new("secants", seed, tol);
    run.param("k", k);
    let bytes = run.read(input)?;
    let curve = parse_curve(&bytes, input)?;
    let degree = curve.degree();
    if k > degree {
        return Err(CliError::invalid(format!("k exceeds curve degree (k = {k}, degree {degree})")));
    }
    let (kind, search) = match &curve {
        CurveInput::Rational(c) => ("rational", find_k_secants(c, k, &run.opts)?),
        CurveInput::Ci(c) => ("ci", secant_scope::ci_curves::find_k_secants_ci(c, k, &run.opts)?),
    };
    let result = SecantsResult {
        kind,
        degree,
        k,
        count: search.records.len(),
        records: search.records.iter().map(|r| r.to_json()).collect(),
        diagnostics: search.diagnostics,
    };
    let notes = vec!["emptiness and completeness are those of a numerical homotopy solve".to_string()];
    run.emit(out, "ok", notes, result)?;
    Ok(Exit::Ok)
}

/// The strata charts checked by `verify dims`.
pub fn standard_strata() -> Vec<StratumLabel> {
    use StratumLabel::*;
    vec![
        Grassmannian,
        Alk { k: 4 },
        Alk { k: 5 },
        Pk { d: 5, k: 4 },
        Pk { d: 6, k: 4 },
        Pk { d: 6, k: 5 },
        Pk { d: 7, k: 6 },
        IkRational { d: 5, k: 4 },
        IkRational { d: 6, k: 5 },
        CiFiber { a: 4, b: 4, k: 4 },
    ]
}

fn verify_dims(seed: u64, format: Format, out: Option<&PathBuf>, tol: &TolFlags) -> CliResult<Exit> {
    let mut run = Run::new("verify dims", seed, tol);
    run.config.format = format;
    let mut reports: Vec<DimensionReport> = Vec::new();
    for (i, label) in standard_strata().into_iter().enumerate() {
        let chart = stratum_equations(label, seed.wrapping_add(i as u64))?;
        reports.push(estimate_local_dimension(&chart)?);
    }
    let (status, exit) = if reports.iter().any(|r| r.verdict == Verdict::Ambiguous) {
        ("ambiguous", Exit::Ambiguous)
    } else if reports.iter().any(|r| r.verdict == Verdict::Mismatch) {
        ("mismatch", Exit::Failed)
    } else {
        ("match", Exit::Ok)
    };
    let notes = vec!["local dimension at one sample point; a generic sample is assumed".to_string()];
    match format {
        Format::Json => run.emit(out, status, notes, &reports)?,
        Format::Csv => {
            let rep = run.report(status, notes, ());
            let mut text = String::new();
            text.push_str(&format!("# tool: {} {}\n", rep.tool, rep.version));
            text.push_str(&format!("# input_sha256: {}\n", rep.input_sha256));
            text.push_str(&format!("# seed: {}\n", rep.seed));
            text.push_str(&format!(
                "# tolerances: {}\n",
                serde_json::to_string(&rep.tolerances).expect("tolerances serialize")
            ));
            for a in &rep.assumptions {
                text.push_str(&format!("# assumption: {a}\n"));
            }
            text.push_str(&format!("# status: {status}\n"));
            text.push_str(DimensionReport::CSV_HEADER);
            text.push('\n');
            for r in &reports {
                text.push_str(&r.csv_row());
                text.push('\n');
            }
            write_output(out, &text)?;
        }
    }
    Ok(exit)
}

/// `(d - 2)(d - 3)^2 (d - 4) / 12` quadrisecants of a general rational curve.
pub fn quadrisecant_count(d: usize) -> usize {
    (d - 2) * (d - 3) * (d - 3) * (d - 4) / 12
}

#[derive(Serialize)]
struct CountRow {
    d: usize,
    seed: u64,
    count: usize,
    expected: usize,
    max_residual: f64,
    diagnostics: SearchDiagnostics,
}

fn verify_counts(degrees: &[usize], curves: usize, seed: u64, out: Option<&PathBuf>, tol: &TolFlags) -> CliResult<Exit> {
    let mut run = Run::new("verify counts", seed, tol);
    run.param("degrees", degrees).param("curves", curves);
    if let Some(d) = degrees.iter().find(|d| !(5..=7).contains(*d)) {
        return Err(CliError::invalid(format!("degree {d} outside 5..=7")));
    }
    let mut rows = Vec::new();
    for &d in degrees {
        for i in 0..curves as u64 {
            let s = seed.wrapping_add(i);
            let c = random_rational_curve(d, s)?;
            let mut opts = run.opts.clone();
            opts.seed = s;
            opts.solve.seed = s;
            let found = find_k_secants(&c, 4, &opts)?;
            rows.push(CountRow {
                d,
                seed: s,
                count: found.records.len(),
                expected: quadrisecant_count(d),
                max_residual: found.records.iter().map(|r| r.residual).fold(0.0, f64::max),
                diagnostics: found.diagnostics,
            });
        }
    }
    let ok = rows.iter().all(|r| r.count == r.expected);
    let notes = vec!["expected counts from the classical quadrisecant formula for rational curves".to_string()];
    run.emit(out, if ok { "match" } else { "mismatch" }, notes, &rows)?;
    Ok(if ok { Exit::Ok } else { Exit::Failed })
}

fn hypcheck(args: &HypArgs, tol: &TolFlags) -> CliResult<Exit> {
    let mut run = Run::new("hypcheck", 0, tol);
    let thm1_10 = args.mode == ModeArg::Thm110;
    run.param("mode", if thm1_10 { "thm1-10" } else { "thm1-4" });
    let summary = match (args.a, args.b) {
        (Some(a), Some(b)) => {
            run.param("a", a).param("b", b);
            if args.p.is_some() || args.f_min.is_some() || args.f_max.is_some() || args.d_max.is_some() {
                return Err(CliError::invalid("--a/--b fix p, the f range and d_max; drop the other flags"));
            }
            ci_hypotheses(a, b, thm1_10)?
        }
        _ => {
            let (Some(alpha), Some(dc)) = (args.alpha, args.dc) else {
                return Err(CliError::invalid("give --a and --b, or --alpha and --dc"));
            };
            let mode = if thm1_10 {
                TheoremMode::Thm1_10
            } else {
                TheoremMode::Thm1_4 { p: args.p.unwrap_or(alpha) }
            };
            let range = args.f_min.unwrap_or(1)..=args.f_max.unwrap_or(alpha + 3);
            run.param("alpha", alpha)
                .param("dc", dc)
                .param("p", args.p)
                .param("f_range", [range.start(), range.end()])
                .param("d_max", args.d_max);
            check_theorem_hypotheses(alpha, dc, mode, range, args.d_max)?
        }
    };
    let notes = vec!["condition a) is cohomological and is assumed, not checked".to_string()];
    run.emit(args.out.as_ref(), if summary.overall { "pass" } else { "fail" }, notes, &summary)?;
    Ok(Exit::Ok)
}
