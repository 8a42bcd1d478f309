//! Command-line front end.
//!
//! Every command prints a JSON report
//! `{header: {query, version, defaults}, results: [...], checks: [...]}`
//! or, with `--format csv`, the results as CSV under a `#`-prefixed header
//! line. Exit codes: 0 on success, 2 on invalid input, 3 when a cross-check
//! fails.

mod args;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};

pub use args::{Cli, Command, ContourArgs, FloatList, Format, IntList, McArgs, Mode, QArg};

use crate::asymptotics::{
    finite_l_qmoment, limit_density, limit_qmoment, LineRule, LINE_TOLERANCE,
};
use crate::config::LabeledConfig;
use crate::contour::{
    cdf_contour, cdf_route, identity_suite, qmoment_from_exponents, CdfRoute, ContourSpec,
    AUTO_TOLERANCE, DEFAULT_LARGE_RADIUS, IDENTITY_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::exact::{
    cdf, duality_qmoment, hitting_prob_numeric, hitting_prob_symbolic, path_decomposition_cdf,
    verify_shift, DEFAULT_MAX_PATHS, DEFAULT_MAX_STATES,
};
use crate::montecarlo::{
    estimate_cdf, estimate_hitting, estimate_qmoment, estimate_table, replica_rng,
    simulate_embedded, simulate_labeled, table_csv, SimEstimate, BLOCK,
};

/// Largest gap tolerated between deterministic methods.
pub const AGREEMENT_TOLERANCE: f64 = 1e-7;

/// Monte Carlo estimates must lie within this many standard errors.
pub const MC_SIGMAS: f64 = 4.0;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Clone, Debug, Serialize)]
pub struct ResultRow {
    pub method: String,
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbolic: Option<String>,
}

impl ResultRow {
    fn number(method: &str, value: f64) -> Self {
        ResultRow {
            method: method.into(),
            value: json!(value),
            stderr: None,
            symbolic: None,
        }
    }

    fn estimate(method: &str, e: &SimEstimate) -> Self {
        ResultRow {
            stderr: Some(e.stderr),
            ..ResultRow::number(method, e.mean)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckRow {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        CheckRow {
            name: name.into(),
            pass,
            detail,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub query: Value,
    pub version: &'static str,
    pub defaults: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub header: Header,
    pub results: Vec<ResultRow>,
    pub checks: Vec<CheckRow>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn defaults() -> Value {
    json!({
        "contour_nodes": "auto",
        "auto_tolerance": AUTO_TOLERANCE,
        "large_radius": DEFAULT_LARGE_RADIUS,
        "agreement_tolerance": AGREEMENT_TOLERANCE,
        "mc_sigmas": MC_SIGMAS,
        "mc_block": BLOCK,
        "max_states": DEFAULT_MAX_STATES,
        "max_paths": DEFAULT_MAX_PATHS,
        "identity_tolerance": IDENTITY_TOLERANCE,
        "line_tolerance": LINE_TOLERANCE,
    })
}

struct Builder {
    results: Vec<ResultRow>,
    checks: Vec<CheckRow>,
    notes: Vec<String>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            results: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Pairwise agreement of deterministic values and Monte Carlo estimates
    /// against the first deterministic value.
    fn cross_check(&mut self, exact: &[(&str, f64)], mc: Option<&SimEstimate>) {
        if exact.len() > 1 {
            let mut worst = (0.0f64, "", "");
            for (i, a) in exact.iter().enumerate() {
                for b in &exact[i + 1..] {
                    let d = (a.1 - b.1).abs();
                    if d >= worst.0 {
                        worst = (d, a.0, b.0);
                    }
                }
            }
            self.checks.push(CheckRow::new(
                "max-pairwise-discrepancy",
                worst.0 <= AGREEMENT_TOLERANCE,
                format!("{:e} between {} and {} (tolerance {AGREEMENT_TOLERANCE:e})", worst.0, worst.1, worst.2),
            ));
        }
        if let (Some(e), Some(&(name, v))) = (mc, exact.first()) {
            let z = e.z_score(v, 0.0);
            self.checks.push(CheckRow::new(
                "mc-within-4-sigma",
                z < MC_SIGMAS,
                format!("|mc - {name}| = {z:.3} standard errors"),
            ));
        }
    }

    fn finish(self, query: Value) -> Report {
        Report {
            header: Header {
                query,
                version: env!("CARGO_PKG_VERSION"),
                defaults: defaults(),
                notes: self.notes,
            },
            results: self.results,
            checks: self.checks,
        }
    }
}

fn check_dims(x: &IntList, y: &IntList) -> Result<()> {
    if x.0.len() != y.0.len() || x.0.is_empty() {
        return Err(Error::Domain(format!(
            "x and y must be nonempty and of equal length, got {} and {}",
            x.0.len(),
            y.0.len()
        )));
    }
    Ok(())
}

fn explicit_contour(c: &ContourArgs) -> Result<Option<ContourSpec>> {
    if c.contour == "auto" {
        return Ok(None);
    }
    let text = if c.contour.trim_start().starts_with('{') {
        c.contour.clone()
    } else {
        std::fs::read_to_string(&c.contour)
            .map_err(|e| Error::Parse(format!("cannot read contour file {}: {e}", c.contour)))?
    };
    let mut spec: ContourSpec =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("bad contour JSON: {e}")))?;
    if let Some(n) = c.nodes {
        spec.nodes_per_circle = n;
    }
    Ok(Some(spec))
}

/// Small-contour exponents for `k_j` species-`j` particles and thresholds
/// `M`: `M_j` is repeated `k_{n+1-j}` times.
pub fn moment_exponents(k: &[usize], m: &[i64]) -> Result<Vec<i64>> {
    if k.is_empty() || k.len() != m.len() {
        return Err(Error::Domain("k and M must be nonempty and of equal length".into()));
    }
    let n = k.len();
    Ok(m.iter()
        .enumerate()
        .flat_map(|(j, &mj)| std::iter::repeat_n(mj, k[n - 1 - j]))
        .collect())
}

fn contour_qmoment(exps: &[i64], t: f64, q: f64, c: &ContourArgs) -> Result<f64> {
    let spec = match explicit_contour(c)? {
        Some(s) => s,
        None => {
            let s = ContourSpec::small(q, exps.len(), 8)?;
            let n = c.nodes.unwrap_or_else(|| s.auto_nodes(q, 0));
            ContourSpec { nodes_per_circle: n, ..s }
        }
    };
    qmoment_from_exponents(exps, t, q, &spec)?.probability()
}

#[allow(clippy::too_many_arguments)]
fn run_cdf(
    x: &IntList,
    y: &IntList,
    q: f64,
    t: f64,
    mode: Mode,
    mc: &McArgs,
    c: &ContourArgs,
    b: &mut Builder,
) -> Result<()> {
    check_dims(x, y)?;
    let (xc, yc) = (x.config(), y.config());
    let mut exact_vals: Vec<(&str, f64)> = Vec::new();
    if matches!(mode, Mode::Exact | Mode::All) {
        let v = cdf(&xc, &yc, q, t)?;
        b.results.push(ResultRow::number("exact", v));
        exact_vals.push(("exact", v));
        if mode == Mode::All {
            match path_decomposition_cdf(&xc, &yc, q, t, DEFAULT_MAX_PATHS) {
                Ok(v) => {
                    b.results.push(ResultRow::number("paths", v));
                    exact_vals.push(("paths", v));
                }
                Err(Error::Resource(msg)) => b.notes.push(format!("paths skipped: {msg}")),
                Err(e) => return Err(e),
            }
        }
    }
    if matches!(mode, Mode::Contour | Mode::All) {
        let route = cdf_route(&xc, &yc)?;
        let value = match (&route, explicit_contour(c)?) {
            (None, _) => None,
            (Some(CdfRoute::Moment(m)), Some(spec)) => {
                Some(qmoment_from_exponents(m, t, q, &spec)?.probability()?)
            }
            (Some(CdfRoute::TransitionSum), Some(_)) => {
                return Err(Error::Contour(
                    "explicit contours apply to the moment formula only".into(),
                ))
            }
            (Some(_), None) => Some(cdf_contour(&xc, &yc, t, q, c.nodes)?),
        };
        match value {
            Some(v) => {
                b.results.push(ResultRow::number("contour", v));
                exact_vals.push(("contour", v));
            }
            None if mode == Mode::All => b.notes.push("contour skipped: no contour formula for this pair".into()),
            None => return Err(Error::Domain("no contour formula for this pair".into())),
        }
    }
    let mut est = None;
    if matches!(mode, Mode::Mc | Mode::All) {
        let e = estimate_cdf(&xc, &yc, t, q, mc.samples, mc.seed)?;
        b.results.push(ResultRow::estimate("mc", &e));
        est = Some(e);
    }
    if mode == Mode::All {
        b.cross_check(&exact_vals, est.as_ref());
    }
    Ok(())
}

fn run_hitprob(
    x: &IntList,
    y: &IntList,
    q: Option<&QArg>,
    symbolic: bool,
    mode: Mode,
    mc: &McArgs,
    b: &mut Builder,
) -> Result<()> {
    check_dims(x, y)?;
    let (xc, yc) = (x.config(), y.config());
    if mode == Mode::Contour {
        return Err(Error::Domain("hitting probabilities have no contour formula".into()));
    }
    let need_q = !symbolic || mode != Mode::Exact;
    let qv = match q {
        Some(q) => Some(q.value),
        None if need_q => return Err(Error::Domain("--q is required unless only --symbolic is asked".into())),
        None => None,
    };
    let mut exact_vals: Vec<(&str, f64)> = Vec::new();
    if symbolic || mode == Mode::All {
        let rf = hitting_prob_symbolic(&xc, &yc)?;
        let value = match qv {
            Some(q) => json!(rf.eval_f64(q)?),
            None => Value::Null,
        };
        if let Some(v) = value.as_f64() {
            exact_vals.push(("symbolic", v));
        }
        b.results.push(ResultRow {
            method: "symbolic".into(),
            value,
            stderr: None,
            symbolic: Some(rf.to_string()),
        });
        if let Some(QArg { fraction: Some((p, r)), value }) = q {
            let exact = rf.eval_rational(&BigInt::from(*p), &BigInt::from(*r))?;
            b.results.push(ResultRow {
                method: "rational".into(),
                value: json!(rf.eval_f64(*value)?),
                stderr: None,
                symbolic: Some(exact.to_string()),
            });
        }
    }
    if let (Some(q), true) = (qv, matches!(mode, Mode::Exact | Mode::All)) {
        let v = hitting_prob_numeric(&xc, &yc, q)?;
        b.results.push(ResultRow::number("exact", v));
        exact_vals.push(("exact", v));
    }
    let mut est = None;
    if let (Some(q), true) = (qv, matches!(mode, Mode::Mc | Mode::All)) {
        let e = estimate_hitting(&xc, &yc, q, mc.samples, mc.seed)?;
        b.results.push(ResultRow::estimate("mc", &e));
        est = Some(e);
    }
    if mode == Mode::All {
        b.cross_check(&exact_vals, est.as_ref());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_qmoment(
    k: &[usize],
    m: &IntList,
    q: f64,
    t: f64,
    mode: Mode,
    mc: &McArgs,
    c: &ContourArgs,
    b: &mut Builder,
) -> Result<()> {
    let exps = moment_exponents(k, &m.0)?;
    let mut exact_vals: Vec<(&str, f64)> = Vec::new();
    if matches!(mode, Mode::Exact | Mode::All) {
        let v = duality_qmoment(k, &m.0, q, t)?;
        b.results.push(ResultRow::number("exact", v));
        exact_vals.push(("exact", v));
    }
    if matches!(mode, Mode::Contour | Mode::All) {
        let v = contour_qmoment(&exps, t, q, c)?;
        b.results.push(ResultRow::number("contour", v));
        exact_vals.push(("contour", v));
    }
    let mut est = None;
    if matches!(mode, Mode::Mc | Mode::All) {
        let e = estimate_qmoment(k, &m.0, t, q, mc.samples, mc.seed)?;
        b.results.push(ResultRow::estimate("mc", &e));
        est = Some(e);
    }
    if mode == Mode::All {
        b.cross_check(&exact_vals, est.as_ref());
    }
    Ok(())
}

fn run_contour_check(q: f64, t: f64, seeds: u64, seed: u64, b: &mut Builder) -> Result<()> {
    for s in seed..seed + seeds {
        for c in identity_suite(q, t, s)? {
            b.results.push(ResultRow {
                method: c.name.clone(),
                value: json!(c.difference),
                stderr: None,
                symbolic: None,
            });
            b.checks.push(CheckRow::new(
                &c.name,
                c.pass,
                format!("seed {s}: {} (|lhs - rhs| = {:e})", c.detail, c.difference),
            ));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_shift(
    x: &IntList,
    y: &IntList,
    x2: &IntList,
    y2: &IntList,
    qs: &[f64],
    ts: &[f64],
    symbolic: bool,
    tol: f64,
    b: &mut Builder,
) -> Result<()> {
    check_dims(x, y)?;
    check_dims(x2, y2)?;
    check_dims(x, x2)?;
    let r = verify_shift(&x.config(), &y.config(), &x2.config(), &y2.config(), qs, ts, symbolic, tol)?;
    b.notes.push(format!(
        "intersection numbers equal: {}; rank differences equal: {}; common-start chains: {:?}",
        r.intersection_equal, r.rank_difference_equal, r.common_start_chain
    ));
    for c in &r.cdf {
        b.results.push(ResultRow::number(&format!("cdf-lhs q={} t={}", c.q, c.t), c.lhs));
        b.results.push(ResultRow::number(&format!("cdf-rhs q={} t={}", c.q, c.t), c.rhs));
        b.checks.push(CheckRow::new(
            "cdf-equal",
            c.pass,
            format!("q={} t={}: |difference| = {:e}", c.q, c.t, (c.lhs - c.rhs).abs()),
        ));
    }
    if let Some(h) = &r.hitting {
        for (name, rf) in [("hitting-lhs", &h.lhs), ("hitting-rhs", &h.rhs)] {
            b.results.push(ResultRow {
                method: name.into(),
                value: Value::Null,
                stderr: None,
                symbolic: Some(rf.to_string()),
            });
        }
        b.checks.push(CheckRow::new(
            "hitting-equal",
            h.equal,
            "structural equality of the canonical rational functions".into(),
        ));
    }
    Ok(())
}

fn run_asymptotic(sigma: &[f64], q: f64, ls: Option<&FloatList>, b: &mut Builder) -> Result<()> {
    let rule = LineRule::new(sigma, q)?;
    b.notes.push(format!(
        "line quadrature: shifts {:?}, step {}, half-width {}",
        rule.shifts, rule.step, rule.half_width
    ));
    let limit = limit_qmoment(sigma, q)?;
    b.results.push(ResultRow::number("limit", limit));
    b.results.push(ResultRow::number("limit-density", limit_density(sigma, q)?));
    if let Some(ls) = ls {
        let mut gaps = Vec::new();
        for &l in &ls.0 {
            let r = finite_l_qmoment(sigma, q, l, None)?;
            b.results.push(ResultRow {
                stderr: Some(r.est_error),
                ..ResultRow::number(&format!("finite-L={l}"), r.real())
            });
            gaps.push((l, (r.real() - limit).abs()));
        }
        let mut sorted = gaps.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        if sorted.len() > 1 {
            let shrinking = sorted.windows(2).all(|w| w[1].1 < w[0].1);
            b.checks.push(CheckRow::new(
                "error-shrinks-with-L",
                shrinking,
                format!("|finite-L - limit| by L: {sorted:?}"),
            ));
        }
    }
    Ok(())
}

fn run_simulate(
    x: &IntList,
    q: f64,
    t: Option<f64>,
    steps: Option<u64>,
    seed: u64,
    replica: u64,
    b: &mut Builder,
) -> Result<()> {
    let mut rng = replica_rng(seed, replica);
    let xc: LabeledConfig = x.config();
    let (method, end) = match (t, steps) {
        (Some(t), _) => ("gillespie", simulate_labeled(&xc, t, q, &mut rng)?),
        (None, Some(s)) => ("embedded", simulate_embedded(&xc, s, q, &mut rng)?),
        (None, None) => return Err(Error::Domain("give --t or --steps".into())),
    };
    b.results.push(ResultRow {
        method: method.into(),
        value: json!(end.positions()),
        stderr: None,
        symbolic: None,
    });
    Ok(())
}

fn dispatch(cmd: &Command, b: &mut Builder) -> Result<()> {
    match cmd {
        Command::Simulate { x, q, t, steps, seed, replica } => {
            run_simulate(x, q.value, *t, *steps, *seed, *replica, b)
        }
        Command::Cdf { x, y, q, t, mode, mc, contour } => run_cdf(x, y, q.value, *t, *mode, mc, contour, b),
        Command::Hitprob { x, y, q, symbolic, mode, mc } => {
            run_hitprob(x, y, q.as_ref(), *symbolic, *mode, mc, b)
        }
        Command::Qmoment { k, m, q, t, mode, mc, contour } => {
            run_qmoment(k, m, q.value, *t, *mode, mc, contour, b)
        }
        Command::Duality { k, m, q, t, contour } => {
            let dual = duality_qmoment(k, &m.0, q.value, *t)?;
            let exps = moment_exponents(k, &m.0)?;
            let moment = contour_qmoment(&exps, *t, q.value, contour)?;
            b.results.push(ResultRow::number("dual-finite-system", dual));
            b.results.push(ResultRow::number("contour-qmoment", moment));
            b.cross_check(&[("dual-finite-system", dual), ("contour-qmoment", moment)], None);
            Ok(())
        }
        Command::ContourCheck { q, t, seeds, seed } => run_contour_check(q.value, *t, *seeds, *seed, b),
        Command::ShiftVerify { x, y, x2, y2, qs, ts, symbolic, tol } => {
            run_shift(x, y, x2, y2, &qs.0, &ts.0, *symbolic, *tol, b)
        }
        Command::Asymptotic { sigma, q, finite_l } => run_asymptotic(&sigma.0, q.value, finite_l.as_ref(), b),
        Command::Table { q, t, samples, seed } => {
            let cells = estimate_table(q.value, *t, *samples, *seed)?;
            for c in cells {
                b.results.push(ResultRow {
                    value: json!({
                        "x": c.x.positions(),
                        "y-x": c.offset,
                        "estimate": c.estimate.mean,
                        "samples": c.estimate.samples,
                        "seed": c.estimate.seed,
                    }),
                    ..ResultRow::estimate("mc", &c.estimate)
                });
            }
            Ok(())
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_csv(cmd: &Command, report: &Report) -> String {
    let mut out = format!("# {}\n", serde_json::to_string(&report.header).unwrap_or_default());
    if let Command::Table { .. } = cmd {
        let cells: Vec<_> = report
            .results
            .iter()
            .filter_map(|r| {
                let v = &r.value;
                let ints = |k: &str| -> Option<Vec<i64>> {
                    v.get(k)?.as_array()?.iter().map(Value::as_i64).collect()
                };
                Some(crate::montecarlo::TableCell {
                    x: LabeledConfig::new(ints("x")?),
                    offset: ints("y-x")?,
                    estimate: SimEstimate {
                        mean: v.get("estimate")?.as_f64()?,
                        stderr: r.stderr?,
                        samples: v.get("samples")?.as_u64()?,
                        seed: v.get("seed")?.as_u64()?,
                        hits: 0,
                    },
                })
            })
            .collect();
        out.push_str(&table_csv(&cells));
    } else {
        out.push_str("method,value,stderr,symbolic\n");
        for r in &report.results {
            let value = match &r.value {
                Value::Null => String::new(),
                Value::Number(n) => n.to_string(),
                v => v.to_string(),
            };
            out.push_str(&format!(
                "{},{},{},{}\n",
                csv_field(&r.method),
                csv_field(&value),
                r.stderr.map(|s| s.to_string()).unwrap_or_default(),
                csv_field(r.symbolic.as_deref().unwrap_or(""))
            ));
        }
    }
    for c in &report.checks {
        out.push_str(&format!("# check {}: {} ({})\n", c.name, if c.pass { "pass" } else { "FAIL" }, c.detail));
    }
    out
}

/// Run a parsed command and build its report.
pub fn execute(cli: &Cli) -> Result<Report> {
    let query = serde_json::to_value(&cli.command).map_err(|e| Error::Parse(e.to_string()))?;
    let mut b = Builder::new();
    let go = |b: &mut Builder| dispatch(&cli.command, b);
    match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Resource(e.to_string()))?;
            pool.install(|| go(&mut b))?;
        }
        None => go(&mut b)?,
    }
    Ok(b.finish(query))
}

/// Parse `args`, run the command and write its output; returns the exit
/// code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INVALID;
        }
    };
    let format = cli.format.unwrap_or(match cli.command {
        Command::Table { .. } => Format::Csv,
        _ => Format::Json,
    });
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&report).unwrap_or_default() + "\n",
        Format::Csv => render_csv(&cli.command, &report),
    };
    let _ = out.write_all(text.as_bytes());
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

/// [`run_with`] on the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("qtazrp").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn json_of(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn parses_q_forms() {
        assert_eq!("3/5".parse::<QArg>().unwrap().fraction, Some((3, 5)));
        assert!(("0.6".parse::<QArg>().unwrap().value - 0.6).abs() < 1e-15);
        assert!("1.2".parse::<QArg>().is_err());
        assert!("3/0".parse::<QArg>().is_err());
        assert_eq!("0,-1,-2".parse::<IntList>().unwrap().0, vec![0, -1, -2]);
    }

    #[test]
    fn exponent_blocks_follow_duality() {
        assert_eq!(moment_exponents(&[2, 1], &[3, 1]).unwrap(), vec![3, 1, 1]);
        assert_eq!(moment_exponents(&[1, 1, 1], &[4, 2, 1]).unwrap(), vec![4, 2, 1]);
    }

    #[test]
    fn symbolic_hitting_probability() {
        let (code, out, _) = call(&["hitprob", "--x", "0,-1,-2", "--y", "1,3,2", "--symbolic"]);
        assert_eq!(code, 0);
        let v = json_of(&out);
        let text = v["results"][0]["symbolic"].as_str().unwrap();
        assert!(text.contains("7168"), "{text}");
        assert_eq!(v["header"]["query"]["command"], "hitprob");
    }

    #[test]
    fn cdf_all_methods_agree() {
        let (code, out, _) = call(&[
            "cdf", "--x", "0,0,0", "--y", "0,1,3", "--q", "0.6", "--t", "2", "--mode", "all", "--samples", "200000",
        ]);
        assert_eq!(code, 0, "{out}");
        let v = json_of(&out);
        let methods: Vec<&str> = v["results"].as_array().unwrap().iter().map(|r| r["method"].as_str().unwrap()).collect();
        assert_eq!(methods, ["exact", "paths", "contour", "mc"]);
        for r in v["results"].as_array().unwrap() {
            assert!((r["value"].as_f64().unwrap() - 0.0695753).abs() < 2e-3);
        }
        assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    }

    #[test]
    fn validation_errors_exit_2() {
        assert_eq!(call(&["cdf", "--x", "0,0", "--y", "1", "--q", "0.5", "--t", "1"]).0, 2);
        assert_eq!(call(&["cdf", "--x", "0", "--y", "1", "--q", "2", "--t", "1"]).0, 2);
        assert_eq!(call(&["cdf", "--bogus"]).0, 2);
        assert_eq!(call(&["hitprob", "--x", "0", "--y", "1"]).0, 2);
    }

    #[test]
    fn failing_cross_checks_exit_3() {
        let (code, out, _) = call(&[
            "shift-verify", "--x", "0,-1,-2", "--y", "1,3,4", "--x2", "0,-1,-3", "--y2", "1,3,3", "--symbolic",
            "--qs", "0.6", "--ts", "2",
        ]);
        assert_eq!(code, 3, "{out}");
        let v = json_of(&out);
        let hit = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "hitting-equal").unwrap();
        assert_eq!(hit["pass"], false);
    }

    #[test]
    fn output_is_deterministic_and_thread_independent() {
        let args = ["qmoment", "--k", "1,1", "--M", "3,2", "--q", "0.5", "--t", "1", "--mode", "all", "--samples", "20000"];
        let a = call(&args).1;
        let mut with_threads = args.to_vec();
        with_threads.extend(["--threads", "2"]);
        let b = call(&with_threads).1;
        let strip = |s: &str| {
            let mut v = json_of(s);
            v["header"]["query"] = Value::Null;
            v
        };
        assert_eq!(strip(&a), strip(&b));
        assert_eq!(call(&args).1, a);
    }

    #[test]
    fn table_csv_layout() {
        let (code, out, _) = call(&["table", "--samples", "1000", "--seed", "7"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert!(lines[0].starts_with("# {"));
        assert_eq!(lines[1], "x,y-x,estimate,stderr,samples,seed");
        assert_eq!(lines.len(), 37);
        assert!(lines[2].ends_with(",1000,7"));
    }

    #[test]
    fn asymptotic_and_identity_commands() {
        let (code, out, _) = call(&["asymptotic", "--sigma", "0.5", "--q", "0.3"]);
        assert_eq!(code, 0);
        let v = json_of(&out);
        assert!((v["results"][0]["value"].as_f64().unwrap() - 0.6914624612740131).abs() < 1e-10);
        let (code, out, _) = call(&["contour-check", "--seeds", "2", "--q", "0.5"]);
        assert_eq!(code, 0, "{out}");
        let (code, out, _) = call(&["simulate", "--x", "0,0", "--q", "0.5", "--steps", "4"]);
        assert_eq!(code, 0);
        let v = json_of(&out);
        let pos: Vec<i64> = serde_json::from_value(v["results"][0]["value"].clone()).unwrap();
        assert_eq!(pos.iter().sum::<i64>(), 4);
        let (code, _, _) = call(&["duality", "--k", "2,1", "--M", "3,1", "--q", "0.5", "--t", "1.2"]);
        assert_eq!(code, 0);
    }
}
