//! The `lebesgue` command line: one subcommand per capability, JSON on
//! stdout by default, CSV with `--csv`, an SVG snapshot with `--svg PATH`.
//!
//! Exit status is 0 when the verdict is a success, 1 when it is a failure
//! (a hypothesis violated, a function not summable, ...) and 2 on usage
//! errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cantor::{build_stage, CantorKind};
use crate::convergence::{check_dominated, check_monotone, egorov_witness, fatou_gap, ConvergenceConfig, ConvergenceError, ConvergenceReport};
use crate::fubini::{fubini_check, section_identity_check, FubiniError, ReductionVerdict};
use crate::lebesgue::{
    abs_continuity_probe, exterior_interior_measure, indicator_of, integrate_bounded, integrate_general, measure, IntegralResult, LebesgueError,
    SetDescriptor, TruncationSchedule, Verdict,
};
use crate::qc::{restrict_to_set, QcError, QcFunction, QcSequence};
use crate::rational::{format_rational, parse_rational, to_f64, Length, Rational};
use crate::riemann::{darboux, dini_test, riemann_integrate, RiemannError};
use crate::set::{disjointify_1d, dyadic_decompose, lattice_hull, Interval, Multirectangle, OpenSet, Rectangle, Topology};

#[derive(Parser, Debug)]
#[command(name = "lebesgue", version, about = "Constructive Lebesgue integration toolkit")]
pub struct Cli {
    /// JSON report on stdout (the default)
    #[arg(long, global = true)]
    pub json: bool,
    /// CSV table on stdout instead of JSON
    #[arg(long, global = true, conflicts_with = "json")]
    pub csv: bool,
    /// Also write an SVG snapshot to PATH
    #[arg(long, global = true, value_name = "PATH")]
    pub svg: Option<PathBuf>,
    /// Seed for randomized trials
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lebesgue integral of a function over a domain
    Integrate(IntegrateArgs),
    /// Riemann integral with Darboux/Gauss error control
    Riemann(RiemannArgs),
    /// Dini's criterion for Riemann integrability
    Dini(DiniArgs),
    /// Measure of a multirectangle or characteristic function
    Measure(MeasureArgs),
    /// Dyadic cube decomposition of an open set
    Decompose(DecomposeArgs),
    /// Stages of the ternary and Smith–Volterra–Cantor sets
    Cantor(CantorArgs),
    /// Finite-stage Egorov witness for a sequence
    Egorov(EgorovArgs),
    /// Monotone, dominated or Fatou check for a sequence
    Converge(ConvergeArgs),
    /// Direct against iterated integrals
    Fubini(FubiniArgs),
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn positive_rational(s: &str) -> Result<Rational, String> {
    let r = rational_arg(s)?;
    if r > Rational::from_integer(0.into()) {
        Ok(r)
    } else {
        Err("must be positive".into())
    }
}

fn tolerance(s: &str) -> Result<f64, String> {
    let v = match s.trim().parse::<f64>() {
        Ok(v) => v,
        Err(_) => to_f64(&rational_arg(s)?),
    };
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err("tolerance must be positive".into())
    }
}

#[derive(Args, Debug)]
pub struct IntegrateArgs {
    /// Function in the DSL, e.g. `sum(dirichlet,poly:0,1)`
    #[arg(long = "fn", value_name = "DSL")]
    pub function: String,
    /// Integration domain, e.g. `[0,1]`, `[0,1]x[0,2]` or `R`
    #[arg(long)]
    pub domain: Option<String>,
    /// Integrate over the set with this characteristic function or literal
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long, default_value_t = 64)]
    pub stages: u32,
    #[arg(long, default_value = "1e-8", value_parser = tolerance)]
    pub rtol: f64,
    /// Truncation schedule `R = N = 2^j`, `j ≤ J`
    #[arg(long, default_value_t = 10)]
    pub schedule: u32,
    /// Random open cubes for the absolute-continuity probe
    #[arg(long)]
    pub probe: Option<u32>,
}

#[derive(Args, Debug)]
pub struct RiemannArgs {
    #[arg(long = "fn", value_name = "DSL")]
    pub function: String,
    #[arg(long)]
    pub interval: Option<String>,
    #[arg(long, default_value = "1e-8", value_parser = tolerance)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct DiniArgs {
    #[arg(long = "fn", value_name = "DSL")]
    pub function: String,
    #[arg(long, default_value = "[0,1]")]
    pub interval: String,
    #[arg(long, value_parser = positive_rational)]
    pub alpha: Rational,
    #[arg(long, value_parser = positive_rational)]
    pub eps: Rational,
    #[arg(long, default_value_t = 4096)]
    pub max_n: u32,
}

#[derive(Args, Debug)]
pub struct MeasureArgs {
    /// Multirectangle literal (`[0,1]x[0,1]|(2,3)x(0,1)` or JSON) or a
    /// characteristic function in the DSL
    #[arg(long, required_unless_present = "random")]
    pub set: Option<String>,
    /// Width of the exterior/interior measure brackets
    #[arg(long, value_parser = positive_rational, requires = "box")]
    pub eps: Option<Rational>,
    /// Reference box for the brackets
    #[arg(long = "box")]
    pub r#box: Option<String>,
    /// Compare both measures on this many random multiintervals
    #[arg(long, conflicts_with = "set")]
    pub random: Option<u32>,
    #[arg(long, default_value_t = 4)]
    pub components: u32,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    /// Open multirectangle, e.g. `(0,1)x(0,1)`
    #[arg(long)]
    pub set: String,
    #[arg(long, default_value_t = 8)]
    pub depth: u32,
    #[arg(long = "box")]
    pub r#box: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Emit {
    Intervals,
    Measure,
}

#[derive(Args, Debug)]
pub struct CantorArgs {
    /// `ternary` or `svc`
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub stage: u32,
    #[arg(long, value_enum, default_value_t = Emit::Intervals)]
    pub emit: Emit,
}

#[derive(Args, Debug)]
pub struct EgorovArgs {
    #[arg(long)]
    pub seq: String,
    #[arg(long, value_parser = positive_rational)]
    pub eps: Rational,
    /// Comma-separated σ values
    #[arg(long, default_value = "1/2,1/4,1/8")]
    pub sigmas: String,
    #[arg(long, default_value_t = 8)]
    pub levels: u32,
    #[arg(long, default_value_t = 1024)]
    pub grid: u32,
    #[arg(long, default_value_t = 256)]
    pub ncap: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LawArg {
    Monotone,
    Dominated,
    Fatou,
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub law: LawArg,
    #[arg(long)]
    pub seq: String,
    #[arg(long)]
    pub dominator: Option<String>,
    #[arg(long, default_value_t = 64)]
    pub stages: u32,
}

#[derive(Args, Debug)]
pub struct FubiniArgs {
    /// Function of two or more variables
    #[arg(long = "fn", value_name = "DSL", required_unless_present = "set")]
    pub function: Option<String>,
    #[arg(long, default_value = "[0,1]x[0,1]")]
    pub rect: String,
    #[arg(long, default_value = "1e-6", value_parser = tolerance)]
    pub tol: f64,
    /// Check the section identity for this multirectangle instead
    #[arg(long, conflicts_with = "function")]
    pub set: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub axis: usize,
}

/// A finished run: the report in every format and whether it passed.
pub struct Report {
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub svg: Option<String>,
    pub pass: bool,
}

impl Report {
    fn new(json: Value, pass: bool) -> Report {
        Report { json, header: Vec::new(), rows: Vec::new(), svg: None, pass }
    }

    fn table(mut self, header: &[&str], rows: Vec<Vec<String>>) -> Report {
        self.header = header.iter().map(|s| s.to_string()).collect();
        self.rows = rows;
        self
    }

    fn svg(mut self, svg: String) -> Report {
        self.svg = Some(svg);
        self
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// A verdict failure that still has a report.
    Failure(String, Value),
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn failure(verdict: &str, e: impl std::fmt::Display) -> CliError {
    let msg = e.to_string();
    CliError::Failure(msg.clone(), json!({ "verdict": verdict, "error": msg }))
}

fn lebesgue_error(e: LebesgueError) -> CliError {
    match e {
        LebesgueError::BadParams(_) | LebesgueError::Qc(QcError::Parse(_) | QcError::UnknownName(_) | QcError::BadParams(_)) => usage(e),
        LebesgueError::MissingBound => failure("missing-bound", e),
        LebesgueError::Riemann(RiemannError::NotRiemannIntegrable { .. }) => failure("not-riemann-integrable", e),
        other => failure("error", other),
    }
}

fn riemann_error(e: RiemannError) -> CliError {
    match e {
        RiemannError::BadParams(_) => usage(e),
        RiemannError::NotRiemannIntegrable { gap, levels } => {
            CliError::Failure(e.to_string(), json!({ "verdict": "not-riemann-integrable", "gap": gap, "levels": levels }))
        }
        RiemannError::UnboundedFunction => failure("unbounded", e),
    }
}

fn parse_fn(text: &str) -> Result<QcFunction, CliError> {
    QcFunction::parse(text).map_err(usage)
}

/// `R`, `R^d`, `R2` or a rectangle literal.
fn parse_rect(text: &str, dim: usize) -> Result<Rectangle, CliError> {
    let t = text.trim();
    let whole = t.strip_prefix('R').or_else(|| t.strip_prefix('ℝ'));
    let r = match whole {
        Some(rest) => {
            let rest = rest.trim_start_matches('^').trim();
            let d = if rest.is_empty() { dim } else { rest.parse::<usize>().map_err(|_| usage(format!("bad domain `{t}`")))? };
            Rectangle::whole_space(d)
        }
        None => Rectangle::parse(t).map_err(usage)?,
    };
    if r.dim() != dim {
        return Err(usage(format!("domain `{t}` has dimension {}, the function {dim}", r.dim())));
    }
    Ok(r)
}

/// A set argument: a multirectangle literal, else a characteristic
/// function in the DSL.
fn parse_set_fn(text: &str) -> Result<QcFunction, CliError> {
    match Multirectangle::parse(text) {
        Ok(m) => Ok(indicator_of(&m)),
        Err(_) => {
            let f = parse_fn(text)?;
            if !f.is_characteristic() {
                return Err(usage(format!("`{text}` is not a characteristic function")));
            }
            Ok(f)
        }
    }
}

fn restrict_domain(f: &QcFunction, rect: &Rectangle) -> Result<Option<QcFunction>, CliError> {
    match f.domain.intersect(rect) {
        Some(d) => Ok(Some(f.with_domain(d).map_err(usage)?)),
        None => Ok(None),
    }
}

/// `IntegralResult` as JSON with `value` as `"p/q"` when exact.
pub fn integral_json(r: &IntegralResult) -> Value {
    let mut v = serde_json::to_value(r).expect("serializable");
    if let Some(e) = &r.exact {
        v["value"] = Value::String(format_rational(e));
    } else if !r.value.is_finite() {
        v["value"] = Value::String(match r.verdict {
            Verdict::PlusInfinity => "+inf".into(),
            Verdict::MinusInfinity => "-inf".into(),
            _ => "nan".into(),
        });
    }
    if let Some(obj) = v.as_object_mut() {
        obj.remove("exact");
    }
    v
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn integrate(a: &IntegrateArgs, seed: u64) -> Result<Report, CliError> {
    let mut f = parse_fn(&a.function)?;
    if let Some(s) = &a.set {
        f = restrict_to_set(&f, &parse_set_fn(s)?).map_err(usage)?;
    }
    if let Some(d) = &a.domain {
        let rect = parse_rect(d, f.dim())?;
        match restrict_domain(&f, &rect)? {
            Some(g) => f = g,
            None => return Ok(integral_report(&IntegralResult::zero(), None)),
        }
    }
    if a.stages == 0 {
        return Err(usage("--stages must be at least 1"));
    }
    let bounded = f.bounded_domain().ok().filter(|bx| f.bound_on(bx).is_some_and(f64::is_finite));
    let result = match &bounded {
        Some(bx) => integrate_bounded(&f, bx, a.stages, a.rtol),
        None => integrate_general(&f, &TruncationSchedule::diagonal(a.schedule), a.stages, a.rtol),
    }
    .map_err(lebesgue_error)?;
    let probe = match (a.probe, &bounded) {
        (Some(n), Some(bx)) => Some(abs_continuity_probe(&f, bx, n, seed, a.stages.min(16)).map_err(lebesgue_error)?),
        (Some(_), None) => return Err(usage("--probe needs a bounded function on a bounded domain")),
        _ => None,
    };
    let mut report = integral_report(&result, probe.as_ref().map(|p| serde_json::to_value(p).expect("serializable")));
    if let Some(p) = &probe {
        report.pass &= p.iter().all(|r| r.within_bound != Some(false));
    }
    Ok(report)
}

fn integral_report(r: &IntegralResult, probe: Option<Value>) -> Report {
    let mut json = integral_json(r);
    if let Some(p) = probe {
        json["probe"] = p;
    }
    let pass = r.verdict != Verdict::NotIntegrable;
    let points: Vec<(f64, f64)> = r.trace.iter().map(|t| (t.n as f64, t.value)).collect();
    let report = if r.trace.is_empty() && !r.schedule.is_empty() {
        let rows =
            r.schedule.iter().map(|s| vec![format_rational(&s.radius), format_rational(&s.level), fmt_f64(s.plus), fmt_f64(s.minus)]).collect();
        Report::new(json, pass).table(&["radius", "level", "plus", "minus"], rows)
    } else {
        let rows = r
            .trace
            .iter()
            .map(|t| vec![t.n.to_string(), format_rational(&t.witness_length), fmt_f64(t.value), fmt_f64(t.riemann_gap), fmt_f64(t.error_bound)])
            .collect();
        Report::new(json, pass).table(&["n", "witnessLength", "value", "riemannGap", "errorBound"], rows)
    };
    let series = if points.is_empty() { r.schedule.iter().enumerate().map(|(j, s)| (j as f64, s.plus + s.minus)).collect() } else { points };
    report.svg(svg_series("stage value", &series))
}

fn riemann(a: &RiemannArgs) -> Result<Report, CliError> {
    let f = parse_fn(&a.function)?;
    let cell = match &a.interval {
        Some(t) => f.region_within(&parse_rect(t, f.dim())?.rational_bounds().ok_or_else(|| usage("the interval must be bounded"))?),
        None => f.bounded_domain(),
    }
    .map_err(usage)?;
    let r = riemann_integrate(&f.expr, &cell, a.tol).map_err(riemann_error)?;
    let mut json = serde_json::to_value(&r).expect("serializable");
    json["verdict"] = "riemann-integrable".into();
    let row = vec![
        fmt_f64(r.value),
        fmt_f64(r.gap),
        r.exact.as_ref().map(format_rational).unwrap_or_default(),
        format!("{:?}", r.method).to_lowercase(),
        r.cells.to_string(),
    ];
    Ok(Report::new(json, true).table(&["value", "gap", "exact", "method", "cells"], vec![row]))
}

fn interval_bounds(text: &str) -> Result<(Rational, Rational), CliError> {
    let r = parse_rect(text, 1)?;
    let b = r.rational_bounds().ok_or_else(|| usage("the interval must be bounded"))?;
    Ok(b[0].clone())
}

fn dini(a: &DiniArgs) -> Result<Report, CliError> {
    let f = parse_fn(&a.function)?;
    if f.dim() != 1 {
        return Err(usage("dini needs a function of one variable"));
    }
    let (h, k) = interval_bounds(&a.interval)?;
    let out = dini_test(&f.expr, &h, &k, &a.alpha, &a.eps, a.max_n).map_err(riemann_error)?;
    let pair = darboux(&f.expr, &h, &k, out.n).map_err(riemann_error)?;
    let alpha = to_f64(&a.alpha);
    let (hf, kf) = (to_f64(&h), to_f64(&k));
    let w = (kf - hf) / out.n as f64;
    let bars: Vec<(f64, f64, f64, bool)> =
        pair.cells.iter().enumerate().map(|(i, (m, big_m))| (hf + i as f64 * w, hf + (i + 1) as f64 * w, big_m - m, big_m - m >= alpha)).collect();
    let mut json = serde_json::to_value(&out).expect("serializable");
    json["verdict"] = if out.pass { "pass" } else { "fail" }.into();
    let row = vec![out.n.to_string(), format_rational(&out.heavy_length), out.pass.to_string()];
    Ok(Report::new(json, out.pass).table(&["n", "heavyLength", "pass"], vec![row]).svg(svg_oscillation(&bars, alpha)))
}

/// A random multiinterval in `[0,4]` with endpoints of denominator ≤ 16
/// and random topologies; components may overlap.
pub fn random_multiinterval(rng: &mut impl Rng, components: u32) -> Multirectangle {
    let topo = [Topology::Open, Topology::Closed, Topology::HalfOpenLo, Topology::HalfOpenHi];
    let ivs = (0..components)
        .map(|_| {
            let q: i64 = rng.gen_range(1..=16);
            let a: i64 = rng.gen_range(0..4 * q);
            let len: i64 = rng.gen_range(1..=q);
            let lo = Rational::new(a.into(), q.into());
            let hi = Rational::new((a + len).into(), q.into());
            Interval::new(crate::rational::Endpoint::Finite(lo), crate::rational::Endpoint::Finite(hi), topo[rng.gen_range(0..4)]).expect("ordered")
        })
        .collect();
    Multirectangle::from_intervals(ivs)
}

fn finite_length(l: Length) -> Option<Rational> {
    l.finite().cloned()
}

fn measure_cmd(a: &MeasureArgs, seed: u64) -> Result<Report, CliError> {
    let schedule = TruncationSchedule::default();
    if let Some(n) = a.random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut table = Vec::new();
        let mut all = true;
        for t in 0..n {
            let m = random_multiinterval(&mut rng, a.components.max(1));
            let exact = finite_length(disjointify_1d(&m).length()).expect("bounded");
            let via = measure(&SetDescriptor::Characteristic(indicator_of(&m)), &schedule, 4).map_err(lebesgue_error)?;
            let agree = via.exact.as_ref() == Some(&exact);
            all &= agree;
            rows.push(json!({ "trial": t, "set": m.to_string(), "measure": format_rational(&exact), "viaIntegral": integral_json(&via)["value"], "agree": agree }));
            table.push(vec![
                t.to_string(),
                m.to_string(),
                format_rational(&exact),
                integral_json(&via)["value"].to_string().trim_matches('"').to_string(),
                agree.to_string(),
            ]);
        }
        let json = json!({ "trials": n, "seed": seed, "allAgree": all, "rows": rows });
        return Ok(Report::new(json, all).table(&["trial", "set", "measure", "viaIntegral", "agree"], table));
    }
    let text = a.set.as_deref().expect("clap requires --set");
    match Multirectangle::parse(text) {
        Ok(m) => {
            let point_measure = m.measure();
            let mut json = json!({
                "set": m.to_string(),
                "length": m.length().finite().map_or_else(|| "inf".to_string(), format_rational),
                "measure": point_measure.finite().map_or_else(|| "inf".to_string(), format_rational),
                "flags": serde_json::to_value(m.flags()).expect("serializable"),
            });
            if m.dim() == 1 {
                json["disjoint"] = disjointify_1d(&m).intervals().map(|i| i.to_string()).collect::<Vec<_>>().into();
            }
            let via = measure(&SetDescriptor::Characteristic(indicator_of(&m)), &schedule, 4).map_err(lebesgue_error)?;
            json["viaIntegral"] = integral_json(&via)["value"].clone();
            let agree = match (&via.exact, point_measure.finite()) {
                (Some(a), Some(b)) => a == b,
                (_, None) => via.verdict == Verdict::PlusInfinity,
                _ => false,
            };
            json["agree"] = agree.into();
            if let (Some(eps), Some(bx)) = (&a.eps, &a.r#box) {
                let bx = parse_rect(bx, m.dim())?;
                let b = exterior_interior_measure(&m, &bx, eps).map_err(lebesgue_error)?;
                json["brackets"] = serde_json::to_value(&b).expect("serializable");
            }
            let row = vec![
                m.to_string(),
                json["measure"].as_str().unwrap_or_default().to_string(),
                json["viaIntegral"].to_string().trim_matches('"').to_string(),
                agree.to_string(),
            ];
            let svg = svg_rects(&m);
            let mut r = Report::new(json, agree).table(&["set", "measure", "viaIntegral", "agree"], vec![row]);
            if let Some(s) = svg {
                r = r.svg(s);
            }
            Ok(r)
        }
        Err(_) => {
            let f = parse_fn(text)?;
            let r = measure(&SetDescriptor::Characteristic(f), &schedule, 16).map_err(lebesgue_error)?;
            Ok(integral_report(&r, None))
        }
    }
}

fn decompose(a: &DecomposeArgs) -> Result<Report, CliError> {
    let m = Multirectangle::parse(&a.set).map_err(usage)?;
    let o = OpenSet::new(m.clone()).map_err(usage)?;
    let bx = match &a.r#box {
        Some(b) => parse_rect(b, m.dim())?,
        None => lattice_hull(&o).ok_or_else(|| usage("the open set must be bounded"))?,
    };
    let dec = dyadic_decompose(&o, &bx, a.depth).map_err(usage)?;
    let cubes = dec.to_multirectangle(m.dim());
    let json = json!({
        "set": m.to_string(),
        "depth": a.depth,
        "length": format_rational(&dec.length()),
        "measure": finite_length(o.measure()).map_or_else(|| "inf".to_string(), |v| format_rational(&v)),
        "perLevel": dec.per_level,
        "cubes": dec.cubes.len(),
    });
    let rows = dec.per_level.iter().enumerate().map(|(l, c)| vec![l.to_string(), c.to_string()]).collect();
    let mut r = Report::new(json, true).table(&["level", "cubes"], rows);
    if let Some(s) = svg_rects(&cubes) {
        r = r.svg(s);
    }
    Ok(r)
}

fn cantor(a: &CantorArgs) -> Result<Report, CliError> {
    let kind: CantorKind = a.kind.parse().map_err(usage)?;
    let stage = build_stage(kind, a.stage).map_err(usage)?;
    let json = match a.emit {
        Emit::Intervals => stage.to_json(),
        Emit::Measure => json!({
            "kind": kind.to_string(),
            "stage": a.stage,
            "measureRemoved": format_rational(&stage.measure_removed()),
            "measureRetained": format_rational(&stage.measure_retained()),
        }),
    };
    let mut rows: Vec<Vec<String>> = stage.removed().intervals().map(|i| vec!["removed".into(), i.to_string()]).collect();
    rows.extend(stage.retained().intervals().map(|i| vec!["retained".into(), i.to_string()]));
    let bars = vec![("removed".to_string(), interval_spans(stage.removed())), ("retained".to_string(), interval_spans(stage.retained()))];
    Ok(Report::new(json, true).table(&["part", "interval"], rows).svg(svg_bars(&bars, 0.0, 1.0)))
}

fn interval_spans(m: &Multirectangle) -> Vec<(f64, f64)> {
    m.intervals().map(|i| (i.lo().to_f64(), i.hi().to_f64())).collect()
}

fn parse_seq(text: &str) -> Result<QcSequence, CliError> {
    QcSequence::parse(text).map_err(usage)
}

fn egorov(a: &EgorovArgs) -> Result<Report, CliError> {
    let seq = parse_seq(&a.seq)?;
    let sigmas =
        a.sigmas.split(',').map(|s| positive_rational(s.trim()).map_err(|e| usage(format!("sigma `{s}`: {e}")))).collect::<Result<Vec<_>, _>>()?;
    let cfg = ConvergenceConfig { levels: a.levels, grid: a.grid, n_cap: a.ncap, ..Default::default() };
    let w = egorov_witness(&seq, &a.eps, &sigmas, &cfg).map_err(|e| match e {
        ConvergenceError::BadParams(_) => usage(e),
        ConvergenceError::UnboundedDomain => failure("unbounded-domain", e),
        ConvergenceError::BudgetExceeded { .. } => failure("budget-exceeded", e),
        other => failure("error", other),
    })?;
    let pass = w.length < w.eps && w.table.iter().all(|r| r.stage.is_some());
    let mut json = serde_json::to_value(&w).expect("serializable");
    json["verdict"] = if pass { "pass" } else { "fail" }.into();
    let rows = w.table.iter().map(|r| vec![format_rational(&r.sigma), r.stage.map_or_else(String::new, |s| s.to_string()), fmt_f64(r.sup)]).collect();
    let (lo, hi) = seq.domain().rational_bounds().map(|b| (to_f64(&b[0].0), to_f64(&b[0].1))).unwrap_or((0.0, 1.0));
    let bars: Vec<(String, Vec<(f64, f64)>)> =
        w.levels.iter().map(|l| (format!("A{} m={}", l.k, l.m), l.intervals.iter().map(|i| (to_f64(&i.lo), to_f64(&i.hi))).collect())).collect();
    Ok(Report::new(json, pass).table(&["sigma", "stage", "sup"], rows).svg(svg_bars(&bars, lo, hi)))
}

fn converge(a: &ConvergeArgs) -> Result<Report, CliError> {
    let seq = parse_seq(&a.seq)?;
    let cfg = ConvergenceConfig { stages: a.stages.max(1), ..Default::default() };
    let dominator = a.dominator.as_deref().map(parse_fn).transpose()?;
    let map = |e: ConvergenceError| match e {
        ConvergenceError::BadParams(_) => usage(e),
        other => failure("error", other),
    };
    let r: ConvergenceReport = match a.law {
        LawArg::Monotone => check_monotone(&seq, &cfg),
        LawArg::Dominated => check_dominated(&seq, dominator.as_ref(), &cfg),
        LawArg::Fatou => fatou_gap(&seq, &cfg),
    }
    .map_err(map)?;
    let pass = r.hypotheses_hold() && r.conclusion_holds;
    let mut json = serde_json::to_value(&r).expect("serializable");
    json["verdict"] = if r.violation.is_some() {
        "hypothesis-violated"
    } else if r.conclusion_holds {
        "pass"
    } else {
        "fail"
    }
    .into();
    let rows = r.integrals.iter().map(|s| vec![s.n.to_string(), fmt_f64(s.value), fmt_f64(s.error_bound)]).collect();
    let pts: Vec<(f64, f64)> = r.integrals.iter().map(|s| ((s.n as f64).log2(), s.value)).collect();
    Ok(Report::new(json, pass).table(&["n", "integral", "errorBound"], rows).svg(svg_series("integral of f_n against log2 n", &pts)))
}

fn fubini(a: &FubiniArgs) -> Result<Report, CliError> {
    if let Some(s) = &a.set {
        let m = Multirectangle::parse(s).map_err(usage)?;
        let r = section_identity_check(&m, a.axis).map_err(usage)?;
        let json = serde_json::to_value(&r).expect("serializable");
        let rows = r.pieces.iter().map(|p| vec![format_rational(&p.lo), format_rational(&p.hi), format_rational(&p.section_measure)]).collect();
        return Ok(Report::new(json, r.agree).table(&["lo", "hi", "sectionMeasure"], rows));
    }
    let f = parse_fn(a.function.as_deref().expect("clap requires --fn"))?;
    let rect = parse_rect(&a.rect, f.dim())?;
    let rep = fubini_check(&f, &rect, a.tol).map_err(|e| match e {
        FubiniError::NotSummable(gate) => {
            let mut v = serde_json::to_value(&*gate).expect("serializable");
            v["verdict"] = "not-summable".into();
            CliError::Failure("not summable: the Tonelli gate diverges".into(), v)
        }
        FubiniError::BadParams(_) | FubiniError::Qc(_) => usage(e),
        FubiniError::InnerNotIntegrable { .. } => failure("inner-not-integrable", e),
        other => failure("error", other),
    })?;
    let pass = rep.verdict == ReductionVerdict::Pass;
    let mut json = serde_json::to_value(&rep).expect("serializable");
    json["direct"] = integral_json(&rep.direct);
    for (i, o) in rep.iterated.iter().enumerate() {
        json["iterated"][i]["result"] = integral_json(&o.result);
    }
    let mut rows = vec![vec!["direct".to_string(), fmt_f64(rep.direct.value), String::new(), fmt_f64(rep.direct.error_bound)]];
    rows.extend(rep.iterated.iter().map(|o| vec![o.order.clone(), fmt_f64(o.result.value), fmt_f64(o.gap), fmt_f64(o.allowed)]));
    Ok(Report::new(json, pass).table(&["order", "value", "gap", "allowed"], rows))
}

fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Integrate(a) => integrate(a, cli.seed),
        Command::Riemann(a) => riemann(a),
        Command::Dini(a) => dini(a),
        Command::Measure(a) => measure_cmd(a, cli.seed),
        Command::Decompose(a) => decompose(a),
        Command::Cantor(a) => cantor(a),
        Command::Egorov(a) => egorov(a),
        Command::Converge(a) => converge(a),
        Command::Fubini(a) => fubini(a),
    }
}

fn write_csv(out: &mut dyn Write, header: &[String], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
}

/// Runs the command line and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let (report, code) = match dispatch(&cli) {
        Ok(r) => {
            let code = if r.pass { 0 } else { 1 };
            (r, code)
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return 2;
        }
        Err(CliError::Failure(msg, json)) => {
            let _ = writeln!(err, "{msg}");
            (Report::new(json, false), 1)
        }
    };
    let written = if cli.csv && !report.header.is_empty() {
        write_csv(out, &report.header, &report.rows)
    } else {
        serde_json::to_writer_pretty(&mut *out, &report.json).map_err(std::io::Error::other).and_then(|_| writeln!(out))
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return 2;
    }
    if let Some(path) = &cli.svg {
        match &report.svg {
            Some(svg) => {
                if let Err(e) = std::fs::write(path, svg) {
                    let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                    return 2;
                }
            }
            None => {
                let _ = writeln!(err, "warning: no SVG view for this report");
            }
        }
    }
    code
}

const W: f64 = 640.0;
const H: f64 = 360.0;
const PAD: f64 = 40.0;

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{PAD}" y="24" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Horizontal bars, one row per label.
fn svg_bars(rows: &[(String, Vec<(f64, f64)>)], lo: f64, hi: f64) -> String {
    let mut s = svg_open("intervals");
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let row_h = ((H - 2.0 * PAD) / rows.len().max(1) as f64).min(40.0);
    let sx = |x: f64| PAD + 80.0 + (x.clamp(lo, hi) - lo) / span * (W - 2.0 * PAD - 80.0);
    for (i, (label, spans)) in rows.iter().enumerate() {
        let y = PAD + i as f64 * row_h;
        let _ = writeln!(s, r#"<text x="4" y="{:.1}" font-family="sans-serif" font-size="11">{}</text>"#, y + row_h * 0.6, escape(label));
        for (a, b) in spans {
            let (x0, x1) = (sx(*a), sx(*b));
            let _ = writeln!(
                s,
                r##"<rect x="{x0:.3}" y="{:.1}" width="{:.3}" height="{:.1}" fill="#4a7ab5"/>"##,
                y + 2.0,
                (x1 - x0).max(0.5),
                row_h * 0.7
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// A 1D or 2D multirectangle, drawn to scale.
fn svg_rects(m: &Multirectangle) -> Option<String> {
    if m.is_empty() || m.dim() > 2 || !m.is_bounded() {
        return None;
    }
    if m.dim() == 1 {
        let spans = interval_spans(m);
        let lo = spans.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let hi = spans.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        return Some(svg_bars(&[("set".into(), spans)], lo, hi));
    }
    let boxes: Vec<Vec<(f64, f64)>> = m.rects().iter().map(Rectangle::f64_bounds).collect();
    let bound =
        |axis: usize, pick: fn(&(f64, f64)) -> f64, fold: fn(f64, f64) -> f64, init: f64| boxes.iter().map(|b| pick(&b[axis])).fold(init, fold);
    let (x0, x1) = (bound(0, |p| p.0, f64::min, f64::INFINITY), bound(0, |p| p.1, f64::max, f64::NEG_INFINITY));
    let (y0, y1) = (bound(1, |p| p.0, f64::min, f64::INFINITY), bound(1, |p| p.1, f64::max, f64::NEG_INFINITY));
    let scale = ((W - 2.0 * PAD) / (x1 - x0).max(1e-12)).min((H - 2.0 * PAD) / (y1 - y0).max(1e-12));
    let mut s = svg_open("rectangles");
    for b in &boxes {
        let x = PAD + (b[0].0 - x0) * scale;
        let y = H - PAD - (b[1].1 - y0) * scale;
        let _ = writeln!(
            s,
            r##"<rect x="{x:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" fill="#4a7ab5" fill-opacity="0.5" stroke="#1d3557" stroke-width="0.3"/>"##,
            (b[0].1 - b[0].0) * scale,
            (b[1].1 - b[1].0) * scale
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}

fn svg_series(title: &str, pts: &[(f64, f64)]) -> String {
    let mut s = svg_open(title);
    let finite: Vec<(f64, f64)> = pts.iter().cloned().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    if finite.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let (x0, x1) = finite.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (y0, y1) = finite.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0).max(1e-12) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0).max(1e-12) * (H - 2.0 * PAD);
    let path: Vec<String> = finite.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
    let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#1d3557" stroke-width="1.5"/>"##, path.join(" "));
    let _ = writeln!(s, r#"<text x="4" y="{:.1}" font-family="sans-serif" font-size="11">{y1:.6}</text>"#, PAD);
    let _ = writeln!(s, r#"<text x="4" y="{:.1}" font-family="sans-serif" font-size="11">{y0:.6}</text>"#, H - PAD);
    s.push_str("</svg>\n");
    s
}

fn svg_oscillation(bars: &[(f64, f64, f64, bool)], alpha: f64) -> String {
    let mut s = svg_open(&format!("oscillation per cell, alpha = {alpha}"));
    let top = bars.iter().map(|b| b.2).fold(alpha, f64::max).max(1e-12);
    let (lo, hi) = (bars.first().map_or(0.0, |b| b.0), bars.last().map_or(1.0, |b| b.1));
    let sx = |x: f64| PAD + (x - lo) / (hi - lo).max(1e-12) * (W - 2.0 * PAD);
    for (a, b, osc, heavy) in bars {
        let h = osc / top * (H - 2.0 * PAD);
        let colour = if *heavy { "#c0392b" } else { "#4a7ab5" };
        let _ = writeln!(
            s,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{h:.3}" fill="{colour}"/>"#,
            sx(*a),
            H - PAD - h,
            (sx(*b) - sx(*a)).max(0.3)
        );
    }
    let ya = H - PAD - alpha / top * (H - 2.0 * PAD);
    let _ = writeln!(s, r#"<line x1="{PAD}" y1="{ya:.2}" x2="{:.1}" y2="{ya:.2}" stroke="black" stroke-dasharray="4 3"/>"#, W - PAD);
    s.push_str("</svg>\n");
    s
}

/// Convenience wrapper around [`run`] for in-process callers.
pub fn run_to_string<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(args, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, Value) {
        let mut full = vec!["lebesgue"];
        full.extend_from_slice(args);
        let (code, out, _) = run_to_string(full);
        (code, serde_json::from_str(&out).unwrap_or(Value::Null))
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn dirichlet_zero() {
        let (code, v) = run_args(&["integrate", "--fn", "dirichlet", "--domain", "[0,1]"]);
        assert_eq!(code, 0);
        assert_eq!(v["value"], "0/1");
        assert_eq!(v["errorBound"], 0.0);
    }

    #[test]
    fn cantor_measure() {
        let (code, v) = run_args(&["cantor", "--kind", "svc", "--stage", "10", "--emit", "measure"]);
        assert_eq!(code, 0);
        assert_eq!(v["measureRemoved"], "1023/2048");
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_args(&["integrate", "--fn", "nonsense"]).0, 2);
        assert_eq!(run_args(&["frobnicate"]).0, 2);
        assert_eq!(run_args(&["dini", "--fn", "thomae", "--alpha", "0", "--eps", "1/10"]).0, 2);
    }

    #[test]
    fn fubini_product() {
        let (code, v) = run_args(&["fubini", "--fn", "prod(poly:0,1;poly:0,1)", "--rect", "[0,1]x[0,1]"]);
        assert_eq!(code, 0, "{v}");
        assert_eq!(v["direct"]["value"], "1/4");
    }

    #[test]
    fn not_summable_exits_one() {
        let (code, v) = run_args(&["fubini", "--fn", "exp-abs-y", "--rect", "R2"]);
        assert_eq!(code, 1);
        assert_eq!(v["verdict"], "not-summable");
    }

    #[test]
    fn csv_output() {
        let (code, out, _) = run_to_string(["lebesgue", "--csv", "cantor", "--kind", "ternary", "--stage", "1"]);
        assert_eq!(code, 0);
        assert_eq!(out, "part,interval\nremoved,\"(1/3,2/3)\"\nretained,\"[0/1,1/3]\"\nretained,\"[2/3,1/1]\"\n");
    }
}
