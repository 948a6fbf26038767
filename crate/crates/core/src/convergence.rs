//! Pointwise convergence of sequences: Egorov witnesses and the
//! monotone, dominated and Fatou checks.
//!
//! Everything pointwise is decided on a finite grid of rationals, so a
//! passing hypothesis check is evidence rather than proof. A failing one
//! comes with the counterexample point.

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::cantor::unit_index;
use crate::lebesgue::{integrate_general, integrate_stage, IntegralResult, LebesgueError, TruncationSchedule, Verdict, DEFAULT_RTOL};
use crate::qc::sequence::{Family, QcSequence};
use crate::qc::witness::RationalCover;
use crate::qc::{Coord, QcError, QcFunction, Witness};
use crate::rational::{format_rational, int, pow2_inv, serialize_rational, to_f64, Length, Rational};
use crate::set::{Interval, Multirectangle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvergenceError {
    #[error("the sequence lives on an unbounded domain")]
    UnboundedDomain,
    #[error("no stage m ≤ {m_max} keeps level {level} within its budget")]
    BudgetExceeded { level: u32, m_max: u64 },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Qc(#[from] QcError),
    #[error(transparent)]
    Lebesgue(#[from] LebesgueError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceConfig {
    /// Window length: `w_m` looks at `f_r` for `m < r ≤ m + n_cap`.
    pub n_cap: u64,
    /// Equispaced grid cells.
    pub grid: u32,
    /// Search cap for stages.
    pub m_max: u64,
    /// Egorov levels `η_k = 2^{-k}`, `k = 1..=levels`.
    pub levels: u32,
    /// Integrals are sampled at `n = 2^j` and `2^j + 1`, `j ≤ log_max`.
    pub log_max: u32,
    /// Consecutive members checked pointwise for the hypotheses.
    pub check_members: u32,
    /// Half-line domains are checked on `[a, a + window]`.
    pub window: Rational,
    pub stages: u32,
    pub tol: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            n_cap: 256,
            grid: 1024,
            m_max: 1 << 16,
            levels: 8,
            log_max: 10,
            check_members: 64,
            window: int(64),
            stages: 64,
            tol: 1e-6,
        }
    }
}

/// Evaluates members on a fixed grid, with shortcuts for the families
/// whose generic evaluation is slow.
struct GridEval<'a> {
    seq: &'a QcSequence,
    xs: &'a [Rational],
    xf: Vec<f64>,
    qn_index: Vec<Option<u64>>,
}

impl<'a> GridEval<'a> {
    fn new(seq: &'a QcSequence, xs: &'a [Rational]) -> Self {
        let qn_index = if seq.family == Family::QnIndicator { xs.iter().map(unit_index).collect() } else { Vec::new() };
        GridEval { seq, xs, xf: xs.iter().map(to_f64).collect(), qn_index }
    }

    fn member(&self, n: u64) -> Vec<f64> {
        match self.seq.family {
            Family::Power => self.xf.iter().map(|x| x.powi(n.min(i32::MAX as u64) as i32)).collect(),
            Family::QnIndicator => self.qn_index.iter().map(|i| if i.is_some_and(|i| i <= n) { 1.0 } else { 0.0 }).collect(),
            _ => {
                let f = self.seq.member(u32::try_from(n).unwrap_or(u32::MAX));
                self.xs.iter().map(|x| f.eval(&[Coord::Exact(x.clone())])).collect()
            }
        }
    }

    fn limit(&self) -> Vec<f64> {
        let f = self.seq.limit();
        self.xs.iter().map(|x| f.eval(&[Coord::Exact(x.clone())])).collect()
    }
}

fn grid_on(seq: &QcSequence, lo: &Rational, hi: &Rational, cells: u32) -> Vec<Rational> {
    let step = (hi - lo) / int(cells as i64);
    let mut xs: Vec<Rational> = (0..=cells).map(|k| lo + &step * int(k as i64)).collect();
    let cell = [(lo.clone(), hi.clone())];
    xs.extend(seq.breakpoints(&cell, 32).into_iter().filter(|x| lo <= x && x <= hi));
    let dom = seq.domain();
    xs.retain(|x| dom.contains(std::slice::from_ref(x)));
    xs.sort();
    xs.dedup();
    xs
}

fn check_box(seq: &QcSequence, cfg: &ConvergenceConfig) -> (Rational, Rational) {
    let dom = seq.domain();
    let side = &dom.sides()[0];
    let lo = side.lo().finite().cloned().unwrap_or_else(Rational::zero);
    let hi = side.hi().finite().cloned().unwrap_or_else(|| &lo + &cfg.window);
    (lo, hi)
}

fn bounded_box(seq: &QcSequence) -> Result<(Rational, Rational), ConvergenceError> {
    let dom = seq.domain();
    let side = &dom.sides()[0];
    match (side.lo().finite(), side.hi().finite()) {
        (Some(a), Some(b)) => Ok((a.clone(), b.clone())),
        _ => Err(ConvergenceError::UnboundedDomain),
    }
}

/// `w_m(x) = sup_{m<r≤m+n_cap} f_r(x) − inf_{m<r≤m+n_cap} f_r(x)` on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WmGrid {
    #[serde(serialize_with = "serialize_points")]
    pub grid: Vec<Rational>,
    pub m: u64,
    pub n_cap: u64,
    pub values: Vec<f64>,
    /// Exact values, when every member evaluates exactly on the grid.
    #[serde(serialize_with = "serialize_opt_points")]
    pub exact: Option<Vec<Rational>>,
}

fn serialize_points<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(format_rational))
}

fn serialize_opt_points<S: serde::Serializer>(v: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => serialize_points(v, s),
        None => s.serialize_none(),
    }
}

pub fn wm_grid(seq: &QcSequence, m: u64, n_cap: u64, grid: &[Rational]) -> Result<WmGrid, ConvergenceError> {
    if n_cap == 0 {
        return Err(ConvergenceError::BadParams("n_cap must be positive".into()));
    }
    let top = m.checked_add(n_cap).filter(|t| *t <= u32::MAX as u64).ok_or_else(|| ConvergenceError::BadParams("stage too large".into()))?;
    let members: Vec<QcFunction> = (m + 1..=top).map(|r| seq.member(r as u32)).collect();
    let mut values = Vec::with_capacity(grid.len());
    let mut exact = Some(Vec::with_capacity(grid.len()));
    for x in grid {
        let pt = std::slice::from_ref(x);
        let fl: Vec<f64> = members.iter().map(|f| f.eval(&[Coord::Exact(x.clone())])).collect();
        values.push(fl.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - fl.iter().cloned().fold(f64::INFINITY, f64::min));
        if let Some(ex) = exact.as_mut() {
            match members.iter().map(|f| f.eval_exact(pt)).collect::<Option<Vec<_>>>() {
                Some(vs) => {
                    let hi = vs.iter().max().expect("nonempty window");
                    let lo = vs.iter().min().expect("nonempty window");
                    ex.push(hi - lo);
                }
                None => exact = None,
            }
        }
    }
    if let Some(ex) = &exact {
        values = ex.iter().map(to_f64).collect();
    }
    Ok(WmGrid { grid: grid.to_vec(), m, n_cap, values, exact })
}

fn window_oscillation(ev: &GridEval, m: u64, n_cap: u64) -> Vec<f64> {
    let mut hi = vec![f64::NEG_INFINITY; ev.xs.len()];
    let mut lo = vec![f64::INFINITY; ev.xs.len()];
    for r in m + 1..=m + n_cap {
        for (j, v) in ev.member(r).into_iter().enumerate() {
            hi[j] = hi[j].max(v);
            lo[j] = lo[j].min(v);
        }
    }
    hi.iter().zip(&lo).map(|(a, b)| a - b).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpenInterval {
    #[serde(serialize_with = "serialize_rational")]
    pub lo: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub hi: Rational,
}

/// Grid runs where `marked` holds, each widened to the neighbouring grid
/// points.
fn runs_to_intervals(xs: &[Rational], marked: &[bool]) -> Vec<OpenInterval> {
    let mut out = Vec::new();
    let mut j = 0;
    while j < xs.len() {
        if !marked[j] {
            j += 1;
            continue;
        }
        let start = j;
        while j + 1 < xs.len() && marked[j + 1] {
            j += 1;
        }
        let lo = if start > 0 { xs[start - 1].clone() } else { &xs[0] - (&xs[1.min(xs.len() - 1)] - &xs[0]) };
        let hi = if j + 1 < xs.len() { xs[j + 1].clone() } else { &xs[j] + (&xs[j] - &xs[j.saturating_sub(1)]) };
        out.push(OpenInterval { lo, hi });
        j += 1;
    }
    out
}

fn union_length(ivs: &[OpenInterval]) -> Rational {
    let m = Multirectangle::from_intervals(ivs.iter().map(|i| Interval::open(i.lo.clone(), i.hi.clone())).collect());
    match m.measure() {
        Length::Finite(v) => v,
        Length::Infinite => unreachable!("finite intervals"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EgorovLevel {
    pub k: u32,
    #[serde(serialize_with = "serialize_rational")]
    pub eta: Rational,
    pub m: u64,
    #[serde(serialize_with = "serialize_rational")]
    pub length: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub budget: Rational,
    pub intervals: Vec<OpenInterval>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UniformRow {
    #[serde(serialize_with = "serialize_rational")]
    pub sigma: Rational,
    /// Least `M` with `|f_n − f| < σ` off `O` for `M < n ≤ M + n_cap`.
    pub stage: Option<u64>,
    /// The attained sup over that window.
    pub sup: f64,
}

/// The open set `O` of Egorov's theorem and the uniform convergence
/// table off it.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EgorovWitness {
    #[serde(serialize_with = "serialize_rational")]
    pub eps: Rational,
    /// `L(O)`, an upper bound: overlaps are counted twice.
    #[serde(serialize_with = "serialize_rational")]
    pub length: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub cover_length: Rational,
    pub levels: Vec<EgorovLevel>,
    pub table: Vec<UniformRow>,
    pub grid_points: usize,
    pub points_off_o: usize,
    #[serde(skip)]
    pub cover: Option<RationalCover>,
}

impl EgorovWitness {
    pub fn witness(&self) -> Witness {
        let ivs = self.levels.iter().flat_map(|l| &l.intervals).map(|i| Interval::open(i.lo.clone(), i.hi.clone())).collect();
        Witness { slabs: Multirectangle::from_intervals(ivs), covers: self.cover.iter().cloned().collect() }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.witness().contains(&[Coord::Exact(x.clone())])
    }
}

fn has_exceptions(seq: &QcSequence) -> bool {
    seq.member(1).expr.has_exceptions() || seq.member(2).expr.has_exceptions() || seq.limit().expr.has_exceptions()
}

/// Builds `O` with `L(O) < ε` for a sequence on a bounded interval.
///
/// `O` is a rational cover of volume `ε/4` when the sequence has
/// exceptional points, plus for each level `k` the open set
/// `A_k = {w_{m_k} > η_k/2}` read off the grid, with `m_k` the first power
/// of two keeping `L(A_k) < ε/2^{k+2}`. `O` depends on `ε` only, never on
/// the σ values of the table.
pub fn egorov_witness(seq: &QcSequence, eps: &Rational, sigmas: &[Rational], cfg: &ConvergenceConfig) -> Result<EgorovWitness, ConvergenceError> {
    if *eps <= Rational::zero() {
        return Err(ConvergenceError::BadParams("eps must be positive".into()));
    }
    if sigmas.iter().any(|s| *s <= Rational::zero()) {
        return Err(ConvergenceError::BadParams("sigma must be positive".into()));
    }
    let (lo, hi) = bounded_box(seq)?;
    let xs_all = grid_on(seq, &lo, &hi, cfg.grid);
    let cover = has_exceptions(seq).then(|| RationalCover { axis: 0, extent: vec![(lo.clone(), hi.clone())], budget: eps / int(2) });
    let xs: Vec<Rational> = xs_all.iter().filter(|x| !cover.as_ref().is_some_and(|c| c.contains_exact(std::slice::from_ref(*x)))).cloned().collect();
    let cover_length = cover.as_ref().map_or_else(Rational::zero, RationalCover::total);
    let ev = GridEval::new(seq, &xs);

    let mut levels = Vec::new();
    let mut inside = vec![false; xs.len()];
    for k in 1..=cfg.levels {
        let eta = pow2_inv(k);
        let budget = eps * pow2_inv(k + 2);
        let half_eta = to_f64(&eta) / 2.0;
        let mut m = 1u64;
        let found = loop {
            if xs.len() < 2 {
                break Some((m, Vec::new(), Rational::zero()));
            }
            let w = window_oscillation(&ev, m, cfg.n_cap);
            let marked: Vec<bool> = w.iter().map(|v| *v > half_eta).collect();
            let ivs = runs_to_intervals(&xs, &marked);
            let len = union_length(&ivs);
            if len < budget {
                break Some((m, ivs, len));
            }
            if m >= cfg.m_max {
                break None;
            }
            m = (2 * m).min(cfg.m_max);
        };
        let (m, intervals, length) = found.ok_or(ConvergenceError::BudgetExceeded { level: k, m_max: cfg.m_max })?;
        for (j, x) in xs.iter().enumerate() {
            if intervals.iter().any(|i| i.lo < *x && *x < i.hi) {
                inside[j] = true;
            }
        }
        levels.push(EgorovLevel { k, eta, m, length, budget, intervals });
    }
    let length = levels.iter().fold(cover_length.clone(), |acc, l| acc + &l.length);

    let off: Vec<usize> = (0..xs.len()).filter(|j| !inside[*j]).collect();
    let lim = ev.limit();
    let table = uniform_table(&ev, &lim, &off, sigmas, cfg);
    Ok(EgorovWitness { eps: eps.clone(), length, cover_length, levels, table, grid_points: xs_all.len(), points_off_o: off.len(), cover })
}

fn uniform_table(ev: &GridEval, lim: &[f64], off: &[usize], sigmas: &[Rational], cfg: &ConvergenceConfig) -> Vec<UniformRow> {
    let targets: Vec<f64> = sigmas.iter().map(to_f64).collect();
    let mut rows: Vec<Option<(u64, f64)>> = vec![None; sigmas.len()];
    // d[n-1] = max over the off-O grid of |f_n − f|
    let mut d: Vec<f64> = Vec::new();
    let n_cap = cfg.n_cap as usize;
    let mut n = 0u64;
    while rows.iter().any(Option::is_none) && n < cfg.m_max + cfg.n_cap {
        n += 1;
        let v = ev.member(n);
        d.push(off.iter().map(|&j| (v[j] - lim[j]).abs()).fold(0.0, f64::max));
        if d.len() > n_cap {
            let m = d.len() - n_cap - 1;
            let sup = d[m..].iter().cloned().fold(0.0, f64::max);
            for (row, s) in rows.iter_mut().zip(&targets) {
                if row.is_none() && sup < *s {
                    *row = Some((m as u64, sup));
                }
            }
        }
    }
    sigmas
        .iter()
        .zip(rows)
        .map(|(s, r)| match r {
            // M = 0 means the whole sequence is already within σ; report M = 1
            Some((m, sup)) => UniformRow { sigma: s.clone(), stage: Some(m.max(1)), sup },
            None => UniformRow { sigma: s.clone(), stage: None, sup: f64::NAN },
        })
        .collect()
}

/// A failed hypothesis, pinned to a member and a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Violation {
    pub hypothesis: String,
    pub n: u64,
    #[serde(serialize_with = "serialize_opt_point")]
    pub x: Option<Rational>,
    pub detail: String,
}

fn serialize_opt_point<S: serde::Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&format_rational(v)),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    Monotone,
    Dominated,
    Fatou,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IntegralSample {
    pub n: u64,
    pub value: f64,
    pub error_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvergenceReport {
    pub law: Law,
    pub sequence: String,
    /// `None` when the hypotheses hold on the checked grid.
    pub violation: Option<Violation>,
    pub integrals: Vec<IntegralSample>,
    /// Estimate of `lim ∫f_n` (the lim inf for Fatou).
    pub limit_of_integrals: f64,
    /// `∫ lim f_n`.
    pub integral_of_limit: f64,
    /// `limit_of_integrals − integral_of_limit`.
    pub gap: f64,
    pub tolerance: f64,
    /// The law's conclusion holds (an equality, or `≥` for Fatou).
    pub conclusion_holds: bool,
}

impl ConvergenceReport {
    pub fn hypotheses_hold(&self) -> bool {
        self.violation.is_none()
    }
}

/// `∫f` at final stage `n_final`; the general schedule for unbounded cases.
fn integral_of(f: &QcFunction, n_final: u32, cfg: &ConvergenceConfig) -> Result<IntegralResult, ConvergenceError> {
    if let Ok(bx) = f.bounded_domain() {
        if f.bound_on(&bx).is_some_and(f64::is_finite) {
            return Ok(integrate_stage(f, &bx, n_final, DEFAULT_RTOL)?);
        }
    }
    Ok(integrate_general(f, &TruncationSchedule::default(), cfg.stages, DEFAULT_RTOL)?)
}

/// Member `n` is integrated at stage `max(stages, 4n)` so that its slabs
/// stay narrower than its features.
fn member_stage(n: u64, cfg: &ConvergenceConfig) -> u32 {
    (4 * n).max(cfg.stages as u64).min(u32::MAX as u64) as u32
}

fn sample_ns(cfg: &ConvergenceConfig) -> Vec<u64> {
    let mut ns: Vec<u64> = (0..=cfg.log_max).flat_map(|j| [1u64 << j, (1u64 << j) + 1]).collect();
    ns.sort();
    ns.dedup();
    ns
}

fn member_integrals(seq: &QcSequence, cfg: &ConvergenceConfig) -> Result<Vec<IntegralSample>, ConvergenceError> {
    sample_ns(cfg)
        .into_iter()
        .map(|n| {
            let r = integral_of(&seq.member(n as u32), member_stage(n, cfg), cfg)?;
            let value = match r.verdict {
                Verdict::Number => r.value,
                Verdict::PlusInfinity => f64::INFINITY,
                Verdict::MinusInfinity => f64::NEG_INFINITY,
                Verdict::NotIntegrable => f64::NAN,
            };
            Ok(IntegralSample { n, value, error_bound: r.error_bound })
        })
        .collect()
}

/// Limit of the integrals along the dyadic subsequence `I_n, I_{2n}, I_{4n}`.
///
/// When the last three move monotonically the error is modelled as
/// `c₁/n + c₂/n²` and removed by Richardson extrapolation; the distance
/// between the first- and second-order extrapolants is the uncertainty.
fn dyadic_limit(samples: &[IntegralSample]) -> (f64, f64) {
    let dy: Vec<f64> = samples.iter().filter(|s| s.n.is_power_of_two()).map(|s| s.value).collect();
    let k = dy.len();
    if k < 3 {
        return (dy.last().cloned().unwrap_or(f64::NAN), 0.0);
    }
    let (a, b, c) = (dy[k - 3], dy[k - 2], dy[k - 1]);
    let (d1, d2) = (b - a, c - b);
    if !(a.is_finite() && b.is_finite() && c.is_finite()) || d1 == 0.0 && d2 == 0.0 {
        return (c, 0.0);
    }
    if d1.signum() == d2.signum() && d2.abs() < d1.abs() {
        let first = 2.0 * c - b;
        let second = (8.0 * c - 6.0 * b + a) / 3.0;
        return (second, (second - first).abs());
    }
    (c, d2.abs())
}

/// Grid check of `0 ≤ f_n ≤ f_{n+1}` for the first members.
fn monotone_violation(seq: &QcSequence, cfg: &ConvergenceConfig) -> Option<Violation> {
    let (lo, hi) = check_box(seq, cfg);
    let xs = grid_on(seq, &lo, &hi, cfg.grid);
    let ev = GridEval::new(seq, &xs);
    let mut prev = ev.member(1);
    if let Some(j) = prev.iter().position(|v| *v < 0.0) {
        return Some(Violation { hypothesis: "nonnegative".into(), n: 1, x: Some(xs[j].clone()), detail: format!("f_1 = {}", prev[j]) });
    }
    for n in 2..=cfg.check_members as u64 {
        let cur = ev.member(n);
        if let Some(j) = (0..xs.len()).find(|&j| cur[j] < prev[j]) {
            return Some(Violation {
                hypothesis: "increasing".into(),
                n,
                x: Some(xs[j].clone()),
                detail: format!("f_{n} = {} < f_{} = {}", cur[j], n - 1, prev[j]),
            });
        }
        prev = cur;
    }
    None
}

fn nonnegative_violation(seq: &QcSequence, cfg: &ConvergenceConfig) -> Option<Violation> {
    let (lo, hi) = check_box(seq, cfg);
    let xs = grid_on(seq, &lo, &hi, cfg.grid);
    let ev = GridEval::new(seq, &xs);
    for n in 1..=cfg.check_members as u64 {
        let v = ev.member(n);
        if let Some(j) = v.iter().position(|v| *v < 0.0) {
            return Some(Violation { hypothesis: "nonnegative".into(), n, x: Some(xs[j].clone()), detail: format!("f_{n} = {}", v[j]) });
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn finish(
    law: Law,
    seq: &QcSequence,
    violation: Option<Violation>,
    integrals: Vec<IntegralSample>,
    limit_of_integrals: f64,
    extra: f64,
    lim: &IntegralResult,
    cfg: &ConvergenceConfig,
) -> ConvergenceReport {
    let integral_of_limit = match lim.verdict {
        Verdict::Number => lim.value,
        Verdict::PlusInfinity => f64::INFINITY,
        Verdict::MinusInfinity => f64::NEG_INFINITY,
        Verdict::NotIntegrable => f64::NAN,
    };
    let gap = limit_of_integrals - integral_of_limit;
    let tolerance = cfg.tol + extra + lim.error_bound + integrals.last().map_or(0.0, |s| s.error_bound);
    let conclusion_holds = match law {
        Law::Fatou => gap >= -tolerance,
        _ => gap.abs() <= tolerance,
    };
    ConvergenceReport { law, sequence: seq.name(), violation, integrals, limit_of_integrals, integral_of_limit, gap, tolerance, conclusion_holds }
}

/// Beppo Levi: for `0 ≤ f_n ↑ f`, `lim ∫f_n = ∫f`.
pub fn check_monotone(seq: &QcSequence, cfg: &ConvergenceConfig) -> Result<ConvergenceReport, ConvergenceError> {
    let violation = monotone_violation(seq, cfg);
    let integrals = member_integrals(seq, cfg)?;
    let (lim_int, extra) = dyadic_limit(&integrals);
    let lim = integral_of(&seq.limit(), cfg.stages, cfg)?;
    Ok(finish(Law::Monotone, seq, violation, integrals, lim_int, extra, &lim, cfg))
}

/// Lebesgue's dominated convergence theorem.
///
/// With `dominator = None` the constant `sup_n sup |f_n|` is tried; it is
/// rejected when the member bounds keep growing or the domain has infinite
/// measure.
pub fn check_dominated(seq: &QcSequence, dominator: Option<&QcFunction>, cfg: &ConvergenceConfig) -> Result<ConvergenceReport, ConvergenceError> {
    let (lo, hi) = check_box(seq, cfg);
    let cell = [(lo.clone(), hi.clone())];
    let violation = match dominator {
        Some(g) => dominator_violation(seq, g, cfg)?,
        None => constant_dominator_violation(seq, &cell, cfg),
    };
    let integrals = member_integrals(seq, cfg)?;
    let (lim_int, extra) = dyadic_limit(&integrals);
    let lim = integral_of(&seq.limit(), cfg.stages, cfg)?;
    Ok(finish(Law::Dominated, seq, violation, integrals, lim_int, extra, &lim, cfg))
}

fn constant_dominator_violation(seq: &QcSequence, cell: &[(Rational, Rational)], cfg: &ConvergenceConfig) -> Option<Violation> {
    let ns = sample_ns(cfg);
    let bounds: Vec<(u64, f64)> = ns.iter().map(|&n| (n, seq.member(n as u32).bound_on(cell).unwrap_or(f64::INFINITY))).collect();
    if let Some((n, b)) = bounds.iter().find(|(_, b)| !b.is_finite()) {
        return Some(Violation { hypothesis: "dominated".into(), n: *n, x: None, detail: format!("sup |f_{n}| = {b}") });
    }
    let (n1, b1) = bounds[bounds.len() / 2];
    let (n2, b2) = bounds[bounds.len() - 1];
    if b2 > 1.5 * b1 + cfg.tol {
        return Some(Violation {
            hypothesis: "dominated".into(),
            n: n2,
            x: None,
            detail: format!("no constant dominates: sup |f_{n1}| = {b1}, sup |f_{n2}| = {b2}"),
        });
    }
    if seq.domain().sides()[0].hi().finite().is_none() {
        let m = bounds.iter().map(|b| b.1).fold(0.0, f64::max);
        if m > 0.0 {
            return Some(Violation {
                hypothesis: "dominated".into(),
                n: n2,
                x: None,
                detail: format!("the constant {m} is not summable on an unbounded domain"),
            });
        }
    }
    None
}

fn dominator_violation(seq: &QcSequence, g: &QcFunction, cfg: &ConvergenceConfig) -> Result<Option<Violation>, ConvergenceError> {
    let s = crate::lebesgue::is_summable(g, &TruncationSchedule::default(), cfg.stages)?;
    if !s.summable {
        return Ok(Some(Violation { hypothesis: "dominated".into(), n: 0, x: None, detail: format!("the dominator {} is not summable", g.expr) }));
    }
    let (lo, hi) = check_box(seq, cfg);
    let xs = grid_on(seq, &lo, &hi, cfg.grid);
    let gv: Vec<f64> = xs.iter().map(|x| g.eval(&[Coord::Exact(x.clone())])).collect();
    let ev = GridEval::new(seq, &xs);
    for n in 1..=cfg.check_members as u64 {
        let v = ev.member(n);
        if let Some(j) = (0..xs.len()).find(|&j| v[j].abs() > gv[j] + 1e-12) {
            return Ok(Some(Violation {
                hypothesis: "dominated".into(),
                n,
                x: Some(xs[j].clone()),
                detail: format!("|f_{n}| = {} > g = {}", v[j].abs(), gv[j]),
            }));
        }
    }
    Ok(None)
}

/// Fatou: `∫ lim inf f_n ≤ lim inf ∫f_n` for nonnegative members. The gap
/// is `lim inf ∫f_n − ∫ lim inf f_n`.
pub fn fatou_gap(seq: &QcSequence, cfg: &ConvergenceConfig) -> Result<ConvergenceReport, ConvergenceError> {
    let violation = nonnegative_violation(seq, cfg);
    let integrals = member_integrals(seq, cfg)?;
    let tail = &integrals[integrals.len() / 2..];
    let monotone = tail.windows(2).all(|w| w[1].value <= w[0].value) || tail.windows(2).all(|w| w[1].value >= w[0].value);
    let (liminf, extra) = if monotone { dyadic_limit(&integrals) } else { (tail.iter().map(|s| s.value).fold(f64::INFINITY, f64::min), 0.0) };
    let lim = integral_of(&seq.limit(), cfg.stages, cfg)?;
    Ok(finish(Law::Fatou, seq, violation, integrals, liminf, extra, &lim, cfg))
}

/// `∫_A f_n` convergence for a family, with every law checked.
pub fn convergence_suite(seq: &QcSequence, cfg: &ConvergenceConfig) -> Result<Vec<ConvergenceReport>, ConvergenceError> {
    Ok(vec![check_monotone(seq, cfg)?, check_dominated(seq, None, cfg)?, fatou_gap(seq, cfg)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn seq(s: &str) -> QcSequence {
        QcSequence::parse(s).unwrap()
    }

    #[test]
    fn wm_power_example() {
        let w = wm_grid(&seq("power"), 2, 8, &[rat(3, 4)]).unwrap();
        let x = rat(3, 4);
        let want = x.pow(3) - x.pow(10);
        assert_eq!(w.exact.unwrap()[0], want);
    }

    #[test]
    fn egorov_power_table() {
        let cfg = ConvergenceConfig::default();
        let sigmas = [rat(1, 2), rat(1, 4), rat(1, 8), rat(1, 16)];
        let e = egorov_witness(&seq("power"), &rat(1, 8), &sigmas, &cfg).unwrap();
        assert!(e.length < rat(1, 8));
        let stages: Vec<u64> = e.table.iter().map(|r| r.stage.unwrap()).collect();
        assert!(stages.windows(2).all(|w| w[0] <= w[1]), "{stages:?}");
        let finer = egorov_witness(&seq("power"), &rat(1, 8), &sigmas[..2], &cfg).unwrap();
        assert_eq!(finer.levels, e.levels);
    }

    #[test]
    fn egorov_rejects_unbounded() {
        let cfg = ConvergenceConfig::default();
        assert_eq!(egorov_witness(&seq("trapezoid"), &rat(1, 8), &[rat(1, 2)], &cfg), Err(ConvergenceError::UnboundedDomain));
    }

    #[test]
    fn egorov_qn_uses_cover() {
        let cfg = ConvergenceConfig { levels: 3, ..Default::default() };
        let e = egorov_witness(&seq("qn-indicator"), &rat(1, 8), &[rat(1, 2)], &cfg).unwrap();
        assert!(e.cover.is_some());
        assert!(e.length < rat(1, 8));
    }

    #[test]
    fn spike_breaks_domination() {
        let cfg = ConvergenceConfig::default();
        let r = check_dominated(&seq("spike"), None, &cfg).unwrap();
        assert!(r.violation.is_some());
        let f = fatou_gap(&seq("spike"), &cfg).unwrap();
        assert!((f.gap - 1.0).abs() < 1e-9, "{}", f.gap);
        assert!(f.conclusion_holds);
    }

    #[test]
    fn power_dominated() {
        let cfg = ConvergenceConfig::default();
        let r = check_dominated(&seq("power"), None, &cfg).unwrap();
        assert!(r.violation.is_none());
        assert!(r.gap.abs() <= 1e-6, "{}", r.gap);
        assert!(r.conclusion_holds);
    }

    #[test]
    fn tail_indicator_not_increasing() {
        let cfg = ConvergenceConfig::default();
        let r = check_monotone(&seq("tail-indicator"), &cfg).unwrap();
        assert_eq!(r.violation.as_ref().map(|v| v.hypothesis.as_str()), Some("increasing"));
    }

    #[test]
    fn alternating_fatou_half() {
        let cfg = ConvergenceConfig::default();
        let f = fatou_gap(&seq("alternating"), &cfg).unwrap();
        assert!((f.gap - 0.5).abs() < 1e-9, "{}", f.gap);
    }
}
