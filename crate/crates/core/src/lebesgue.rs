//! The Lebesgue integral built from associated continuous functions.
//!
//! For a bounded quasicontinuous `f` on a bounded box the stage-`n`
//! approximant is a continuous function that agrees with `f` off an open
//! set of measure below `1/n`: the generic part of `f`, interpolated
//! linearly across the slabs around its jumps. Two approximants differ only
//! on their slabs, which gives the certified bound `2·M·L(slabs)`. The
//! general case takes monotone limits of truncations over a schedule of
//! boxes `[−R, R]^d` and levels `N`.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::qc::{restrict_to_set, witness, Atom, Coord, Expr, QcError, QcFunction};
use crate::rational::{pow2, pow2_inv, serialize_opt_rational, serialize_rational, to_f64, Endpoint, Length, Rational};
use crate::riemann::{riemann_integrate, RiemannError};
use crate::set::{complement_in_box, disjointify_1d, outer_measure_bound, Interval, Multirectangle, Rectangle, SetError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LebesgueError {
    #[error("no finite bound for the function on the region")]
    MissingBound,
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Qc(#[from] QcError),
    #[error(transparent)]
    Riemann(#[from] RiemannError),
    #[error(transparent)]
    Set(#[from] SetError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Number,
    PlusInfinity,
    MinusInfinity,
    NotIntegrable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StageTrace {
    pub n: u32,
    /// `L(Δ_n)` of the witness of order `1/n`.
    #[serde(serialize_with = "serialize_rational")]
    pub witness_length: Rational,
    /// Integral of the stage approximant.
    pub value: f64,
    pub riemann_gap: f64,
    /// Certified distance from `value` to the integral.
    pub error_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScheduleRow {
    #[serde(serialize_with = "serialize_rational")]
    pub radius: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub level: Rational,
    pub plus: f64,
    pub minus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IntegralResult {
    pub value: f64,
    #[serde(serialize_with = "serialize_opt_rational")]
    pub exact: Option<Rational>,
    pub error_bound: f64,
    pub trace: Vec<StageTrace>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<ScheduleRow>,
    pub verdict: Verdict,
}

impl IntegralResult {
    pub fn zero() -> IntegralResult {
        IntegralResult {
            value: 0.0,
            exact: Some(Rational::zero()),
            error_bound: 0.0,
            trace: Vec::new(),
            schedule: Vec::new(),
            verdict: Verdict::Number,
        }
    }

    pub fn exact(v: Rational) -> IntegralResult {
        IntegralResult { value: to_f64(&v), exact: Some(v), ..IntegralResult::zero() }
    }
}

/// Pairs `(R_j, N_j)` of box radius and truncation level.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationSchedule {
    pub pairs: Vec<(Rational, Rational)>,
}

impl TruncationSchedule {
    /// `R_j = N_j = 2^j` for `j = 0..=j_max`.
    pub fn diagonal(j_max: u32) -> TruncationSchedule {
        TruncationSchedule { pairs: (0..=j_max).map(|j| (pow2(j), pow2(j))).collect() }
    }
}

impl Default for TruncationSchedule {
    fn default() -> Self {
        TruncationSchedule::diagonal(10)
    }
}

pub const DEFAULT_STAGES: u32 = 64;
pub const DEFAULT_RTOL: f64 = 1e-8;

/// Exact-or-float accumulator.
#[derive(Clone, Debug)]
struct Acc {
    value: f64,
    exact: Option<Rational>,
}

impl Acc {
    fn new(value: f64, exact: Option<Rational>) -> Acc {
        Acc { value, exact }
    }

    fn add(&mut self, other: &Acc, sign: i64) {
        let s = sign as f64;
        self.value += s * other.value;
        self.exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Some(a + b * Rational::from_integer(sign.into())),
            _ => None,
        };
        if let Some(e) = &self.exact {
            self.value = to_f64(e);
        }
    }
}

fn value_at(g: &Expr, x: &Rational) -> Acc {
    match g.eval_exact(std::slice::from_ref(x)) {
        Some(v) => Acc::new(to_f64(&v), Some(v)),
        None => Acc::new(g.eval(&[Coord::Exact(x.clone())]), None),
    }
}

fn riemann_acc(g: &Expr, cell: &[(Rational, Rational)], tol: f64) -> Result<(Acc, f64), LebesgueError> {
    let r = riemann_integrate(g, cell, tol)?;
    Ok((Acc::new(r.value, r.exact), r.gap))
}

/// Merged slabs of a 1D witness, clipped to `[lo, hi]`, as `(a, b, ca, cb)`:
/// the raw gap and its clipped part.
fn gaps_1d(slabs: &Multirectangle, lo: &Rational, hi: &Rational) -> Vec<(Rational, Rational, Rational, Rational)> {
    let mut out = Vec::new();
    for iv in disjointify_1d(slabs).intervals() {
        let (Endpoint::Finite(a), Endpoint::Finite(b)) = (iv.lo(), iv.hi()) else { continue };
        if b <= lo || a >= hi {
            continue;
        }
        let ca = crate::rational::max(a, lo);
        let cb = crate::rational::min(b, hi);
        out.push((a.clone(), b.clone(), ca, cb));
    }
    out
}

struct Prepared {
    cell: Vec<(Rational, Rational)>,
    bound: f64,
    g: Expr,
    base: Acc,
    base_gap: f64,
}

fn prepare(f: &QcFunction, region: &[(Rational, Rational)], rtol: f64) -> Result<Option<Prepared>, LebesgueError> {
    if !rtol.is_finite() || rtol <= 0.0 {
        return Err(LebesgueError::BadParams("need rtol > 0".into()));
    }
    if region.len() != f.dim() {
        return Err(LebesgueError::BadParams(format!("region has dimension {}, function {}", region.len(), f.dim())));
    }
    let cell = match f.region_within(region) {
        Ok(c) => c,
        Err(QcError::DomainMismatch(_)) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    if cell.iter().any(|(a, b)| a >= b) {
        return Ok(None);
    }
    let bound = f.bound_on(&cell).filter(|m| m.is_finite()).ok_or(LebesgueError::MissingBound)?;
    let g = f.expr.generic();
    let (base, base_gap) = riemann_acc(&g, &cell, rtol / 2.0)?;
    Ok(Some(Prepared { cell, bound, g, base, base_gap }))
}

/// Stage `n`: the value, Riemann gap and certified error bound of the
/// approximant of order `1/n`, plus its trace row.
fn stage(f: &QcFunction, p: &Prepared, n: u32, rtol: f64) -> Result<(Acc, f64, StageTrace), LebesgueError> {
    let cell = &p.cell;
    let g = &p.g;
    let eps = Rational::new(One::one(), n.into());
    let w = f.witness_on(cell, &eps)?;
    let (value, gap, slab_len) = if cell.len() == 1 {
        let (lo, hi) = &cell[0];
        let gw = witness::build(g, cell, &eps)?;
        let gaps = gaps_1d(&gw.slabs, lo, hi);
        let mut acc = p.base.clone();
        let mut gap = p.base_gap;
        let mut slab_len = Rational::zero();
        if gaps.iter().any(|(a, b, _, _)| a < lo && b > hi) {
            acc = Acc::new(0.0, Some(Rational::zero()));
            gap = 0.0;
            slab_len = hi - lo;
        } else {
            let share = rtol / (2.0 * gaps.len().max(1) as f64);
            for (a, b, ca, cb) in &gaps {
                let (inner, inner_gap) = riemann_acc(g, &[(ca.clone(), cb.clone())], share)?;
                acc.add(&inner, -1);
                gap += inner_gap;
                let width = cb - ca;
                let mut lin = if a < lo {
                    value_at(g, b)
                } else if b > hi {
                    value_at(g, a)
                } else {
                    let (mut va, vb) = (value_at(g, a), value_at(g, b));
                    va.add(&vb, 1);
                    va
                };
                let scale = if a < lo || b > hi { width.clone() } else { &width / Rational::from_integer(2.into()) };
                lin.value *= to_f64(&scale);
                lin.exact = lin.exact.map(|v| v * &scale);
                acc.add(&lin, 1);
                slab_len += width;
            }
        }
        (acc, gap, slab_len)
    } else {
        (p.base.clone(), p.base_gap, Rational::zero())
    };
    let err = gap + 2.0 * p.bound * to_f64(&slab_len);
    let row = StageTrace { n, witness_length: w.length(), value: value.value, riemann_gap: gap, error_bound: err };
    Ok((value, err, row))
}

/// The result after the last stage. The approximant agrees with the generic
/// part off the slabs, so once that part integrates in closed form the
/// integral is known exactly.
fn finish(p: &Prepared, value: Acc, error_bound: f64, trace: Vec<StageTrace>) -> IntegralResult {
    let (value, exact, error_bound) = match (&p.base.exact, value.exact) {
        (Some(e), _) if p.base_gap == 0.0 => (to_f64(e), Some(e.clone()), 0.0),
        (_, Some(e)) if error_bound == 0.0 => (value.value, Some(e), 0.0),
        _ => (value.value, None, error_bound),
    };
    IntegralResult { value, exact, error_bound, trace, schedule: Vec::new(), verdict: Verdict::Number }
}

/// The bounded case on the closed box `region`.
pub fn integrate_bounded(f: &QcFunction, region: &[(Rational, Rational)], stages: u32, rtol: f64) -> Result<IntegralResult, LebesgueError> {
    if stages == 0 {
        return Err(LebesgueError::BadParams("need stages ≥ 1".into()));
    }
    let Some(p) = prepare(f, region, rtol)? else { return Ok(IntegralResult::zero()) };
    let mut trace = Vec::with_capacity(stages as usize);
    let mut last = None;
    for n in 1..=stages {
        let (value, err, row) = stage(f, &p, n, rtol)?;
        trace.push(row);
        last = Some((value, err));
    }
    let (value, error_bound) = last.expect("stages ≥ 1");
    Ok(finish(&p, value, error_bound, trace))
}

/// Only the final stage `n` of [`integrate_bounded`], for functions whose
/// features are finer than the early stages resolve.
pub fn integrate_stage(f: &QcFunction, region: &[(Rational, Rational)], n: u32, rtol: f64) -> Result<IntegralResult, LebesgueError> {
    if n == 0 {
        return Err(LebesgueError::BadParams("need n ≥ 1".into()));
    }
    let Some(p) = prepare(f, region, rtol)? else { return Ok(IntegralResult::zero()) };
    let (value, error_bound, row) = stage(f, &p, n, rtol)?;
    Ok(finish(&p, value, error_bound, vec![row]))
}

fn positive_part(f: &QcFunction, level: &Rational) -> QcFunction {
    let e =
        Expr::Min(Box::new(Expr::Max(Box::new(f.expr.clone()), Box::new(Expr::constant(Rational::zero())))), Box::new(Expr::constant(level.clone())));
    QcFunction { expr: e, domain: f.domain.clone() }
}

fn negative_part(f: &QcFunction, level: &Rational) -> QcFunction {
    let e = Expr::Max(Box::new(Expr::Min(Box::new(f.expr.clone()), Box::new(Expr::constant(Rational::zero())))), Box::new(Expr::constant(-level)));
    QcFunction { expr: e, domain: f.domain.clone() }
}

/// Whether a monotone sequence of truncated integrals looks divergent: the
/// last increment is significant and has not shrunk by 10%.
pub(crate) fn diverges(values: &[f64], tol: f64) -> bool {
    let n = values.len();
    if n < 3 {
        return false;
    }
    let last = (values[n - 1] - values[n - 2]).abs();
    let prev = (values[n - 2] - values[n - 3]).abs();
    last > tol && last >= 0.9 * prev
}

/// Geometric estimate of the remaining increase of a convergent monotone
/// sequence.
pub(crate) fn tail_estimate(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 3 {
        return 0.0;
    }
    let last = (values[n - 1] - values[n - 2]).abs();
    let prev = (values[n - 2] - values[n - 3]).abs();
    if last == 0.0 || prev == 0.0 {
        return 0.0;
    }
    let r = (last / prev).min(0.9);
    last * r / (1.0 - r)
}

/// The general case: `∫f = lim ∫f_{+,(R,N)} + lim ∫f_{−,(R,N)}` along the
/// schedule.
///
/// Both truncated integrals are monotone in `R` and in `N`, so the limit
/// along the diagonal equals the double limit.
pub fn integrate_general(f: &QcFunction, schedule: &TruncationSchedule, stages: u32, rtol: f64) -> Result<IntegralResult, LebesgueError> {
    if schedule.pairs.is_empty() {
        return Err(LebesgueError::BadParams("empty truncation schedule".into()));
    }
    let d = f.dim();
    let mut rows = Vec::new();
    let (mut plus_vals, mut minus_vals) = (Vec::new(), Vec::new());
    let mut last: Option<(IntegralResult, IntegralResult)> = None;
    let mut settled = false;
    for (radius, level) in &schedule.pairs {
        let bx: Vec<(Rational, Rational)> = (0..d).map(|_| (-radius, radius.clone())).collect();
        let plus = integrate_bounded(&positive_part(f, level), &bx, stages, rtol)?;
        let minus = integrate_bounded(&negative_part(f, level), &bx, stages, rtol)?;
        rows.push(ScheduleRow { radius: radius.clone(), level: level.clone(), plus: plus.value, minus: minus.value });
        plus_vals.push(plus.value);
        minus_vals.push(minus.value);
        if let Some((p, m)) = &last {
            let same = |a: &IntegralResult, b: &IntegralResult| a.exact.is_some() && a.exact == b.exact;
            if same(p, &plus) && same(m, &minus) && rows.len() >= 3 {
                settled = true;
                last = Some((plus, minus));
                break;
            }
        }
        last = Some((plus, minus));
    }
    let (plus, minus) = last.expect("nonempty schedule");
    let rel = |v: &[f64]| 1e-6 * v.last().map_or(1.0, |x| x.abs().max(1.0));
    let plus_inf = !settled && diverges(&plus_vals, rel(&plus_vals));
    let minus_inf = !settled && diverges(&minus_vals, rel(&minus_vals));
    let verdict = match (plus_inf, minus_inf) {
        (false, false) => Verdict::Number,
        (true, false) => Verdict::PlusInfinity,
        (false, true) => Verdict::MinusInfinity,
        (true, true) => Verdict::NotIntegrable,
    };
    let trace = plus
        .trace
        .iter()
        .zip(&minus.trace)
        .map(|(p, m)| StageTrace {
            n: p.n,
            witness_length: p.witness_length.clone().max(m.witness_length.clone()),
            value: p.value + m.value,
            riemann_gap: p.riemann_gap + m.riemann_gap,
            error_bound: p.error_bound + m.error_bound,
        })
        .collect();
    let mut out = IntegralResult { value: 0.0, exact: None, error_bound: 0.0, trace, schedule: rows, verdict };
    match verdict {
        Verdict::Number => {
            out.value = plus.value + minus.value;
            out.exact = match (&plus.exact, &minus.exact, settled) {
                (Some(a), Some(b), true) => Some(a + b),
                _ => None,
            };
            if let Some(e) = &out.exact {
                out.value = to_f64(e);
            }
            let tails = if settled { 0.0 } else { tail_estimate(&plus_vals) + tail_estimate(&minus_vals) };
            out.error_bound = plus.error_bound + minus.error_bound + tails;
        }
        Verdict::PlusInfinity => out.value = f64::INFINITY,
        Verdict::MinusInfinity => out.value = f64::NEG_INFINITY,
        Verdict::NotIntegrable => out.value = f64::NAN,
    }
    Ok(out)
}

/// `∫_A f` for a characteristic descriptor `A`.
pub fn integrate_over_set(
    f: &QcFunction,
    a: &QcFunction,
    schedule: &TruncationSchedule,
    stages: u32,
    rtol: f64,
) -> Result<IntegralResult, LebesgueError> {
    integrate_general(&restrict_to_set(f, a)?, schedule, stages, rtol)
}

/// A set handed to `measure`.
#[derive(Clone, Debug)]
pub enum SetDescriptor {
    Rects(Multirectangle),
    Characteristic(QcFunction),
}

/// `λ(A)`: exact point-set measure for multirectangles, `∫1_A` otherwise.
pub fn measure(a: &SetDescriptor, schedule: &TruncationSchedule, stages: u32) -> Result<IntegralResult, LebesgueError> {
    match a {
        SetDescriptor::Rects(m) => Ok(match m.measure() {
            Length::Finite(v) => IntegralResult::exact(v),
            Length::Infinite => IntegralResult { value: f64::INFINITY, exact: None, verdict: Verdict::PlusInfinity, ..IntegralResult::zero() },
        }),
        SetDescriptor::Characteristic(c) => {
            if !c.is_characteristic() {
                return Err(QcError::NotCharacteristic.into());
            }
            integrate_general(c, schedule, stages, DEFAULT_RTOL)
        }
    }
}

pub fn indicator_of(m: &Multirectangle) -> QcFunction {
    let expr = Expr::atom(Atom::Indicator(m.clone()));
    QcFunction { domain: Rectangle::whole_space(m.dim()), expr }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Summability {
    pub summable: bool,
    /// `∫|f|` when summable.
    pub bound: Option<f64>,
    pub result: IntegralResult,
}

/// Checks whether the truncated integrals of `|f|` stay bounded.
pub fn is_summable(f: &QcFunction, schedule: &TruncationSchedule, stages: u32) -> Result<Summability, LebesgueError> {
    let abs = QcFunction { expr: Expr::Max(Box::new(f.expr.clone()), Box::new(Expr::Neg(Box::new(f.expr.clone())))), domain: f.domain.clone() };
    let result = integrate_general(&abs, schedule, stages, DEFAULT_RTOL)?;
    let summable = result.verdict == Verdict::Number;
    Ok(Summability { summable, bound: summable.then_some(result.value + result.error_bound), result })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeRow {
    #[serde(serialize_with = "serialize_rational")]
    pub measure: Rational,
    pub integral: f64,
    pub error_bound: f64,
    /// `|∫_O f| ≤ M·λ(O)` up to the error bound, when `f` is bounded.
    pub within_bound: Option<bool>,
}

fn dyadic_approx(x: f64, bits: u32) -> Rational {
    let scale = (1u64 << bits) as f64;
    Rational::new(((x * scale).round() as i64).into(), (1i64 << bits).into())
}

/// Integrals of `f` over random open multirectangles of shrinking measure
/// inside `region`.
pub fn abs_continuity_probe(
    f: &QcFunction,
    region: &[(Rational, Rational)],
    trials: u32,
    seed: u64,
    stages: u32,
) -> Result<Vec<ProbeRow>, LebesgueError> {
    if region.iter().any(|(a, b)| a >= b) || region.len() != f.dim() {
        return Err(LebesgueError::BadParams("region must be a nondegenerate box of the function's dimension".into()));
    }
    let d = region.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vol: Rational = region.iter().fold(Rational::one(), |acc, (a, b)| acc * (b - a));
    let bound = f.bound_on(region).filter(|m| m.is_finite());
    let schedule = TruncationSchedule::default();
    let mut rows = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let target = to_f64(&(&vol * pow2_inv(t + 1)));
        let k = rng.gen_range(1..=3u32);
        let side = (target / k as f64).powf(1.0 / d as f64);
        let mut o = Multirectangle::empty(d);
        for _ in 0..k {
            let sides = region
                .iter()
                .map(|(a, b)| {
                    let w = to_f64(&(b - a));
                    let s = dyadic_approx(side.min(w), 30);
                    let room = (b - a - &s).max(Rational::zero());
                    let u = Rational::new(rng.gen_range(0..=(1i64 << 20)).into(), (1i64 << 20).into());
                    let lo = a + room * u;
                    Interval::open(lo.clone(), lo + s)
                })
                .collect();
            o.push(Rectangle::new(sides))?;
        }
        let lambda = o.measure().finite().cloned().unwrap_or_default();
        let restricted = restrict_to_set(f, &indicator_of(&o))?;
        let res = match bound {
            Some(_) => integrate_bounded(&restricted, region, stages, DEFAULT_RTOL)?,
            None => integrate_general(&restricted, &schedule, stages, DEFAULT_RTOL)?,
        };
        let within = bound.map(|m| res.value.abs() <= m * to_f64(&lambda) + res.error_bound + 1e-12);
        rows.push(ProbeRow { measure: lambda, integral: res.value, error_bound: res.error_bound, within_bound: within });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureBrackets {
    #[serde(serialize_with = "serialize_pair")]
    pub exterior: (Rational, Rational),
    #[serde(serialize_with = "serialize_pair")]
    pub interior: (Rational, Rational),
}

fn serialize_pair<S: serde::Serializer>(p: &(Rational, Rational), s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(2))?;
    seq.serialize_element(&crate::rational::format_rational(&p.0))?;
    seq.serialize_element(&crate::rational::format_rational(&p.1))?;
    seq.end()
}

/// Brackets of width `ε` for `m_e(E)` (from an open cover) and for
/// `m_i(E) = λ(R) − m_e(R ∖ E)`.
pub fn exterior_interior_measure(e: &Multirectangle, bx: &Rectangle, eps: &Rational) -> Result<MeasureBrackets, LebesgueError> {
    if eps <= &Rational::zero() {
        return Err(LebesgueError::BadParams("epsilon must be positive".into()));
    }
    if !e.is_empty() && (e.dim() != bx.dim() || e.rects().iter().any(|r| !r.is_subset_of(bx))) {
        return Err(LebesgueError::BadParams("E must lie inside the box".into()));
    }
    let finite = |l: Length| l.finite().cloned().ok_or(LebesgueError::Set(SetError::UnboundedSet));
    let cover = outer_measure_bound(e, eps)?;
    let me = finite(cover.measure())?;
    let lo = (&me - eps).max(Rational::zero());
    let lam = finite(bx.volume())?;
    let e = if e.is_empty() { Multirectangle::empty(bx.dim()) } else { e.clone() };
    let rest = outer_measure_bound(&complement_in_box(&e, bx)?, eps)?;
    let mr = finite(rest.measure())?;
    let mi_lo = (&lam - &mr).max(Rational::zero());
    let mi_hi = (&lam - &mr + eps).min(lam.clone());
    Ok(MeasureBrackets { exterior: (lo, me), interior: (mi_lo, mi_hi.max(Rational::zero())) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn unit() -> Vec<(Rational, Rational)> {
        vec![(int(0), int(1))]
    }

    fn f(s: &str) -> QcFunction {
        QcFunction::parse(s).unwrap()
    }

    #[test]
    fn dirichlet_is_zero_at_every_stage() {
        let r = integrate_bounded(&f("dirichlet"), &unit(), 64, 1e-8).unwrap();
        assert_eq!(r.exact, Some(int(0)));
        assert_eq!(r.error_bound, 0.0);
        assert!(r.trace.iter().all(|s| s.value == 0.0 && s.riemann_gap == 0.0));
        assert!(r.trace.iter().all(|s| s.witness_length < Rational::new(1.into(), s.n.into())));
    }

    #[test]
    fn bounded_examples() {
        assert_eq!(integrate_bounded(&f("const:3"), &[(int(1), int(4))], 8, 1e-8).unwrap().exact, Some(int(9)));
        let step = integrate_bounded(&f("step:0,1/2,1,2,5"), &unit(), 64, 1e-8).unwrap();
        assert_eq!(step.exact, Some(rat(7, 2)));
        assert!(step.error_bound <= 2.0 * 5.0 / 64.0);
        let sq = integrate_bounded(&f("poly:0,0,1"), &unit(), 4, 1e-8).unwrap();
        assert_eq!(sq.exact, Some(rat(1, 3)));
        let with_qn = integrate_bounded(&f("sum(poly:0,0,1,qn-indicator:5)"), &unit(), 4, 1e-8).unwrap();
        assert_eq!(with_qn.trace.iter().map(|s| s.value).collect::<Vec<_>>(), sq.trace.iter().map(|s| s.value).collect::<Vec<_>>());
        assert_eq!(integrate_bounded(&f("inv-sqrt"), &unit(), 4, 1e-8), Err(LebesgueError::MissingBound));
    }

    #[test]
    fn interpolation_across_jumps() {
        let g = f("sum(step:0,1/2,1,2,5,poly:0,0,1)");
        let r = integrate_bounded(&g, &unit(), 16, 1e-10).unwrap();
        assert!((r.value - (3.5 + 1.0 / 3.0)).abs() <= r.error_bound + 1e-12, "{r:?}");
    }

    #[test]
    fn general_examples() {
        let s = TruncationSchedule::diagonal(8);
        let spike = integrate_general(&f("spike:4"), &s, 4, 1e-8).unwrap();
        assert_eq!(spike.verdict, Verdict::Number);
        assert_eq!(spike.exact, Some(int(1)));
        let wide = integrate_general(&f("wide-spike:3"), &s, 4, 1e-8).unwrap();
        assert_eq!(wide.exact, Some(int(1)));
        let x = integrate_general(&f("poly:0,1"), &s, 2, 1e-8).unwrap();
        assert_eq!(x.verdict, Verdict::NotIntegrable);
        let pos = integrate_general(&f("max(poly:0,1,const:0)"), &s, 2, 1e-8).unwrap();
        assert_eq!(pos.verdict, Verdict::PlusInfinity);
        let inv = integrate_general(&f("inv-sqrt"), &TruncationSchedule::diagonal(14), 2, 1e-9).unwrap();
        assert_eq!(inv.verdict, Verdict::Number);
        assert!((inv.value - 2.0).abs() <= inv.error_bound + 1e-6, "{inv:?}");
        let half_line = f("inv-sqrt").with_domain(Rectangle::whole_space(1)).unwrap();
        assert_eq!(integrate_general(&half_line, &TruncationSchedule::diagonal(12), 2, 1e-9).unwrap().verdict, Verdict::PlusInfinity);
    }

    #[test]
    fn sets_and_measures() {
        let s = TruncationSchedule::diagonal(6);
        let two = integrate_over_set(&f("const:1"), &f("indicator:(0,1)|(2,3)"), &s, 2, 1e-8).unwrap();
        assert_eq!(two.exact, Some(int(2)));
        let dup = Multirectangle::parse("(0,1)|(0,1)").unwrap();
        assert_eq!(measure(&SetDescriptor::Rects(dup), &s, 2).unwrap().exact, Some(int(1)));
        let c = measure(&SetDescriptor::Characteristic(f("indicator:(0,1)|(0,1)")), &s, 2).unwrap();
        assert_eq!(c.exact, Some(int(1)));
        assert!(measure(&SetDescriptor::Characteristic(f("poly:0,1")), &s, 2).is_err());
    }

    #[test]
    fn summability() {
        let s = TruncationSchedule::diagonal(8);
        let sp = is_summable(&f("spike:3"), &s, 2).unwrap();
        assert!(sp.summable);
        let e = is_summable(&f("exp-abs-y"), &TruncationSchedule::diagonal(6), 1).unwrap();
        assert!(!e.summable);
    }

    #[test]
    fn probe_and_brackets() {
        let rows = abs_continuity_probe(&f("const:1"), &unit(), 6, 7, 2).unwrap();
        for r in &rows {
            assert!((r.integral - to_f64(&r.measure)).abs() <= r.error_bound + 1e-12, "{r:?}");
            assert_eq!(r.within_bound, Some(true));
        }
        let bx = Rectangle::parse("[-1,2]").unwrap();
        let b = exterior_interior_measure(&Multirectangle::parse("[0,1]").unwrap(), &bx, &rat(1, 16)).unwrap();
        assert!(b.exterior.0 <= int(1) && int(1) <= b.exterior.1);
        assert!(b.interior.0 <= int(1) && int(1) <= b.interior.1);
        let empty = exterior_interior_measure(&Multirectangle::empty(1), &bx, &rat(1, 16)).unwrap();
        assert_eq!(empty.exterior, (int(0), int(0)));
    }
}
