//! Reduction formulas: direct integration against iterated integrals,
//! section measures of multirectangles, and the Tonelli summability gate.

use std::cell::RefCell;
use std::rc::Rc;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::lebesgue::{diverges, integrate_bounded, integrate_general, IntegralResult, LebesgueError, TruncationSchedule, Verdict, DEFAULT_RTOL};
use crate::qc::poly::MultiPoly;
use crate::qc::{Cell, Expr, QcError, QcFunction};
use crate::rational::{format_rational, from_f64, serialize_rational, to_f64, Length, Rational};
use crate::riemann::{riemann_integrate, Integrand, RiemannError};
use crate::set::{Multirectangle, Rectangle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FubiniError {
    #[error("inner integral fails at {coordinate:?}: {detail}")]
    InnerNotIntegrable { coordinate: Vec<String>, detail: String },
    #[error("not summable: truncated iterated integrals of |f| diverge")]
    NotSummable(Box<TonelliGate>),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Qc(#[from] QcError),
    #[error(transparent)]
    Lebesgue(#[from] LebesgueError),
    #[error(transparent)]
    Riemann(#[from] RiemannError),
}

fn insert(cell: &Cell, axis: usize, span: &(Rational, Rational)) -> Vec<(Rational, Rational)> {
    let mut full = cell.to_vec();
    full.insert(axis, span.clone());
    full
}

type Failure = Rc<RefCell<Option<FubiniError>>>;

/// `x ↦ base(x)` along one axis with the other coordinates fixed.
struct Section<'a> {
    base: &'a dyn Integrand,
    axis: usize,
    point: Vec<Rational>,
}

impl Section<'_> {
    fn full(&self, cell: &Cell) -> Vec<(Rational, Rational)> {
        self.point.iter().enumerate().map(|(j, v)| if j == self.axis { cell[0].clone() } else { (v.clone(), v.clone()) }).collect()
    }
}

impl Integrand for Section<'_> {
    fn dim(&self) -> usize {
        1
    }
    fn breakpoints(&self, cell: &Cell) -> Vec<Vec<Rational>> {
        vec![self.base.breakpoints(&self.full(cell)).swap_remove(self.axis)]
    }
    fn range(&self, cell: &Cell) -> Option<(f64, f64)> {
        self.base.range(&self.full(cell))
    }
    fn deriv_bound(&self, axis: usize, k: u32, cell: &Cell) -> Option<f64> {
        debug_assert_eq!(axis, 0);
        self.base.deriv_bound(self.axis, k, &self.full(cell))
    }
    fn cell_poly(&self, cell: &Cell) -> Option<MultiPoly> {
        let mut p = self.base.cell_poly(&self.full(cell))?;
        for j in (0..self.point.len()).rev() {
            if j != self.axis {
                p = p.fix(j, &self.point[j]).remove_axis(j);
            }
        }
        Some(p)
    }
    fn eval_f64(&self, x: &[f64]) -> f64 {
        let p: Vec<f64> = self.point.iter().enumerate().map(|(j, v)| if j == self.axis { x[0] } else { to_f64(v) }).collect();
        self.base.eval_f64(&p)
    }
}

/// `x ↦ ∫ base(x, y) dy` over `span` on axis `axis`.
struct Marginal {
    base: Box<dyn Integrand>,
    axis: usize,
    span: (Rational, Rational),
    tol: f64,
    failure: Failure,
}

impl Marginal {
    fn width(&self) -> f64 {
        to_f64(&(&self.span.1 - &self.span.0))
    }
}

impl Integrand for Marginal {
    fn dim(&self) -> usize {
        self.base.dim() - 1
    }
    fn breakpoints(&self, cell: &Cell) -> Vec<Vec<Rational>> {
        let mut b = self.base.breakpoints(&insert(cell, self.axis, &self.span));
        b.remove(self.axis);
        b
    }
    fn range(&self, cell: &Cell) -> Option<(f64, f64)> {
        let (lo, hi) = self.base.range(&insert(cell, self.axis, &self.span))?;
        let w = self.width();
        Some((lo * w, hi * w))
    }
    fn deriv_bound(&self, axis: usize, k: u32, cell: &Cell) -> Option<f64> {
        let a = if axis >= self.axis { axis + 1 } else { axis };
        self.base.deriv_bound(a, k, &insert(cell, self.axis, &self.span)).map(|m| m * self.width())
    }
    fn cell_poly(&self, cell: &Cell) -> Option<MultiPoly> {
        let full = insert(cell, self.axis, &self.span);
        let cuts = self.base.breakpoints(&full).swap_remove(self.axis);
        let mut acc = MultiPoly::zero();
        for w in cuts.windows(2) {
            let mut piece = full.clone();
            piece[self.axis] = (w[0].clone(), w[1].clone());
            acc = acc.add(&self.base.cell_poly(&piece)?.integrate_axis(self.axis, &w[0], &w[1]));
        }
        Some(acc.remove_axis(self.axis))
    }
    fn eval_f64(&self, x: &[f64]) -> f64 {
        let Some(mut point) = x.iter().map(|&t| from_f64(t)).collect::<Option<Vec<_>>>() else { return f64::NAN };
        point.insert(self.axis, Rational::zero());
        let section = Section { base: self.base.as_ref(), axis: self.axis, point };
        match riemann_integrate(&section, std::slice::from_ref(&self.span), self.tol) {
            Ok(v) => v.value,
            Err(e) => {
                let mut slot = self.failure.borrow_mut();
                if slot.is_none() {
                    *slot = Some(FubiniError::InnerNotIntegrable { coordinate: x.iter().map(|t| t.to_string()).collect(), detail: e.to_string() });
                }
                f64::NAN
            }
        }
    }
}

struct ExprIntegrand(Expr);

impl Integrand for ExprIntegrand {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn breakpoints(&self, cell: &Cell) -> Vec<Vec<Rational>> {
        self.0.breakpoints(cell)
    }
    fn range(&self, cell: &Cell) -> Option<(f64, f64)> {
        self.0.range(cell)
    }
    fn deriv_bound(&self, axis: usize, k: u32, cell: &Cell) -> Option<f64> {
        self.0.deriv_bound(axis, k, cell)
    }
    fn cell_poly(&self, cell: &Cell) -> Option<MultiPoly> {
        self.0.cell_poly(cell)
    }
    fn eval_f64(&self, x: &[f64]) -> f64 {
        Integrand::eval_f64(&self.0, x)
    }
}

fn check_order(order: &[usize], d: usize) -> Result<(), FubiniError> {
    let mut seen = vec![false; d];
    if order.len() != d || order.iter().any(|&a| a >= d || std::mem::replace(&mut seen[a], true)) {
        return Err(FubiniError::BadParams(format!("order {order:?} is not a permutation of 0..{d}")));
    }
    Ok(())
}

/// `dy-dx` style label: innermost differential first.
pub fn order_label(order: &[usize]) -> String {
    const NAMES: [&str; 4] = ["x", "y", "z", "w"];
    order.iter().map(|&a| NAMES.get(a).map_or_else(|| format!("dx{a}"), |n| format!("d{n}"))).collect::<Vec<_>>().join("-")
}

/// Iterated Riemann integrals of the generic part of `f` over the closed
/// box `rect`, integrating `order[0]` first.
pub fn iterated_integrate(f: &QcFunction, rect: &Cell, order: &[usize], tol: f64) -> Result<IntegralResult, FubiniError> {
    let d = f.dim();
    check_order(order, d)?;
    if !tol.is_finite() || tol <= 0.0 {
        return Err(FubiniError::BadParams("tolerance must be positive".into()));
    }
    let cell = match f.region_within(rect) {
        Ok(c) => c,
        Err(QcError::DomainMismatch(_)) => return Ok(IntegralResult::zero()),
        Err(e) => return Err(e.into()),
    };
    if cell.iter().any(|(a, b)| a >= b) {
        return Ok(IntegralResult::zero());
    }
    let failure: Failure = Rc::new(RefCell::new(None));
    let mut current: Box<dyn Integrand> = Box::new(ExprIntegrand(f.expr.generic()));
    let mut remaining: Vec<usize> = (0..d).collect();
    let mut remaining_cell = cell.clone();
    let share = tol / (2.0 * d as f64);
    for &axis in &order[..d - 1] {
        let pos = remaining.iter().position(|&a| a == axis).expect("valid order");
        let span = remaining_cell.remove(pos);
        remaining.remove(pos);
        let outer: f64 = remaining_cell.iter().map(|(a, b)| to_f64(&(b - a))).product();
        current = Box::new(Marginal { base: current, axis: pos, span, tol: share / outer.max(1e-300), failure: failure.clone() });
    }
    let r = riemann_integrate(current.as_ref(), &remaining_cell, share);
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let r = r?;
    let mut out = match r.exact {
        Some(e) => IntegralResult::exact(e),
        None => IntegralResult { value: r.value, error_bound: r.gap + tol / 2.0, exact: None, ..IntegralResult::zero() },
    };
    if !out.value.is_finite() {
        out.verdict = Verdict::NotIntegrable;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GateRow {
    #[serde(serialize_with = "serialize_rational")]
    pub radius: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub level: Rational,
    /// `∫∫ min(|f|, N)` over the truncated box.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TonelliGate {
    pub summable: bool,
    pub rows: Vec<GateRow>,
}

fn truncated_box(rect: &Rectangle, radius: &Rational) -> Option<Vec<(Rational, Rational)>> {
    let d = rect.dim();
    let bx = Rectangle::closed(&vec![(-radius, radius.clone()); d]);
    rect.closure().intersect(&bx)?.rational_bounds()
}

fn abs_min(f: &QcFunction, level: &Rational) -> QcFunction {
    let abs = Expr::Max(Box::new(f.expr.clone()), Box::new(Expr::Neg(Box::new(f.expr.clone()))));
    QcFunction { expr: Expr::Min(Box::new(abs), Box::new(Expr::constant(level.clone()))), domain: f.domain.clone() }
}

/// Tonelli: `f` is summable on `rect` iff the iterated integrals of the
/// truncations `min(|f|, N)` over `rect ∩ [−R, R]^d` stay bounded along
/// the schedule.
pub fn tonelli_gate(f: &QcFunction, rect: &Rectangle, schedule: &TruncationSchedule) -> Result<TonelliGate, FubiniError> {
    if schedule.pairs.is_empty() {
        return Err(FubiniError::BadParams("empty truncation schedule".into()));
    }
    let d = f.dim();
    let order: Vec<usize> = (0..d).rev().collect();
    let mut rows = Vec::new();
    for (radius, level) in &schedule.pairs {
        let value = match truncated_box(rect, radius) {
            Some(bx) => iterated_integrate(&abs_min(f, level), &bx, &order, 1e-9)?.value,
            None => 0.0,
        };
        rows.push(GateRow { radius: radius.clone(), level: level.clone(), value });
        let vals: Vec<f64> = rows.iter().map(|r| r.value).collect();
        let n = vals.len();
        if rect.is_bounded() && n >= 3 && vals[n - 1] == vals[n - 2] && vals[n - 2] == vals[n - 3] {
            break;
        }
    }
    let vals: Vec<f64> = rows.iter().map(|r| r.value).collect();
    Ok(TonelliGate { summable: !diverges(&vals, 1e-6), rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionVerdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OrderedIntegral {
    pub order: String,
    pub result: IntegralResult,
    pub gap: f64,
    pub allowed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReductionReport {
    pub direct: IntegralResult,
    pub iterated: Vec<OrderedIntegral>,
    pub gate: TonelliGate,
    pub verdict: ReductionVerdict,
}

/// Direct Lebesgue integral against the iterated integrals in the natural
/// and reversed orders, after the Tonelli gate.
pub fn fubini_check(f: &QcFunction, rect: &Rectangle, tol: f64) -> Result<ReductionReport, FubiniError> {
    if rect.dim() != f.dim() || f.dim() < 2 {
        return Err(FubiniError::BadParams("need a rectangle of the function's dimension ≥ 2".into()));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(FubiniError::BadParams("tolerance must be positive".into()));
    }
    let schedule = TruncationSchedule::default();
    let gate = tonelli_gate(f, rect, &schedule)?;
    if !gate.summable {
        return Err(FubiniError::NotSummable(Box::new(gate)));
    }
    let d = f.dim();
    let last = gate.rows.last().expect("nonempty schedule");
    let bx = truncated_box(rect, &last.radius).ok_or_else(|| FubiniError::BadParams("rectangle misses the domain".into()))?;
    let restricted = f.with_domain(f.domain.intersect(rect).unwrap_or_else(|| rect.clone()))?;
    let direct = if rect.is_bounded() && f.bound_on(&bx).is_some_and(f64::is_finite) {
        integrate_bounded(&restricted, &bx, 4, DEFAULT_RTOL.max(tol / 10.0))?
    } else {
        integrate_general(&restricted, &schedule, 4, DEFAULT_RTOL.max(tol / 10.0))?
    };
    let natural: Vec<usize> = (0..d).collect();
    let reversed: Vec<usize> = (0..d).rev().collect();
    let mut iterated = Vec::new();
    for order in [reversed, natural] {
        let result = iterated_integrate(f, &bx, &order, tol)?;
        let gap = (result.value - direct.value).abs();
        let allowed = result.error_bound + direct.error_bound + tol;
        iterated.push(OrderedIntegral { order: order_label(&order), result, gap, allowed });
    }
    let verdict = if iterated.iter().all(|o| o.gap <= o.allowed) { ReductionVerdict::Pass } else { ReductionVerdict::Fail };
    Ok(ReductionReport { direct, iterated, gate, verdict })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SectionPiece {
    #[serde(serialize_with = "serialize_rational")]
    pub lo: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub hi: Rational,
    /// `λ_d(A_x)` for `x` strictly between `lo` and `hi`.
    #[serde(serialize_with = "serialize_rational")]
    pub section_measure: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SectionReport {
    pub axis: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub volume: Rational,
    #[serde(serialize_with = "serialize_rational")]
    pub integral: Rational,
    pub pieces: Vec<SectionPiece>,
    /// Breakpoints where the section is degenerate and was skipped.
    pub skipped: Vec<String>,
    pub agree: bool,
}

/// `λ_{d+1}(A) = ∫ λ_d(A_x) dx` for a bounded multirectangle, sectioning
/// along `axis`. The section measure is piecewise constant between the
/// endpoints of the components, so both sides are exact.
pub fn section_identity_check(a: &Multirectangle, axis: usize) -> Result<SectionReport, FubiniError> {
    let d = a.dim();
    if d < 2 || axis >= d {
        return Err(FubiniError::BadParams(format!("axis {axis} of a set in dimension {d}")));
    }
    if !a.is_bounded() {
        return Err(FubiniError::BadParams("the set must be bounded".into()));
    }
    let volume = match a.measure() {
        Length::Finite(v) => v,
        Length::Infinite => return Err(FubiniError::BadParams("the set must be bounded".into())),
    };
    let mut cuts: Vec<Rational> = Vec::new();
    for r in a.rects() {
        let s = r.side(axis);
        cuts.extend(s.lo().finite().cloned());
        cuts.extend(s.hi().finite().cloned());
    }
    cuts.sort();
    cuts.dedup();
    let two = Rational::from_integer(2.into());
    let mut pieces = Vec::new();
    let mut integral = Rational::zero();
    for w in cuts.windows(2) {
        let mid = (&w[0] + &w[1]) / &two;
        let rects: Vec<Rectangle> = a.rects().iter().filter(|r| r.side(axis).closure().contains(&mid)).map(|r| r.drop_axis(axis)).collect();
        let section = Multirectangle::new(d - 1, rects).expect("same dimension");
        let m = match section.measure() {
            Length::Finite(v) => v,
            Length::Infinite => unreachable!("bounded set"),
        };
        integral += &m * (&w[1] - &w[0]);
        pieces.push(SectionPiece { lo: w[0].clone(), hi: w[1].clone(), section_measure: m });
    }
    let agree = integral == volume;
    Ok(SectionReport { axis, volume, integral, pieces, skipped: cuts.iter().map(format_rational).collect(), agree })
}
