//! Expression trees for quasicontinuous functions.
//!
//! Every node knows where it jumps (`faces`), where it bends (`kinks`),
//! where it differs from its continuous-almost-everywhere part
//! (`exceptional`), how large it is on a closed cell (`range`) and, when
//! smooth on a cell, how large its derivatives are.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::pieces::PiecewiseLinear;
use super::poly::MultiPoly;
use crate::cantor::RationalEnumeration;
use crate::rational::{simplest_in, to_f64, Endpoint, Rational};
use crate::set::{Interval, Multirectangle};

/// A coordinate: an exact rational or a sampled real (treated as
/// irrational).
#[derive(Clone, Debug, PartialEq)]
pub enum Coord {
    Exact(Rational),
    Sampled(f64),
}

impl Coord {
    pub fn to_f64(&self) -> f64 {
        match self {
            Coord::Exact(r) => to_f64(r),
            Coord::Sampled(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Coord::Exact(r) => Some(r),
            Coord::Sampled(_) => None,
        }
    }
}

impl From<Rational> for Coord {
    fn from(r: Rational) -> Coord {
        Coord::Exact(r)
    }
}

pub fn exact_point(x: &[Rational]) -> Vec<Coord> {
    x.iter().cloned().map(Coord::Exact).collect()
}

fn all_exact(x: &[Coord]) -> Option<Vec<Rational>> {
    x.iter().map(|c| c.exact().cloned()).collect()
}

/// Closed box `∏ [a_i, b_i]`.
pub type Cell = [(Rational, Rational)];

/// A piece of hyperplane `x_axis = value` restricted to a closed box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub axis: usize,
    pub value: Rational,
    /// Full box; `extent[axis] == (value, value)`.
    pub extent: Vec<(Rational, Rational)>,
}

impl Face {
    fn new(axis: usize, value: Rational, mut extent: Vec<(Rational, Rational)>) -> Face {
        extent[axis] = (value.clone(), value.clone());
        Face { axis, value, extent }
    }
}

/// Where a function differs from its generic part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exceptional {
    /// Points of the box whose `axis` coordinate is rational.
    Rationals {
        axis: usize,
        extent: Vec<(Rational, Rational)>,
    },
    Plane(Face),
    /// The whole box.
    Everything,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Atom {
    Const(Rational),
    /// `Σ c_i x^i`.
    Poly(Vec<Rational>),
    /// Piecewise linear with rational breaks; `label` is its DSL form.
    Pieces {
        pw: PiecewiseLinear,
        label: String,
    },
    Indicator(Multirectangle),
    Dirichlet,
    Thomae,
    /// Indicator of the first `n` rationals of `[0,1]`.
    Qn(u32),
    /// `cos(m! π x)^{2n}`.
    CosPower {
        m: u32,
        n: u32,
    },
    /// `e^{-|y|}` on the plane.
    ExpAbsY,
    /// `1/√x` for `x > 0`, zero elsewhere.
    InvSqrt,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Atom(Atom),
    Sum(Box<Expr>, Box<Expr>),
    Product(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    /// `f(x) g(y)` with `x` the first `f.dim()` coordinates.
    Tensor(Box<Expr>, Box<Expr>),
    /// `f(x − α)`.
    Shift(Box<Expr>, Vec<Rational>),
    /// Section: `f` with coordinate `axis` frozen at `value`.
    Fix {
        inner: Box<Expr>,
        axis: usize,
        value: Rational,
    },
}

pub(crate) fn factorial(m: u32) -> BigInt {
    (1..=m).fold(BigInt::one(), |a, k| a * k)
}

/// The first `n` rationals of `[0,1]` in the fixed enumeration.
pub fn qn_points(n: u32) -> Vec<Rational> {
    RationalEnumeration::new(Rational::zero(), Rational::one()).take(n as usize).collect()
}

fn f64_range(lo: &Rational, hi: &Rational) -> (f64, f64) {
    (to_f64(lo), to_f64(hi))
}

fn mul_range(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let p = [a.0 * b.0, a.0 * b.1, a.1 * b.0, a.1 * b.1];
    (p.iter().cloned().fold(f64::INFINITY, f64::min), p.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

fn sup_abs(r: (f64, f64)) -> f64 {
    r.0.abs().max(r.1.abs())
}

fn cos_power_f64(m: u32, n: u32, x: &Rational) -> f64 {
    let t = x * Rational::from_integer(factorial(m));
    let two = Rational::from_integer(2.into());
    let reduced = &t - (&t / &two).floor() * &two;
    (std::f64::consts::PI * to_f64(&reduced)).cos().powi(2 * n as i32)
}

fn cos_power_exact(m: u32, x: &Rational) -> Option<Rational> {
    let t = x * Rational::from_integer(factorial(m));
    if t.is_integer() {
        return Some(Rational::one());
    }
    let two_t = &t * Rational::from_integer(2.into());
    if two_t.is_integer() {
        return Some(Rational::zero());
    }
    None
}

fn sqrt_exact(x: &Rational) -> Option<Rational> {
    let root = |n: &BigInt| {
        let r = n.sqrt();
        (&r * &r == *n).then_some(r)
    };
    Some(Rational::new(root(x.numer())?, root(x.denom())?))
}

fn closed_meet(iv: &Interval, lo: &Rational, hi: &Rational) -> Option<(Rational, Rational)> {
    let part = iv.closure().intersect(&Interval::closed(lo.clone(), hi.clone()))?;
    part.bounds().map(|(a, b)| (a.clone(), b.clone()))
}

fn in_closed(v: &Rational, cell: &(Rational, Rational)) -> bool {
    &cell.0 <= v && v <= &cell.1
}

fn midpoint(cell: &Cell) -> Vec<Rational> {
    let two = Rational::from_integer(2.into());
    cell.iter().map(|(a, b)| (a + b) / &two).collect()
}

fn is_point(cell: &Cell) -> bool {
    cell.iter().all(|(a, b)| a == b)
}

fn binomial(k: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

impl Atom {
    fn raw_dim(&self) -> usize {
        match self {
            Atom::Const(_) => 0,
            Atom::Indicator(m) => m.dim(),
            Atom::ExpAbsY => 2,
            _ => 1,
        }
    }

    fn eval(&self, x: &[Coord]) -> f64 {
        if let Some(ex) = all_exact(x) {
            if let Some(v) = self.eval_exact(&ex) {
                return to_f64(&v);
            }
        }
        match self {
            Atom::Const(c) => to_f64(c),
            Atom::Poly(c) => {
                let t = x[0].to_f64();
                c.iter().rev().fold(0.0, |acc, a| acc * t + to_f64(a))
            }
            Atom::Pieces { pw, .. } => pw.eval_f64(x[0].to_f64()),
            Atom::Indicator(m) => {
                let p: Vec<f64> = x.iter().map(Coord::to_f64).collect();
                if m.contains_f64(&p) {
                    1.0
                } else {
                    0.0
                }
            }
            Atom::Dirichlet | Atom::Thomae | Atom::Qn(_) => match &x[0] {
                Coord::Exact(r) => self.eval_exact(std::slice::from_ref(r)).map_or(0.0, |v| to_f64(&v)),
                Coord::Sampled(_) => 0.0,
            },
            Atom::CosPower { m, n } => match &x[0] {
                Coord::Exact(r) => cos_power_f64(*m, *n, r),
                Coord::Sampled(t) => {
                    let c = factorial(*m).to_f64().unwrap_or(f64::INFINITY);
                    (std::f64::consts::PI * c * t).cos().powi(2 * *n as i32)
                }
            },
            Atom::ExpAbsY => (-x[1].to_f64().abs()).exp(),
            Atom::InvSqrt => {
                let t = x[0].to_f64();
                if t > 0.0 {
                    1.0 / t.sqrt()
                } else {
                    0.0
                }
            }
        }
    }

    fn eval_exact(&self, x: &[Rational]) -> Option<Rational> {
        Some(match self {
            Atom::Const(c) => c.clone(),
            Atom::Poly(c) => c.iter().rev().fold(Rational::zero(), |acc, a| acc * &x[0] + a),
            Atom::Pieces { pw, .. } => pw.eval(&x[0]),
            Atom::Indicator(m) => {
                if m.contains(x) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            Atom::Dirichlet => Rational::one(),
            Atom::Thomae => Rational::new(BigInt::one(), x[0].denom().clone()),
            Atom::Qn(n) => {
                if crate::cantor::unit_index(&x[0]).is_some_and(|i| i <= u64::from(*n)) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            Atom::CosPower { m, .. } => cos_power_exact(*m, &x[0])?,
            Atom::ExpAbsY => {
                if x[1].is_zero() {
                    Rational::one()
                } else {
                    return None;
                }
            }
            Atom::InvSqrt => {
                if !x[0].is_positive() {
                    Rational::zero()
                } else {
                    sqrt_exact(&x[0])?.recip()
                }
            }
        })
    }

    fn is_exceptional(&self) -> bool {
        matches!(self, Atom::Dirichlet | Atom::Thomae | Atom::Qn(_))
    }

    fn faces(&self, cell: &Cell) -> Vec<Face> {
        match self {
            Atom::Pieces { pw, .. } => pw.jumps().into_iter().filter(|v| in_closed(v, &cell[0])).map(|v| Face::new(0, v, cell.to_vec())).collect(),
            Atom::Indicator(m) => {
                let mut out = Vec::new();
                for r in m.rects() {
                    let meets: Option<Vec<(Rational, Rational)>> = r.sides().iter().zip(cell).map(|(s, (a, b))| closed_meet(s, a, b)).collect();
                    let Some(extent) = meets else { continue };
                    for (axis, side) in r.sides().iter().enumerate() {
                        for e in [side.lo(), side.hi()] {
                            if let Endpoint::Finite(v) = e {
                                let f = Face::new(axis, v.clone(), extent.clone());
                                if in_closed(v, &cell[axis]) && !out.contains(&f) {
                                    out.push(f);
                                }
                            }
                        }
                    }
                }
                out
            }
            Atom::InvSqrt => {
                if in_closed(&Rational::zero(), &cell[0]) {
                    vec![Face::new(0, Rational::zero(), cell.to_vec())]
                } else {
                    Vec::new()
                }
            }
            _ => Vec::new(),
        }
    }

    fn kinks(&self, cell: &Cell) -> Vec<Face> {
        match self {
            Atom::Pieces { pw, .. } => pw.kinks().into_iter().filter(|v| in_closed(v, &cell[0])).map(|v| Face::new(0, v, cell.to_vec())).collect(),
            Atom::ExpAbsY if in_closed(&Rational::zero(), &cell[1]) => {
                vec![Face::new(1, Rational::zero(), cell.to_vec())]
            }
            _ => Vec::new(),
        }
    }

    fn exceptional(&self, cell: &Cell) -> Vec<Exceptional> {
        match self {
            Atom::Dirichlet | Atom::Thomae => vec![Exceptional::Rationals { axis: 0, extent: cell.to_vec() }],
            Atom::Qn(n) => {
                qn_points(*n).into_iter().filter(|q| in_closed(q, &cell[0])).map(|q| Exceptional::Plane(Face::new(0, q, cell.to_vec()))).collect()
            }
            _ => Vec::new(),
        }
    }

    fn range(&self, cell: &Cell) -> Option<(f64, f64)> {
        let (a, b) = &cell[0];
        Some(match self {
            Atom::Const(c) => (to_f64(c), to_f64(c)),
            Atom::Poly(c) => {
                let p = MultiPoly::univariate(0, c);
                let (lo, hi) = p.range(&cell[..1], 6);
                f64_range(&lo, &hi)
            }
            Atom::Pieces { pw, .. } => {
                let (lo, hi) = pw.range(a, b);
                f64_range(&lo, &hi)
            }
            Atom::Indicator(m) => {
                let boxed = crate::set::Rectangle::closed(cell);
                let meets = m.rects().iter().any(|r| r.intersects(&boxed));
                let inside = m.rects().iter().any(|r| boxed.is_subset_of(r));
                (if inside { 1.0 } else { 0.0 }, if meets { 1.0 } else { 0.0 })
            }
            Atom::Dirichlet => (0.0, 1.0),
            Atom::Thomae => {
                let q = simplest_in(a, b);
                (0.0, 1.0 / to_f64(&Rational::from_integer(q.denom().clone())))
            }
            Atom::Qn(n) => {
                let hit = qn_points(*n).iter().any(|q| in_closed(q, &cell[0]));
                (0.0, if hit { 1.0 } else { 0.0 })
            }
            Atom::CosPower { m, n } => {
                let c = Rational::from_integer(factorial(*m));
                let two = Rational::from_integer(2.into());
                let (ta, tb) = (a * &c, b * &c);
                let (va, vb) = (cos_power_f64(*m, *n, a), cos_power_f64(*m, *n, b));
                let int_inside = ta.ceil() <= tb;
                let half_inside = {
                    let k = (&ta * &two - Rational::one()) / &two;
                    let first = k.ceil() * &two + Rational::one();
                    first / &two <= tb
                };
                (if half_inside { 0.0 } else { va.min(vb) }, if int_inside { 1.0 } else { va.max(vb) })
            }
            Atom::ExpAbsY => {
                let (c, d) = &cell[1];
                let (vc, vd) = ((-to_f64(c).abs()).exp(), (-to_f64(d).abs()).exp());
                let top = if !c.is_positive() && !d.is_negative() { 1.0 } else { vc.max(vd) };
                (vc.min(vd), top)
            }
            Atom::InvSqrt => {
                if !b.is_positive() {
                    (0.0, 0.0)
                } else if a.is_positive() {
                    (1.0 / to_f64(b).sqrt(), 1.0 / to_f64(a).sqrt())
                } else {
                    return None;
                }
            }
        })
    }

    fn deriv_bound(&self, axis: usize, k: u32, cell: &Cell) -> Option<f64> {
        if k == 0 {
            return self.range(cell).map(sup_abs);
        }
        match self {
            Atom::Const(_) | Atom::Indicator(_) => Some(0.0),
            Atom::Poly(c) => {
                let mut p = MultiPoly::univariate(0, c);
                for _ in 0..k {
                    p = p.derivative(0);
                }
                let (lo, hi) = p.enclose(&cell[..1]);
                Some(sup_abs(f64_range(&lo, &hi)))
            }
            Atom::Pieces { pw, .. } => {
                if k >= 2 {
                    return Some(0.0);
                }
                let mid = midpoint(cell);
                Some(to_f64(&pw.line_at(&mid[0]).1).abs())
            }
            Atom::CosPower { m, n } => {
                let c = factorial(*m).to_f64()?;
                Some((2.0 * *n as f64 * std::f64::consts::PI * c).powi(k as i32))
            }
            Atom::ExpAbsY => {
                if axis == 0 {
                    return Some(0.0);
                }
                let (c, d) = &cell[1];
                if c.is_negative() && d.is_positive() {
                    return None;
                }
                self.range(cell).map(|r| r.1)
            }
            Atom::InvSqrt => {
                let (a, b) = &cell[0];
                if !b.is_positive() {
                    return Some(0.0);
                }
                if !a.is_positive() {
                    return None;
                }
                let coef: f64 = (0..k).map(|i| (2 * i + 1) as f64 / 2.0).product();
                Some(coef * to_f64(a).powf(-0.5 - k as f64))
            }
            Atom::Dirichlet | Atom::Thomae | Atom::Qn(_) => None,
        }
    }

    fn cell_poly(&self, cell: &Cell) -> Option<MultiPoly> {
        match self {
            Atom::Const(c) => Some(MultiPoly::constant(c.clone())),
            Atom::Poly(c) => Some(MultiPoly::univariate(0, c)),
            Atom::Pieces { pw, .. } => {
                let (a, b) = pw.line_at(&midpoint(cell)[0]);
                Some(MultiPoly::linear(0, a, b))
            }
            Atom::Indicator(_) => Some(MultiPoly::constant(self.eval_exact(&midpoint(cell))?)),
            Atom::InvSqrt if !cell[0].1.is_positive() => Some(MultiPoly::zero()),
            _ => None,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Const(c) => write!(f, "const:{}", c),
            Atom::Poly(c) => {
                write!(f, "poly:{}", c.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
            }
            Atom::Pieces { label, .. } => write!(f, "{label}"),
            Atom::Indicator(m) => {
                let rects: Vec<String> = m.rects().iter().map(|r| r.to_string()).collect();
                write!(f, "indicator:{}", rects.join("|"))
            }
            Atom::Dirichlet => write!(f, "dirichlet"),
            Atom::Thomae => write!(f, "thomae"),
            Atom::Qn(n) => write!(f, "qn-indicator:{n}"),
            Atom::CosPower { m, n } => write!(f, "cos-power:{m},{n}"),
            Atom::ExpAbsY => write!(f, "exp-abs-y"),
            Atom::InvSqrt => write!(f, "inv-sqrt"),
        }
    }
}

fn insert_axis(cell: &Cell, axis: usize, v: &Rational) -> Vec<(Rational, Rational)> {
    let mut out = cell.to_vec();
    out.insert(axis, (v.clone(), v.clone()));
    out
}

fn shift_cell(cell: &Cell, alpha: &[Rational], sign: i32) -> Vec<(Rational, Rational)> {
    cell.iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let s = alpha.get(i).cloned().unwrap_or_else(Rational::zero);
            if sign > 0 {
                (a + &s, b + &s)
            } else {
                (a - &s, b - &s)
            }
        })
        .collect()
}

/// Lifts a face of a factor into the product space.
fn lift_face(face: Face, offset: usize, before: &Cell, after: &Cell) -> Face {
    let mut extent = before.to_vec();
    extent.extend(face.extent);
    extent.extend_from_slice(after);
    Face { axis: face.axis + offset, value: face.value, extent }
}

fn lift_exceptional(e: Exceptional, offset: usize, before: &Cell, after: &Cell) -> Exceptional {
    match e {
        Exceptional::Rationals { axis, extent } => {
            let mut full = before.to_vec();
            full.extend(extent);
            full.extend_from_slice(after);
            Exceptional::Rationals { axis: axis + offset, extent: full }
        }
        Exceptional::Plane(face) => Exceptional::Plane(lift_face(face, offset, before, after)),
        Exceptional::Everything => Exceptional::Everything,
    }
}

fn shift_face(face: Face, alpha: &[Rational]) -> Face {
    let s = alpha.get(face.axis).cloned().unwrap_or_else(Rational::zero);
    Face { axis: face.axis, value: face.value + s, extent: shift_cell(&face.extent, alpha, 1) }
}

/// Projects a face of the unsectioned function onto the section.
fn section_face(face: Face, axis: usize) -> Option<Face> {
    if face.axis == axis {
        return None;
    }
    let mut extent = face.extent;
    extent.remove(axis);
    let new_axis = if face.axis > axis { face.axis - 1 } else { face.axis };
    Some(Face { axis: new_axis, value: face.value, extent })
}

impl Expr {
    pub fn atom(a: Atom) -> Expr {
        Expr::Atom(a)
    }

    pub fn constant(c: Rational) -> Expr {
        Expr::Atom(Atom::Const(c))
    }

    /// Dimension, with constants counting as zero-dimensional.
    pub fn raw_dim(&self) -> usize {
        match self {
            Expr::Atom(a) => a.raw_dim(),
            Expr::Sum(f, g) | Expr::Product(f, g) | Expr::Max(f, g) | Expr::Min(f, g) => f.raw_dim().max(g.raw_dim()),
            Expr::Neg(f) | Expr::Shift(f, _) => f.raw_dim(),
            Expr::Tensor(f, g) => f.dim() + g.dim(),
            Expr::Fix { inner, .. } => inner.dim() - 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.raw_dim().max(1)
    }

    fn split<'a, T>(&self, x: &'a [T]) -> (&'a [T], &'a [T]) {
        match self {
            Expr::Tensor(f, _) => x.split_at(f.dim()),
            _ => unreachable!("split on tensor only"),
        }
    }

    pub fn eval(&self, x: &[Coord]) -> f64 {
        match self {
            Expr::Atom(a) => a.eval(x),
            Expr::Sum(f, g) => f.eval(x) + g.eval(x),
            Expr::Product(f, g) => f.eval(x) * g.eval(x),
            Expr::Max(f, g) => f.eval(x).max(g.eval(x)),
            Expr::Min(f, g) => f.eval(x).min(g.eval(x)),
            Expr::Neg(f) => -f.eval(x),
            Expr::Tensor(f, g) => {
                let (l, r) = self.split(x);
                f.eval(l) * g.eval(r)
            }
            Expr::Shift(f, alpha) => {
                let y: Vec<Coord> = x
                    .iter()
                    .zip(alpha)
                    .map(|(c, a)| match c {
                        Coord::Exact(r) => Coord::Exact(r - a),
                        Coord::Sampled(t) => Coord::Sampled(t - to_f64(a)),
                    })
                    .collect();
                f.eval(&y)
            }
            Expr::Fix { inner, axis, value } => {
                let mut y = x.to_vec();
                y.insert(*axis, Coord::Exact(value.clone()));
                inner.eval(&y)
            }
        }
    }

    pub fn eval_exact(&self, x: &[Rational]) -> Option<Rational> {
        Some(match self {
            Expr::Atom(a) => a.eval_exact(x)?,
            Expr::Sum(f, g) => f.eval_exact(x)? + g.eval_exact(x)?,
            Expr::Product(f, g) => f.eval_exact(x)? * g.eval_exact(x)?,
            Expr::Max(f, g) => f.eval_exact(x)?.max(g.eval_exact(x)?),
            Expr::Min(f, g) => f.eval_exact(x)?.min(g.eval_exact(x)?),
            Expr::Neg(f) => -f.eval_exact(x)?,
            Expr::Tensor(f, g) => {
                let (l, r) = self.split(x);
                f.eval_exact(l)? * g.eval_exact(r)?
            }
            Expr::Shift(f, alpha) => {
                let y: Vec<Rational> = x.iter().zip(alpha).map(|(c, a)| c - a).collect();
                f.eval_exact(&y)?
            }
            Expr::Fix { inner, axis, value } => {
                let mut y = x.to_vec();
                y.insert(*axis, value.clone());
                inner.eval_exact(&y)?
            }
        })
    }

    /// Value at a rational point, exact when possible.
    pub fn eval_rational_point(&self, x: &[Rational]) -> f64 {
        match self.eval_exact(x) {
            Some(v) => to_f64(&v),
            None => self.eval(&exact_point(x)),
        }
    }

    fn map2(&self, op: fn(Box<Expr>, Box<Expr>) -> Expr, f: &Expr, g: &Expr, h: fn(&Expr) -> Expr) -> Expr {
        op(Box::new(h(f)), Box::new(h(g)))
    }

    /// The function with its exceptional atoms (Dirichlet, Thomae, finite
    /// rational indicators) replaced by zero. Equal to `self` off the
    /// exceptional sets.
    pub fn generic(&self) -> Expr {
        match self {
            Expr::Atom(a) if a.is_exceptional() => Expr::constant(Rational::zero()),
            Expr::Atom(_) => self.clone(),
            Expr::Sum(f, g) => self.map2(Expr::Sum, f, g, Expr::generic),
            Expr::Product(f, g) => self.map2(Expr::Product, f, g, Expr::generic),
            Expr::Max(f, g) => self.map2(Expr::Max, f, g, Expr::generic),
            Expr::Min(f, g) => self.map2(Expr::Min, f, g, Expr::generic),
            Expr::Tensor(f, g) => self.map2(Expr::Tensor, f, g, Expr::generic),
            Expr::Neg(f) => Expr::Neg(Box::new(f.generic())),
            Expr::Shift(f, a) => Expr::Shift(Box::new(f.generic()), a.clone()),
            Expr::Fix { inner, axis, value } => Expr::Fix { inner: Box::new(inner.generic()), axis: *axis, value: value.clone() },
        }
    }

    pub fn has_exceptions(&self) -> bool {
        match self {
            Expr::Atom(a) => a.is_exceptional(),
            Expr::Sum(f, g) | Expr::Product(f, g) | Expr::Max(f, g) | Expr::Min(f, g) | Expr::Tensor(f, g) => {
                f.has_exceptions() || g.has_exceptions()
            }
            Expr::Neg(f) | Expr::Shift(f, _) => f.has_exceptions(),
            Expr::Fix { inner, .. } => inner.has_exceptions(),
        }
    }

    /// Whether the function differs from its generic part on an
    /// infinite set (Dirichlet- or Thomae-like).
    pub fn has_dense_exceptions(&self) -> bool {
        match self {
            Expr::Atom(a) => matches!(a, Atom::Dirichlet | Atom::Thomae),
            Expr::Sum(f, g) | Expr::Product(f, g) | Expr::Max(f, g) | Expr::Min(f, g) | Expr::Tensor(f, g) => {
                f.has_dense_exceptions() || g.has_dense_exceptions()
            }
            Expr::Neg(f) | Expr::Shift(f, _) => f.has_dense_exceptions(),
            Expr::Fix { inner, .. } => inner.has_dense_exceptions(),
        }
    }

    fn collect<T>(
        &self,
        cell: &Cell,
        leaf: &dyn Fn(&Atom, &Cell) -> Vec<T>,
        lift: &dyn Fn(T, usize, &Cell, &Cell) -> T,
        shift: &dyn Fn(T, &[Rational]) -> T,
        section: &dyn Fn(T, usize, &Rational) -> Option<T>,
    ) -> Vec<T> {
        match self {
            Expr::Atom(a) => leaf(a, cell),
            Expr::Sum(f, g) | Expr::Product(f, g) | Expr::Max(f, g) | Expr::Min(f, g) => {
                let mut out = f.collect(cell, leaf, lift, shift, section);
                out.extend(g.collect(cell, leaf, lift, shift, section));
                out
            }
            Expr::Neg(f) => f.collect(cell, leaf, lift, shift, section),
            Expr::Tensor(f, g) => {
                let (l, r) = self.split(cell);
                let mut out: Vec<T> = f.collect(l, leaf, lift, shift, section).into_iter().map(|t| lift(t, 0, &[], r)).collect();
                out.extend(g.collect(r, leaf, lift, shift, section).into_iter().map(|t| lift(t, l.len(), l, &[])));
                out
            }
            Expr::Shift(f, alpha) => {
                let inner = shift_cell(cell, alpha, -1);
                f.collect(&inner, leaf, lift, shift, section).into_iter().map(|t| shift(t, alpha)).collect()
            }
            Expr::Fix { inner, axis, value } => {
                let c = insert_axis(cell, *axis, value);
                inner.collect(&c, leaf, lift, shift, section).into_iter().filter_map(|t| section(t, *axis, value)).collect()
            }
        }
    }

    /// Jump discontinuities meeting the closed cell.
    pub fn faces(&self, cell: &Cell) -> Vec<Face> {
        let mut out = self.collect(cell, &|a, c| a.faces(c), &lift_face, &shift_face, &|f, axis, _| section_face(f, axis));
        dedup(&mut out);
        out
    }

    /// Continuous breakpoints where the formula changes, including
    /// crossings of max/min branches in one dimension.
    pub fn kinks(&self, cell: &Cell) -> Vec<Face> {
        let mut out = match self {
            Expr::Max(f, g) | Expr::Min(f, g) => {
                let mut v = f.kinks(cell);
                v.extend(g.kinks(cell));
                if cell.len() == 1 {
                    v.extend(crossings(f, g, cell).into_iter().map(|x| Face::new(0, x, cell.to_vec())));
                }
                v
            }
            Expr::Sum(f, g) | Expr::Product(f, g) => {
                let mut v = f.kinks(cell);
                v.extend(g.kinks(cell));
                v
            }
            Expr::Neg(f) => f.kinks(cell),
            Expr::Atom(a) => a.kinks(cell),
            Expr::Tensor(f, g) => {
                let (l, r) = self.split(cell);
                let mut v: Vec<Face> = f.kinks(l).into_iter().map(|t| lift_face(t, 0, &[], r)).collect();
                v.extend(g.kinks(r).into_iter().map(|t| lift_face(t, l.len(), l, &[])));
                v
            }
            Expr::Shift(f, alpha) => f.kinks(&shift_cell(cell, alpha, -1)).into_iter().map(|t| shift_face(t, alpha)).collect(),
            Expr::Fix { inner, axis, value } => {
                inner.kinks(&insert_axis(cell, *axis, value)).into_iter().filter_map(|t| section_face(t, *axis)).collect()
            }
        };
        dedup(&mut out);
        out
    }

    /// Sets on which the function may differ from [`Expr::generic`].
    pub fn exceptional(&self, cell: &Cell) -> Vec<Exceptional> {
        let mut out = self.collect(
            cell,
            &|a, c| a.exceptional(c),
            &lift_exceptional,
            &|e, alpha| match e {
                Exceptional::Rationals { axis, extent } => Exceptional::Rationals { axis, extent: shift_cell(&extent, alpha, 1) },
                Exceptional::Plane(face) => Exceptional::Plane(shift_face(face, alpha)),
                Exceptional::Everything => Exceptional::Everything,
            },
            &|e, axis, value| match e {
                Exceptional::Rationals { axis: a, .. } if a == axis => Some(Exceptional::Everything),
                Exceptional::Rationals { axis: a, mut extent } => {
                    extent.remove(axis);
                    Some(Exceptional::Rationals { axis: if a > axis { a - 1 } else { a }, extent })
                }
                Exceptional::Plane(face) if face.axis == axis => (&face.value == value).then_some(Exceptional::Everything),
                Exceptional::Plane(face) => section_face(face, axis).map(Exceptional::Plane),
                Exceptional::Everything => Some(Exceptional::Everything),
            },
        );
        let mut uniq = Vec::new();
        for e in out.drain(..) {
            if !uniq.contains(&e) {
                uniq.push(e);
            }
        }
        uniq
    }

    /// Certified enclosure of the values on a closed cell (up to binary64
    /// rounding); `None` when the function is unbounded there.
    pub fn range(&self, cell: &Cell) -> Option<(f64, f64)> {
        if is_point(cell) {
            let x: Vec<Rational> = cell.iter().map(|(a, _)| a.clone()).collect();
            let v = self.eval_rational_point(&x);
            return v.is_finite().then_some((v, v));
        }
        match self {
            Expr::Atom(a) => a.range(cell),
            Expr::Sum(f, g) => {
                let (a, b) = (f.range(cell)?, g.range(cell)?);
                Some((a.0 + b.0, a.1 + b.1))
            }
            Expr::Product(f, g) => Some(mul_range(f.range(cell)?, g.range(cell)?)),
            Expr::Max(f, g) => {
                let (a, b) = (f.range(cell)?, g.range(cell)?);
                Some((a.0.max(b.0), a.1.max(b.1)))
            }
            Expr::Min(f, g) => {
                let hi = match (f.range(cell), g.range(cell)) {
                    (Some(a), Some(b)) => a.1.min(b.1),
                    (Some(a), None) | (None, Some(a)) => a.1,
                    _ => return None,
                };
                Some((f.lower_bound(cell)?.min(g.lower_bound(cell)?), hi))
            }
            Expr::Neg(f) => f.range(cell).map(|(a, b)| (-b, -a)),
            Expr::Tensor(f, g) => {
                let (l, r) = self.split(cell);
                Some(mul_range(f.range(l)?, g.range(r)?))
            }
            Expr::Shift(f, alpha) => f.range(&shift_cell(cell, alpha, -1)),
            Expr::Fix { inner, axis, value } => inner.range(&insert_axis(cell, *axis, value)),
        }
    }

    /// A lower bound over the cell interior that survives unbounded-above
    /// parts (used for `min(f, N)` with `f` unbounded above).
    fn lower_bound(&self, cell: &Cell) -> Option<f64> {
        match self {
            Expr::Atom(Atom::InvSqrt) => {
                let (a, b) = &cell[0];
                Some(if !a.is_negative() && b.is_positive() { 1.0 / to_f64(b).sqrt() } else { 0.0 })
            }
            Expr::Min(f, g) => Some(f.lower_bound(cell)?.min(g.lower_bound(cell)?)),
            Expr::Max(f, g) => match (f.lower_bound(cell), g.lower_bound(cell)) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (Some(a), None) | (None, Some(a)) => Some(a),
                _ => None,
            },
            Expr::Sum(f, g) => Some(f.lower_bound(cell)? + g.lower_bound(cell)?),
            _ => self.range(cell).map(|r| r.0),
        }
    }

    /// For max/min nodes: which branch is active throughout the cell
    /// (`Some(true)` for the first), when decidable.
    fn branch(&self, cell: &Cell) -> Option<bool> {
        let (f, g, want_max) = match self {
            Expr::Max(f, g) => (f, g, true),
            Expr::Min(f, g) => (f, g, false),
            _ => return None,
        };
        if let (Some(a), Some(b)) = (f.range(cell), g.range(cell)) {
            if a.0 >= b.1 {
                return Some(want_max);
            }
            if b.0 >= a.1 {
                return Some(!want_max);
            }
        } else if let (Some(lo), Some(b)) = (f.lower_bound(cell), g.range(cell)) {
            // f unbounded above but bounded below
            if lo >= b.1 {
                return Some(want_max);
            }
        } else if let (Some(a), Some(lo)) = (f.range(cell), g.lower_bound(cell)) {
            if lo >= a.1 {
                return Some(!want_max);
            }
        }
        if let (Some(p), Some(q)) = (f.cell_poly(cell), g.cell_poly(cell)) {
            let (lo, hi) = p.sub(&q).range(cell, 8);
            if !lo.is_negative() {
                return Some(want_max);
            }
            if !hi.is_positive() {
                return Some(!want_max);
            }
        }
        None
    }

    /// Sup over the cell of `|∂^k f / ∂x_axis^k|`, valid when the cell
    /// interior holds no face or kink. `None` when no bound is known.
    pub fn deriv_bound(&self, axis: usize, k: u32, cell: &Cell) -> Option<f64> {
        if k == 0 {
            return self.range(cell).map(sup_abs);
        }
        match self {
            Expr::Atom(a) => a.deriv_bound(axis, k, cell),
            Expr::Sum(f, g) => Some(f.deriv_bound(axis, k, cell)? + g.deriv_bound(axis, k, cell)?),
            Expr::Neg(f) => f.deriv_bound(axis, k, cell),
            Expr::Product(f, g) => {
                let mut total = 0.0;
                for j in 0..=k {
                    total += binomial(k, j) * f.deriv_bound(axis, j, cell)? * g.deriv_bound(axis, k - j, cell)?;
                }
                Some(total)
            }
            Expr::Max(f, g) | Expr::Min(f, g) => {
                if self.branch(cell)? {
                    f.deriv_bound(axis, k, cell)
                } else {
                    g.deriv_bound(axis, k, cell)
                }
            }
            Expr::Tensor(f, g) => {
                let (l, r) = self.split(cell);
                if axis < l.len() {
                    Some(f.deriv_bound(axis, k, l)? * g.deriv_bound(0, 0, r)?)
                } else {
                    Some(f.deriv_bound(0, 0, l)? * g.deriv_bound(axis - l.len(), k, r)?)
                }
            }
            Expr::Shift(f, alpha) => f.deriv_bound(axis, k, &shift_cell(cell, alpha, -1)),
            Expr::Fix { inner, axis: fixed, value } => {
                let inner_axis = if axis >= *fixed { axis + 1 } else { axis };
                inner.deriv_bound(inner_axis, k, &insert_axis(cell, *fixed, value))
            }
        }
    }

    /// The polynomial agreeing with the function on the cell interior,
    /// when there is one.
    pub fn cell_poly(&self, cell: &Cell) -> Option<MultiPoly> {
        match self {
            Expr::Atom(a) => a.cell_poly(cell),
            Expr::Sum(f, g) => Some(f.cell_poly(cell)?.add(&g.cell_poly(cell)?)),
            Expr::Product(f, g) => Some(f.cell_poly(cell)?.mul(&g.cell_poly(cell)?)),
            Expr::Neg(f) => Some(f.cell_poly(cell)?.neg()),
            Expr::Max(f, g) | Expr::Min(f, g) => {
                if self.branch(cell)? {
                    f.cell_poly(cell)
                } else {
                    g.cell_poly(cell)
                }
            }
            Expr::Tensor(f, g) => {
                let (l, r) = self.split(cell);
                Some(f.cell_poly(l)?.mul(&g.cell_poly(r)?.shift_axes(l.len())))
            }
            Expr::Shift(f, alpha) => Some(f.cell_poly(&shift_cell(cell, alpha, -1))?.translate(alpha)),
            Expr::Fix { inner, axis, value } => {
                let p = inner.cell_poly(&insert_axis(cell, *axis, value))?;
                Some(p.fix(*axis, value).remove_axis(*axis))
            }
        }
    }

    /// Every breakpoint coordinate per axis inside the cell (faces and
    /// kinks), sorted, with the cell ends included.
    pub fn breakpoints(&self, cell: &Cell) -> Vec<Vec<Rational>> {
        let mut cuts: Vec<Vec<Rational>> = cell.iter().map(|(a, b)| vec![a.clone(), b.clone()]).collect();
        for face in self.faces(cell).into_iter().chain(self.kinks(cell)) {
            let (a, b) = &cell[face.axis];
            if &face.value > a && &face.value < b {
                cuts[face.axis].push(face.value);
            }
        }
        for c in cuts.iter_mut() {
            c.sort();
            c.dedup();
        }
        cuts
    }
}

fn dedup(v: &mut Vec<Face>) {
    let mut uniq: Vec<Face> = Vec::with_capacity(v.len());
    for f in v.drain(..) {
        if !uniq.contains(&f) {
            uniq.push(f);
        }
    }
    *v = uniq;
}

/// `1/√x` up to a clamp from below at a nonpositive level, which changes
/// nothing for `x > 0`.
fn is_inv_sqrt(e: &Expr) -> bool {
    match e {
        Expr::Atom(Atom::InvSqrt) => true,
        Expr::Max(a, b) => match (a.as_ref(), b.as_ref()) {
            (x, Expr::Atom(Atom::Const(c))) | (Expr::Atom(Atom::Const(c)), x) => !c.is_positive() && is_inv_sqrt(x),
            _ => false,
        },
        _ => false,
    }
}

/// Points strictly inside a 1D cell where two branches cross.
fn crossings(f: &Expr, g: &Expr, cell: &Cell) -> Vec<Rational> {
    let mut cuts = vec![cell[0].0.clone(), cell[0].1.clone()];
    for face in f.faces(cell).into_iter().chain(f.kinks(cell)).chain(g.faces(cell)).chain(g.kinks(cell)) {
        cuts.push(face.value);
    }
    cuts.sort();
    cuts.dedup();
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let sub = [(w[0].clone(), w[1].clone())];
        if let (Some(p), Some(q)) = (f.cell_poly(&sub), g.cell_poly(&sub)) {
            let d = p.sub(&q);
            if d.total_degree() == 1 {
                let c0 = d.terms().find(|(e, _)| e.is_empty()).map(|(_, c)| c.clone()).unwrap_or_default();
                let c1 = d.terms().find(|(e, _)| !e.is_empty()).map(|(_, c)| c.clone()).expect("degree one");
                let root = -c0 / c1;
                if root > w[0] && root < w[1] {
                    out.push(root);
                }
            }
            continue;
        }
        let pair = match (f, g) {
            (a, Expr::Atom(Atom::Const(c))) | (Expr::Atom(Atom::Const(c)), a) if is_inv_sqrt(a) => Some(c),
            _ => None,
        };
        if let Some(c) = pair {
            if c.is_positive() {
                let root = (c * c).recip();
                if root > w[0] && root < w[1] {
                    out.push(root);
                }
            }
        }
    }
    out
}

fn fmt_args(f: &mut fmt::Formatter<'_>, name: &str, a: &Expr, b: &Expr, sep: &str) -> fmt::Result {
    write!(f, "{name}({a}{sep}{b})")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Atom(a) => write!(f, "{a}"),
            Expr::Sum(a, b) => fmt_args(f, "sum", a, b, ","),
            Expr::Product(a, b) => fmt_args(f, "product", a, b, ","),
            Expr::Max(a, b) => fmt_args(f, "max", a, b, ","),
            Expr::Min(a, b) => fmt_args(f, "min", a, b, ","),
            Expr::Tensor(a, b) => fmt_args(f, "prod", a, b, ";"),
            Expr::Neg(a) => write!(f, "neg({a})"),
            Expr::Shift(a, alpha) => {
                write!(f, "shift({a},{})", alpha.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
            }
            Expr::Fix { inner, axis, value } => write!(f, "section({inner},{axis},{})", value),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn ex(x: Rational) -> Vec<Coord> {
        vec![Coord::Exact(x)]
    }

    #[test]
    fn dirichlet_and_thomae() {
        let d = Expr::atom(Atom::Dirichlet);
        assert_eq!(d.eval(&ex(rat(2, 3))), 1.0);
        assert_eq!(d.eval(&[Coord::Sampled(0.5)]), 0.0);
        let t = Expr::atom(Atom::Thomae);
        assert_eq!(t.eval_exact(&[rat(3, 4)]), Some(rat(1, 4)));
        assert_eq!(t.range(&[(rat(1, 5), rat(2, 5))]), Some((0.0, 1.0 / 3.0)));
        assert!(t.generic().eval_exact(&[rat(1, 2)]).unwrap().is_zero());
    }

    #[test]
    fn cos_power_values() {
        let c = Expr::atom(Atom::CosPower { m: 2, n: 3 });
        assert_eq!(c.eval_exact(&[rat(1, 2)]), Some(int(1)));
        assert_eq!(c.eval_exact(&[rat(1, 4)]), Some(int(0)));
        let r = c.range(&[(rat(1, 10), rat(1, 5))]).unwrap();
        assert!(r.0 <= r.1 && r.1 <= 1.0);
    }

    #[test]
    fn max_crossing_is_a_kink() {
        let f = Expr::Max(Box::new(Expr::atom(Atom::Poly(vec![int(0), int(1)]))), Box::new(Expr::constant(rat(1, 3))));
        let k = f.kinks(&[(int(0), int(1))]);
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].value, rat(1, 3));
        let p = f.cell_poly(&[(rat(1, 2), int(1))]).unwrap();
        assert_eq!(p.eval(&[rat(3, 4)]), rat(3, 4));
    }

    #[test]
    fn tensor_faces_lift() {
        let ind = Multirectangle::parse("[0,1/2]").unwrap();
        let f = Expr::Tensor(Box::new(Expr::atom(Atom::Indicator(ind))), Box::new(Expr::atom(Atom::Poly(vec![int(1)]))));
        let cell = [(int(0), int(1)), (int(0), int(2))];
        let faces = f.faces(&cell);
        assert_eq!(faces.len(), 2);
        assert!(faces.iter().all(|fc| fc.axis == 0 && fc.extent[1] == (int(0), int(2))));
    }

    #[test]
    fn inv_sqrt_truncation_is_bounded() {
        let f = Expr::Min(Box::new(Expr::atom(Atom::InvSqrt)), Box::new(Expr::constant(int(4))));
        assert_eq!(f.range(&[(int(0), int(1))]), Some((1.0, 4.0)));
        assert_eq!(f.kinks(&[(int(0), int(1))])[0].value, rat(1, 16));
        assert_eq!(f.eval_exact(&[rat(1, 4)]), Some(int(2)));
    }

    #[test]
    fn section_of_tensor() {
        let f = Expr::Tensor(Box::new(Expr::atom(Atom::Poly(vec![int(0), int(1)]))), Box::new(Expr::atom(Atom::Poly(vec![int(0), int(1)]))));
        let s = Expr::Fix { inner: Box::new(f), axis: 0, value: rat(1, 2) };
        assert_eq!(s.dim(), 1);
        assert_eq!(s.eval_exact(&[int(3)]), Some(rat(3, 2)));
        let p = s.cell_poly(&[(int(0), int(1))]).unwrap();
        assert_eq!(p.integrate_box(&[(int(0), int(1))]), rat(1, 4));
    }
}
