//! Quasicontinuous functions: an evaluator, a domain and a witness map
//! `ε ↦ Δ_ε` built structurally from the expression.

pub mod dsl;
pub mod expr;
pub mod pieces;
pub mod poly;
pub mod sequence;
pub mod witness;

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

pub use expr::{Atom, Cell, Coord, Exceptional, Expr, Face};
pub use sequence::{Family, QcSequence};
pub use witness::{RationalCover, Witness};

use crate::rational::{Endpoint, Rational};
use crate::set::{Interval, Rectangle};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QcError {
    #[error("unknown function {0:?}")]
    UnknownName(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("set descriptor is not a characteristic function")]
    NotCharacteristic,
    #[error("no witness within the requested budget")]
    WitnessBudgetExceeded,
    #[error("domain is unbounded")]
    UnboundedDomain,
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    /// `max{f, N}`
    Plus,
    /// `min{f, N}`
    Minus,
}

/// `max{f,N}` or `min{f,N}`; `None` stands for the infinite level, which
/// leaves `f` unchanged.
pub fn truncate_expr(f: Expr, mode: Truncation, level: Option<Rational>) -> Expr {
    let Some(n) = level else { return f };
    let c = Box::new(Expr::constant(n));
    match mode {
        Truncation::Plus => Expr::Max(Box::new(f), c),
        Truncation::Minus => Expr::Min(Box::new(f), c),
    }
}

/// Whether the expression takes only the values 0 and 1.
pub fn is_characteristic(e: &Expr) -> bool {
    match e {
        Expr::Atom(Atom::Indicator(_) | Atom::Dirichlet | Atom::Qn(_)) => true,
        Expr::Atom(Atom::Const(c)) => c.is_zero() || c.is_one(),
        Expr::Product(f, g) | Expr::Max(f, g) | Expr::Min(f, g) | Expr::Tensor(f, g) => is_characteristic(f) && is_characteristic(g),
        Expr::Shift(f, _) | Expr::Fix { inner: f, .. } => is_characteristic(f),
        _ => false,
    }
}

/// A quasicontinuous function on a rectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct QcFunction {
    pub expr: Expr,
    pub domain: Rectangle,
}

fn default_domain(e: &Expr) -> Rectangle {
    let unit = || Interval::closed(Rational::zero(), Rational::one());
    match e {
        Expr::Atom(Atom::Dirichlet | Atom::Thomae | Atom::Qn(_) | Atom::CosPower { .. }) => Rectangle::new(vec![unit()]),
        Expr::Atom(Atom::Pieces { label, pw }) if label.starts_with("step:") => {
            let jumps = pw.jumps();
            let (lo, hi) = (jumps.first().cloned(), pw.jumps().last().cloned());
            match (lo, hi) {
                (Some(a), Some(b)) if a < b => Rectangle::new(vec![Interval::closed(a, b)]),
                _ => Rectangle::whole_space(1),
            }
        }
        Expr::Atom(Atom::Pieces { label, .. }) if label.starts_with("trapezoid:") => {
            Rectangle::new(vec![Interval::new(Endpoint::Finite(Rational::zero()), Endpoint::PosInf, crate::set::Topology::Open).expect("ordered")])
        }
        Expr::Atom(Atom::Pieces { label, .. }) if label.starts_with("spike:") => {
            Rectangle::new(vec![Interval::closed(Rational::zero(), Rational::from_integer(2.into()))])
        }
        Expr::Atom(Atom::Pieces { label, .. }) if label.starts_with("ramp") => Rectangle::new(vec![unit()]),
        Expr::Atom(Atom::InvSqrt) => Rectangle::new(vec![Interval::new(
            Endpoint::Finite(Rational::zero()),
            Endpoint::Finite(Rational::one()),
            crate::set::Topology::HalfOpenLo,
        )
        .expect("ordered")]),
        _ => Rectangle::whole_space(e.dim()),
    }
}

/// Intersection of two domains (as closed sets of the same dimension).
fn meet(a: &Rectangle, b: &Rectangle) -> Result<Rectangle, QcError> {
    if a.dim() != b.dim() {
        return Err(QcError::DomainMismatch(format!("dimensions {} and {}", a.dim(), b.dim())));
    }
    a.intersect(b).ok_or_else(|| QcError::DomainMismatch(format!("domains {a} and {b} are disjoint")))
}

fn domain_of(e: &Expr) -> Result<Rectangle, QcError> {
    match e {
        Expr::Atom(_) => Ok(default_domain(e)),
        Expr::Sum(f, g) | Expr::Product(f, g) | Expr::Max(f, g) | Expr::Min(f, g) => {
            let (df, dg) = (domain_of(f)?, domain_of(g)?);
            match (f.raw_dim(), g.raw_dim()) {
                (0, _) => Ok(dg),
                (_, 0) => Ok(df),
                _ => meet(&df, &dg),
            }
        }
        Expr::Neg(f) => domain_of(f),
        Expr::Tensor(f, g) => Ok(domain_of(f)?.product(&domain_of(g)?)),
        Expr::Shift(f, alpha) => {
            let d = domain_of(f)?;
            let sides = d
                .sides()
                .iter()
                .zip(alpha)
                .map(|(s, a)| {
                    let mv = |e: &Endpoint| match e {
                        Endpoint::Finite(v) => Endpoint::Finite(v + a),
                        other => other.clone(),
                    };
                    Interval::new(mv(s.lo()), mv(s.hi()), s.topology()).expect("translation keeps order")
                })
                .collect();
            Ok(Rectangle::new(sides))
        }
        Expr::Fix { inner, axis, .. } => Ok(domain_of(inner)?.drop_axis(*axis)),
    }
}

impl QcFunction {
    pub fn new(expr: Expr, domain: Rectangle) -> Result<QcFunction, QcError> {
        if domain.dim() != expr.dim() {
            return Err(QcError::DomainMismatch(format!("function has dimension {}, domain {}", expr.dim(), domain.dim())));
        }
        Ok(QcFunction { expr, domain })
    }

    /// Wraps an expression with its natural domain.
    pub fn from_expr(expr: Expr) -> Result<QcFunction, QcError> {
        let domain = domain_of(&expr)?;
        QcFunction::new(expr, domain)
    }

    pub fn parse(text: &str) -> Result<QcFunction, QcError> {
        let f = QcFunction::from_expr(dsl::parse_expr(text)?)?;
        if text.trim().starts_with("power:") {
            return f.with_domain(Rectangle::closed(&[(Rational::zero(), Rational::one())]));
        }
        Ok(f)
    }

    pub fn name(&self) -> String {
        self.expr.to_string()
    }

    pub fn dim(&self) -> usize {
        self.expr.dim()
    }

    pub fn eval(&self, x: &[Coord]) -> f64 {
        self.expr.eval(x)
    }

    pub fn eval_exact(&self, x: &[Rational]) -> Option<Rational> {
        self.expr.eval_exact(x)
    }

    /// The domain clipped to a bounded closed box.
    pub fn region_within(&self, bx: &[(Rational, Rational)]) -> Result<Vec<(Rational, Rational)>, QcError> {
        let clipped = self
            .domain
            .closure()
            .intersect(&Rectangle::closed(bx))
            .ok_or_else(|| QcError::DomainMismatch("integration box misses the domain".into()))?;
        clipped.rational_bounds().ok_or(QcError::UnboundedDomain)
    }

    pub fn bounded_domain(&self) -> Result<Vec<(Rational, Rational)>, QcError> {
        self.domain.closure().rational_bounds().ok_or(QcError::UnboundedDomain)
    }

    /// Witness of order `eps` over the (bounded) domain.
    pub fn witness(&self, eps: &Rational) -> Result<Witness, QcError> {
        self.witness_on(&self.bounded_domain()?, eps)
    }

    pub fn witness_on(&self, cell: &Cell, eps: &Rational) -> Result<Witness, QcError> {
        witness::build(&self.expr, cell, eps)
    }

    /// `sup |f|` on a closed box, when known.
    pub fn bound_on(&self, cell: &Cell) -> Option<f64> {
        self.expr.range(cell).map(|(a, b)| a.abs().max(b.abs()))
    }

    pub fn is_characteristic(&self) -> bool {
        is_characteristic(&self.expr)
    }

    /// Same function, evaluated with its exceptional atoms removed.
    pub fn generic(&self) -> QcFunction {
        QcFunction { expr: self.expr.generic(), domain: self.domain.clone() }
    }

    pub fn with_domain(&self, domain: Rectangle) -> Result<QcFunction, QcError> {
        QcFunction::new(self.expr.clone(), domain)
    }
}

impl fmt::Display for QcFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}", self.expr, self.domain)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineOp {
    Sum,
    Product,
    Max,
    Min,
}

/// `f op g` on the common part of the two domains; the witness of the
/// result at `ε` is the union of the operands' witnesses at `ε/2`.
pub fn combine(op: CombineOp, f: &QcFunction, g: &QcFunction) -> Result<QcFunction, QcError> {
    let domain = meet(&f.domain, &g.domain)?;
    let (a, b) = (Box::new(f.expr.clone()), Box::new(g.expr.clone()));
    let expr = match op {
        CombineOp::Sum => Expr::Sum(a, b),
        CombineOp::Product => Expr::Product(a, b),
        CombineOp::Max => Expr::Max(a, b),
        CombineOp::Min => Expr::Min(a, b),
    };
    QcFunction::new(expr, domain)
}

/// `max{f,N}` (plus) or `min{f,N}` (minus); the witness is that of `f`.
pub fn truncate(f: &QcFunction, mode: Truncation, level: Option<Rational>) -> QcFunction {
    QcFunction { expr: truncate_expr(f.expr.clone(), mode, level), domain: f.domain.clone() }
}

/// `f·1_A` on the domain of `f`.
pub fn restrict_to_set(f: &QcFunction, a: &QcFunction) -> Result<QcFunction, QcError> {
    if !a.is_characteristic() {
        return Err(QcError::NotCharacteristic);
    }
    if f.dim() != a.dim() {
        return Err(QcError::DomainMismatch(format!("dimensions {} and {}", f.dim(), a.dim())));
    }
    QcFunction::new(Expr::Product(Box::new(f.expr.clone()), Box::new(a.expr.clone())), f.domain.clone())
}

/// A catalog entry by name and parameters, e.g. `catalog("spike", &[4])`.
pub fn catalog(name: &str, params: &[Rational]) -> Result<QcFunction, QcError> {
    let text = if params.is_empty() {
        name.to_string()
    } else {
        format!("{name}:{}", params.iter().map(crate::rational::format_rational).collect::<Vec<_>>().join(","))
    };
    QcFunction::parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, pow2_inv, rat};

    #[test]
    fn catalog_examples() {
        let d = catalog("dirichlet", &[]).unwrap();
        assert_eq!(d.eval(&[Coord::Exact(rat(2, 3))]), 1.0);
        assert_eq!(d.eval(&[Coord::Sampled(std::f64::consts::FRAC_1_SQRT_2)]), 0.0);
        let t = catalog("thomae", &[]).unwrap();
        assert_eq!(t.eval_exact(&[rat(3, 4)]), Some(rat(1, 4)));
        let s = catalog("spike", &[int(4)]).unwrap();
        assert_eq!(s.eval_exact(&[rat(3, 8)]), Some(int(4)));
        assert_eq!(s.domain, Rectangle::closed(&[(int(0), int(2))]));
        assert!(catalog("nope", &[]).is_err());
    }

    #[test]
    fn every_catalog_witness_is_within_budget() {
        let names = [
            "dirichlet",
            "thomae",
            "qn-indicator:5",
            "cos-power:2,3",
            "spike:3",
            "wide-spike:2",
            "trapezoid:4",
            "step:0,1/2,1,2,5",
            "poly:1,2,3",
            "power:4",
            "indicator:[0,1/3]|(1/2,3/4)",
            "exp-abs-y",
            "const:2",
            "inv-sqrt",
            "sum(dirichlet,step:0,1/2,1,2,5)",
        ];
        for name in names {
            let f = QcFunction::parse(name).unwrap();
            let cell: Vec<(Rational, Rational)> = (0..f.dim()).map(|_| (int(-1), int(3))).collect();
            for k in 0..=20 {
                let eps = pow2_inv(k);
                let w = f.witness_on(&cell, &eps).unwrap();
                assert!(w.length() < eps, "{name} at 2^-{k}");
            }
        }
    }

    #[test]
    fn combine_and_truncate() {
        let one = QcFunction::parse("const:1").unwrap();
        let two = QcFunction::parse("const:2").unwrap();
        let m = combine(CombineOp::Max, &one, &two).unwrap();
        assert_eq!(m.eval_exact(&[int(5)]), Some(int(2)));
        assert!(m.witness_on(&[(int(0), int(1))], &rat(1, 4)).unwrap().length().is_zero());
        let d = QcFunction::parse("dirichlet").unwrap();
        let nd = QcFunction::parse("neg(dirichlet)").unwrap();
        let s = combine(CombineOp::Sum, &d, &nd).unwrap();
        assert_eq!(s.eval_exact(&[rat(1, 3)]), Some(int(0)));
        let id = QcFunction::new(dsl::power(1), Rectangle::closed(&[(int(0), int(2))])).unwrap();
        assert_eq!(truncate(&id, Truncation::Plus, Some(int(1))).eval_exact(&[int(0)]), Some(int(1)));
        assert_eq!(truncate(&id, Truncation::Plus, None), id);
        let plane = QcFunction::parse("exp-abs-y").unwrap();
        assert!(matches!(combine(CombineOp::Sum, &id, &plane), Err(QcError::DomainMismatch(_))));
    }

    #[test]
    fn restriction() {
        let id = QcFunction::parse("id").unwrap();
        let svc = QcFunction::parse("indicator:[0,5/32]|[7/32,3/8]|[5/8,25/32]|[27/32,1]").unwrap();
        let r = restrict_to_set(&id, &svc).unwrap();
        assert_eq!(r.eval_exact(&[rat(1, 2)]), Some(int(0)));
        assert_eq!(r.eval_exact(&[rat(7, 8)]), Some(rat(7, 8)));
        assert_eq!(restrict_to_set(&id, &id).unwrap_err(), QcError::NotCharacteristic);
    }
}
