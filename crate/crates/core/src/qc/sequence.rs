//! Sequences of quasicontinuous functions with a shared witness.

use std::fmt;

use num_traits::{One, Zero};

use super::dsl::{power, ramp, spike, trapezoid, wide_spike};
use super::expr::{factorial, Atom, Cell, Expr};
use super::{QcError, QcFunction, Witness};
use crate::rational::{int, parse_rational, pow2_inv, rat, Endpoint, Rational};
use crate::set::{Interval, Multirectangle, Rectangle, Topology};

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `n` on `(1/n, 2/n]`
    Spike,
    /// `1/n` on `(n, 2n]`
    WideSpike,
    /// travelling trapezoid centred at `n`
    Trapezoid,
    /// `x^n` on `[0,1]`
    Power,
    QnIndicator,
    /// `cos(m!πx)^{2n}` for fixed `m`
    CosPower(u32),
    /// `1_{[n,∞)}`
    TailIndicator,
    /// `x·1_{[0,1−1/n]}`
    Ramp,
    /// `1_{[0,1/2]}` and `1_{[1/2,1]}` in turn
    Alternating,
    Constant(Rational),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QcSequence {
    pub family: Family,
}

fn half_line(from: Rational, topo: Topology) -> Interval {
    Interval::new(Endpoint::Finite(from), Endpoint::PosInf, topo).expect("ordered")
}

fn unit() -> Rectangle {
    Rectangle::closed(&[(Rational::zero(), Rational::one())])
}

fn indicator(ivs: Vec<Interval>) -> Expr {
    Expr::atom(Atom::Indicator(Multirectangle::from_intervals(ivs)))
}

impl QcSequence {
    pub fn new(family: Family) -> QcSequence {
        QcSequence { family }
    }

    /// `spike`, `wide-spike`, `trapezoid`, `power`, `qn-indicator`,
    /// `cos-power:m`, `tail-indicator`, `ramp`, `alternating`, `constant:c`.
    pub fn parse(text: &str) -> Result<QcSequence, QcError> {
        let t = text.trim();
        let (name, param) = match t.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (t, None),
        };
        let family = match (name, param) {
            ("spike", None) => Family::Spike,
            ("wide-spike", None) => Family::WideSpike,
            ("trapezoid", None) => Family::Trapezoid,
            ("power", None) => Family::Power,
            ("qn-indicator", None) => Family::QnIndicator,
            ("tail-indicator", None) => Family::TailIndicator,
            ("ramp", None) => Family::Ramp,
            ("alternating", None) => Family::Alternating,
            ("cos-power", Some(m)) => {
                let m: u32 = m.trim().parse().map_err(|_| QcError::BadParams(format!("bad m {m:?}")))?;
                if m == 0 || m > 20 {
                    return Err(QcError::BadParams("m must lie in 1..=20".into()));
                }
                Family::CosPower(m)
            }
            ("constant" | "const", Some(c)) => Family::Constant(parse_rational(c).map_err(|_| QcError::BadParams(format!("bad constant {c:?}")))?),
            _ => return Err(QcError::UnknownName(t.to_string())),
        };
        Ok(QcSequence { family })
    }

    pub fn name(&self) -> String {
        match &self.family {
            Family::Spike => "spike".into(),
            Family::WideSpike => "wide-spike".into(),
            Family::Trapezoid => "trapezoid".into(),
            Family::Power => "power".into(),
            Family::QnIndicator => "qn-indicator".into(),
            Family::CosPower(m) => format!("cos-power:{m}"),
            Family::TailIndicator => "tail-indicator".into(),
            Family::Ramp => "ramp".into(),
            Family::Alternating => "alternating".into(),
            Family::Constant(c) => format!("constant:{}", c),
        }
    }

    pub fn domain(&self) -> Rectangle {
        match self.family {
            Family::WideSpike | Family::TailIndicator => Rectangle::new(vec![half_line(Rational::zero(), Topology::HalfOpenHi)]),
            Family::Trapezoid => Rectangle::new(vec![half_line(Rational::zero(), Topology::Open)]),
            _ => unit(),
        }
    }

    fn member_expr(&self, n: u32) -> Expr {
        match &self.family {
            Family::Spike => spike(n),
            Family::WideSpike => wide_spike(n),
            Family::Trapezoid => trapezoid(n),
            Family::Power => power(n),
            Family::QnIndicator => Expr::atom(Atom::Qn(n)),
            Family::CosPower(m) => Expr::atom(Atom::CosPower { m: *m, n }),
            Family::TailIndicator => indicator(vec![half_line(int(n as i64), Topology::HalfOpenHi)]),
            Family::Ramp => ramp(n),
            Family::Alternating => {
                if n.is_multiple_of(2) {
                    indicator(vec![Interval::closed(Rational::zero(), rat(1, 2))])
                } else {
                    indicator(vec![Interval::closed(rat(1, 2), Rational::one())])
                }
            }
            Family::Constant(c) => Expr::constant(c.clone()),
        }
    }

    /// Member `f_n`, `n ≥ 1`.
    pub fn member(&self, n: u32) -> QcFunction {
        assert!(n >= 1, "members are indexed from 1");
        QcFunction { expr: self.member_expr(n), domain: self.domain() }
    }

    /// The pointwise limit (the pointwise lim inf for `alternating`).
    pub fn limit(&self) -> QcFunction {
        let expr = match &self.family {
            Family::Spike | Family::WideSpike | Family::Trapezoid | Family::TailIndicator => Expr::constant(Rational::zero()),
            Family::Power => indicator(vec![Interval::point(Rational::one())]),
            Family::QnIndicator => Expr::atom(Atom::Dirichlet),
            Family::CosPower(m) => {
                let c = factorial(*m);
                let k_max = u64::try_from(&c).expect("m ≤ 20");
                let den = Rational::from_integer(c);
                indicator((0..=k_max).map(|k| Interval::point(Rational::from_integer(k.into()) / &den)).collect())
            }
            Family::Ramp => ramp(0),
            Family::Alternating => indicator(vec![Interval::point(rat(1, 2))]),
            Family::Constant(c) => Expr::constant(c.clone()),
        };
        QcFunction { expr, domain: self.domain() }
    }

    /// `∪_{n ≤ n_max} witness_n(ε/2^n)`, a witness of order `ε` for every
    /// member up to `n_max`.
    pub fn shared_witness(&self, cell: &Cell, eps: &Rational, n_max: u32) -> Result<Witness, QcError> {
        let mut w = Witness::empty(cell.len());
        for n in 1..=n_max {
            w = w.union(self.member(n).witness_on(cell, &(eps * pow2_inv(n)))?);
        }
        Ok(w)
    }

    /// Face and kink coordinates of the first `n_max` members and of the
    /// limit inside the cell.
    pub fn breakpoints(&self, cell: &Cell, n_max: u32) -> Vec<Rational> {
        let mut out = Vec::new();
        let mut take = |e: &Expr| {
            for f in e.faces(cell).into_iter().chain(e.kinks(cell)) {
                out.push(f.value);
            }
        };
        for n in 1..=n_max {
            take(&self.member_expr(n));
        }
        take(&self.limit().expr);
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for QcSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qc::Coord;

    #[test]
    fn members_and_limits() {
        let s = QcSequence::parse("spike").unwrap();
        assert_eq!(s.member(4).eval_exact(&[rat(3, 8)]), Some(int(4)));
        assert_eq!(s.limit().eval_exact(&[rat(3, 8)]), Some(int(0)));
        let p = QcSequence::parse("power").unwrap();
        assert_eq!(p.limit().eval_exact(&[int(1)]), Some(int(1)));
        let c = QcSequence::parse("cos-power:2").unwrap();
        assert_eq!(c.limit().eval_exact(&[rat(1, 2)]), Some(int(1)));
        assert_eq!(c.limit().eval_exact(&[rat(1, 3)]), Some(int(0)));
        let q = QcSequence::parse("qn-indicator").unwrap();
        assert_eq!(q.limit().eval(&[Coord::Exact(rat(5, 9))]), 1.0);
        let a = QcSequence::parse("alternating").unwrap();
        assert_eq!(a.member(2).eval_exact(&[rat(1, 4)]), Some(int(1)));
        assert_eq!(a.member(3).eval_exact(&[rat(1, 4)]), Some(int(0)));
        assert!(QcSequence::parse("bogus").is_err());
    }

    #[test]
    fn qn_members_count_points() {
        let q = QcSequence::parse("qn-indicator").unwrap();
        let grid: Vec<Rational> = (0..=720).map(|k| rat(k, 720)).collect();
        for n in [1u32, 5, 12] {
            let f = q.member(n);
            let hits = grid.iter().filter(|x| f.eval_exact(&[(*x).clone()]) == Some(int(1))).count();
            assert_eq!(hits, n as usize);
        }
    }

    #[test]
    fn shared_witness_budget() {
        let s = QcSequence::parse("spike").unwrap();
        let cell = [(int(0), int(1))];
        let w = s.shared_witness(&cell, &rat(1, 8), 40).unwrap();
        assert!(w.length() < rat(1, 8));
    }
}
