use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::SetError;
use crate::rational::{Endpoint, Length, Rational};

/// Which endpoints belong to an interval. Length never depends on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// `(a, b)`
    Open,
    /// `[a, b]`
    Closed,
    /// `(a, b]`
    HalfOpenLo,
    /// `[a, b)`
    HalfOpenHi,
}

impl Topology {
    pub fn from_flags(lo_closed: bool, hi_closed: bool) -> Topology {
        match (lo_closed, hi_closed) {
            (true, true) => Topology::Closed,
            (false, false) => Topology::Open,
            (false, true) => Topology::HalfOpenLo,
            (true, false) => Topology::HalfOpenHi,
        }
    }

    pub fn lo_closed(self) -> bool {
        matches!(self, Topology::Closed | Topology::HalfOpenHi)
    }

    pub fn hi_closed(self) -> bool {
        matches!(self, Topology::Closed | Topology::HalfOpenLo)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Endpoint,
    hi: Endpoint,
    topology: Topology,
}

impl Interval {
    /// Infinite endpoints are always treated as excluded, whatever the tag.
    pub fn new(lo: Endpoint, hi: Endpoint, topology: Topology) -> Result<Interval, SetError> {
        if lo > hi || lo == Endpoint::PosInf || hi == Endpoint::NegInf {
            return Err(SetError::InvertedInterval(format!("{lo} > {hi}")));
        }
        let topology = Topology::from_flags(topology.lo_closed() && lo.is_finite(), topology.hi_closed() && hi.is_finite());
        Ok(Interval { lo, hi, topology })
    }

    pub fn open(lo: Rational, hi: Rational) -> Interval {
        Self::new(lo.into(), hi.into(), Topology::Open).expect("lo <= hi")
    }

    pub fn closed(lo: Rational, hi: Rational) -> Interval {
        Self::new(lo.into(), hi.into(), Topology::Closed).expect("lo <= hi")
    }

    pub fn point(x: Rational) -> Interval {
        Self::closed(x.clone(), x)
    }

    pub fn real_line() -> Interval {
        Interval { lo: Endpoint::NegInf, hi: Endpoint::PosInf, topology: Topology::Open }
    }

    pub fn lo(&self) -> &Endpoint {
        &self.lo
    }

    pub fn hi(&self) -> &Endpoint {
        &self.hi
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn with_topology(&self, topology: Topology) -> Interval {
        Self::new(self.lo.clone(), self.hi.clone(), topology).expect("same endpoints")
    }

    /// Finite endpoints, or `None` for a side extending to infinity.
    pub fn bounds(&self) -> Option<(&Rational, &Rational)> {
        Some((self.lo.finite()?, self.hi.finite()?))
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn length(&self) -> Length {
        match self.bounds() {
            Some((a, b)) => Length::Finite(b - a),
            None => Length::Infinite,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// True when the point set is empty: `(a, a)`, `[a, a)`, `(a, a]`.
    pub fn is_empty(&self) -> bool {
        self.lo == self.hi && self.topology != Topology::Closed
    }

    /// Open as a subset of the line: every finite endpoint excluded.
    pub fn is_open(&self) -> bool {
        !self.topology.lo_closed() && !self.topology.hi_closed()
    }

    /// Closed as a subset of the line: every finite endpoint included.
    pub fn is_closed(&self) -> bool {
        (!self.lo.is_finite() || self.topology.lo_closed()) && (!self.hi.is_finite() || self.topology.hi_closed())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = match &self.lo {
            Endpoint::NegInf => true,
            Endpoint::Finite(a) => {
                if self.topology.lo_closed() {
                    x >= a
                } else {
                    x > a
                }
            }
            Endpoint::PosInf => false,
        };
        let below = match &self.hi {
            Endpoint::PosInf => true,
            Endpoint::Finite(b) => {
                if self.topology.hi_closed() {
                    x <= b
                } else {
                    x < b
                }
            }
            Endpoint::NegInf => false,
        };
        above && below
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        let (a, b) = (self.lo.to_f64(), self.hi.to_f64());
        let above = if self.topology.lo_closed() { x >= a } else { x > a };
        let below = if self.topology.hi_closed() { x <= b } else { x < b };
        above && below
    }

    pub fn closure(&self) -> Interval {
        self.with_topology(Topology::Closed)
    }

    pub fn interior(&self) -> Interval {
        self.with_topology(Topology::Open)
    }

    /// Point-set intersection, `None` when empty.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            std::cmp::Ordering::Greater => (self.lo.clone(), self.topology.lo_closed()),
            std::cmp::Ordering::Less => (other.lo.clone(), other.topology.lo_closed()),
            std::cmp::Ordering::Equal => (self.lo.clone(), self.topology.lo_closed() && other.topology.lo_closed()),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            std::cmp::Ordering::Less => (self.hi.clone(), self.topology.hi_closed()),
            std::cmp::Ordering::Greater => (other.hi.clone(), other.topology.hi_closed()),
            std::cmp::Ordering::Equal => (self.hi.clone(), self.topology.hi_closed() && other.topology.hi_closed()),
        };
        if lo > hi || (lo == hi && !(lo_closed && hi_closed)) {
            return None;
        }
        Interval::new(lo, hi, Topology::from_flags(lo_closed, hi_closed)).ok()
    }

    /// `x` clamped into the closure; used for nearest-point projections.
    pub fn clamp(&self, x: &Rational) -> Rational {
        if let Endpoint::Finite(a) = &self.lo {
            if x < a {
                return a.clone();
            }
        }
        if let Endpoint::Finite(b) = &self.hi {
            if x > b {
                return b.clone();
            }
        }
        x.clone()
    }

    /// Distance from `x` to the closure.
    pub fn distance(&self, x: &Rational) -> Rational {
        let c = self.clamp(x);
        let d = x - c;
        if d < Rational::zero() {
            -d
        } else {
            d
        }
    }

    pub fn midpoint(&self) -> Option<Rational> {
        let (a, b) = self.bounds()?;
        Some((a + b) / Rational::from_integer(2.into()))
    }

    pub fn f64_bounds(&self) -> (f64, f64) {
        (self.lo.to_f64(), self.hi.to_f64())
    }

    /// Parses `(a,b)`, `[a,b]`, `(a,b]` or `[a,b)`; endpoints may be
    /// `p/q`, decimals or `±inf`.
    pub fn parse(text: &str) -> Result<Interval, SetError> {
        let s = text.trim();
        let bad = || SetError::Parse(format!("bad interval literal `{s}`"));
        if s.len() < 5 {
            return Err(bad());
        }
        let lo_closed = match s.as_bytes()[0] {
            b'[' => true,
            b'(' => false,
            _ => return Err(bad()),
        };
        let hi_closed = match s.as_bytes()[s.len() - 1] {
            b']' => true,
            b')' => false,
            _ => return Err(bad()),
        };
        let (a, b) = s[1..s.len() - 1].split_once(',').ok_or_else(bad)?;
        let lo = Endpoint::parse(a).map_err(|e| SetError::Parse(e.to_string()))?;
        let hi = Endpoint::parse(b).map_err(|e| SetError::Parse(e.to_string()))?;
        Interval::new(lo, hi, Topology::from_flags(lo_closed, hi_closed))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.topology.lo_closed() { '[' } else { '(' };
        let r = if self.topology.hi_closed() { ']' } else { ')' };
        write!(f, "{l}{},{}{r}", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn length_ignores_topology() {
        let a = Interval::open(int(0), int(1));
        for t in [Topology::Open, Topology::Closed, Topology::HalfOpenLo, Topology::HalfOpenHi] {
            assert_eq!(a.with_topology(t).length(), Length::Finite(int(1)));
        }
    }

    #[test]
    fn membership_respects_topology() {
        let half = Interval::parse("(0,1]").unwrap();
        assert!(!half.contains(&int(0)));
        assert!(half.contains(&int(1)));
        assert!(half.contains(&rat(1, 2)));
        let ray = Interval::parse("[2,inf)").unwrap();
        assert!(ray.contains(&int(1000)));
        assert!(!ray.contains(&int(1)));
        assert_eq!(ray.length(), Length::Infinite);
        assert!(ray.is_closed());
    }

    #[test]
    fn intersection_cases() {
        let a = Interval::parse("[0,1]").unwrap();
        let b = Interval::parse("(1,2)").unwrap();
        assert!(a.intersect(&b).is_none());
        let c = Interval::parse("[1,2)").unwrap();
        assert_eq!(a.intersect(&c).unwrap(), Interval::point(int(1)));
        let d = Interval::parse("(1/2,3)").unwrap();
        assert_eq!(a.intersect(&d).unwrap().to_string(), "(1/2,1/1]");
    }

    #[test]
    fn rejects_inverted() {
        assert!(Interval::parse("[2,1]").is_err());
        assert!(Interval::parse("[0,1").is_err());
    }

    #[test]
    fn display_round_trip() {
        for s in ["(-1/8,3/4]", "[0/1,inf)", "(-inf,inf)"] {
            assert_eq!(Interval::parse(s).unwrap().to_string(), s);
        }
    }
}
