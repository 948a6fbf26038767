//! Exact rational numbers and the `"p/q"` text format used by every
//! interface of the crate.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary precision fraction, always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// `2^-k` as an exact rational.
pub fn pow2_inv(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

pub fn pow2(k: u32) -> Rational {
    Rational::from_integer(BigInt::one() << k)
}

/// Parses `"p/q"`, an integer, a decimal (`"0.125"`) or scientific
/// notation (`"1e-8"`). Decimals are converted exactly.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if let Some((p, q)) = s.split_once('/') {
        let num = parse_decimal(p.trim()).ok_or_else(|| ParseRationalError::Malformed(s.into()))?;
        let den = parse_decimal(q.trim()).ok_or_else(|| ParseRationalError::Malformed(s.into()))?;
        if den.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.into()));
        }
        return Ok(num / den);
    }
    parse_decimal(s).ok_or_else(|| ParseRationalError::Malformed(s.into()))
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = match digits.split_once('.') {
        Some((w, f)) => (w, f),
        None => (digits, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{whole}{frac}");
    let n = BigInt::from_str(if all.is_empty() { "0" } else { &all }).ok()?;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

/// Canonical `"p/q"` rendering; integers are written `"p/1"`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// Serializes as the `"p/q"` string.
pub fn serialize_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

pub fn serialize_opt_rational<S: serde::Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(v) => s.serialize_some(&format_rational(v)),
        None => s.serialize_none(),
    }
}

/// Exact value of a finite binary64 number.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

pub fn min(a: &Rational, b: &Rational) -> Rational {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// The rational in the closed interval `[lo, hi]` with the smallest
/// denominator (Stern-Brocot descent). Returns its denominator-minimal
/// representative; ties are broken toward the smallest numerator.
pub fn simplest_in(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo <= hi, "empty interval");
    let fl = lo.floor();
    if fl == *lo {
        return lo.clone();
    }
    if &(fl.clone() + Rational::one()) <= hi {
        return fl + Rational::one();
    }
    // lo and hi share the integer part and lo is not an integer.
    let lo_frac = lo - &fl;
    let hi_frac = hi - &fl;
    if hi_frac.is_zero() {
        return fl;
    }
    // 1/hi_frac <= 1/x <= 1/lo_frac
    let inner = simplest_in(&hi_frac.recip(), &lo_frac.recip());
    fl + inner.recip()
}

/// Euler totient, used to index the fixed enumeration of rationals.
pub fn totient(n: u64) -> u64 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// An extended-real endpoint. Infinite endpoints appear only in function
/// domains, never in multirectangles whose length is summed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Endpoint {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl Endpoint {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Endpoint::Finite(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Endpoint::Finite(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Endpoint::NegInf => f64::NEG_INFINITY,
            Endpoint::PosInf => f64::INFINITY,
            Endpoint::Finite(r) => to_f64(r),
        }
    }

    pub fn parse(text: &str) -> Result<Endpoint, ParseRationalError> {
        match text.trim() {
            "inf" | "+inf" | "∞" | "+∞" => Ok(Endpoint::PosInf),
            "-inf" | "-∞" => Ok(Endpoint::NegInf),
            other => parse_rational(other).map(Endpoint::Finite),
        }
    }
}

impl From<Rational> for Endpoint {
    fn from(r: Rational) -> Self {
        Endpoint::Finite(r)
    }
}

impl PartialOrd for Endpoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Endpoint {
    fn cmp(&self, other: &Self) -> Ordering {
        use Endpoint::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => cmp_rational(a, b),
        }
    }
}

/// Same order as `Ord for Rational`, by cross multiplication; much faster
/// than the continued-fraction comparison when denominators differ.
pub fn cmp_rational(a: &Rational, b: &Rational) -> Ordering {
    if a.denom() == b.denom() {
        return a.numer().cmp(b.numer());
    }
    (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::NegInf => write!(f, "-inf"),
            Endpoint::PosInf => write!(f, "inf"),
            Endpoint::Finite(r) => write!(f, "{}", format_rational(r)),
        }
    }
}

/// A length, area or volume: either an exact rational or `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Length {
    Finite(Rational),
    Infinite,
}

impl Length {
    pub fn zero() -> Self {
        Length::Finite(Rational::zero())
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Length::Finite(r) => Some(r),
            Length::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Length::Finite(r) => to_f64(r),
            Length::Infinite => f64::INFINITY,
        }
    }
}

impl PartialOrd for Length {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Length {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Length::Infinite, Length::Infinite) => Ordering::Equal,
            (Length::Infinite, _) => Ordering::Greater,
            (_, Length::Infinite) => Ordering::Less,
            (Length::Finite(a), Length::Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for Length {
    type Output = Length;
    fn add(self, rhs: Length) -> Length {
        match (self, rhs) {
            (Length::Finite(a), Length::Finite(b)) => Length::Finite(a + b),
            _ => Length::Infinite,
        }
    }
}

impl Mul for Length {
    type Output = Length;
    /// `0 · ∞ = 0`, the measure-theoretic convention.
    fn mul(self, rhs: Length) -> Length {
        match (self, rhs) {
            (Length::Finite(a), Length::Finite(b)) => Length::Finite(a * b),
            (Length::Finite(a), Length::Infinite) | (Length::Infinite, Length::Finite(a)) => {
                if a.is_zero() {
                    Length::zero()
                } else {
                    Length::Infinite
                }
            }
            (Length::Infinite, Length::Infinite) => Length::Infinite,
        }
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Length::Finite(r) => write!(f, "{}", format_rational(r)),
            Length::Infinite => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-1/8").unwrap(), rat(-1, 8));
        assert_eq!(parse_rational("6/8").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_rational("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(parse_rational("-2.5e1").unwrap(), int(-25));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rational(&rat(6, -8)), "-3/4");
        assert_eq!(format_rational(&int(0)), "0/1");
        assert_eq!(format_rational(&int(2)), "2/1");
    }

    #[test]
    fn simplest_rational_has_minimal_denominator() {
        assert_eq!(simplest_in(&rat(1, 3), &rat(1, 2)), rat(1, 2));
        assert_eq!(simplest_in(&rat(3, 10), &rat(4, 10)), rat(1, 3));
        assert_eq!(simplest_in(&rat(7, 10), &rat(7, 10)), rat(7, 10));
        assert_eq!(simplest_in(&rat(1, 5), &rat(1, 4)), rat(1, 4));
        assert_eq!(simplest_in(&rat(-3, 2), &rat(-1, 3)), int(-1));
        // brute force over small denominators
        for (a, b) in [(rat(5, 17), rat(6, 17)), (rat(11, 40), rat(12, 40)), (rat(2, 7), rat(3, 10))] {
            let s = simplest_in(&a, &b);
            let q = s.denom().clone();
            for d in 1..q.to_u64().unwrap() {
                let lo = (a.clone() * int(d as i64)).ceil();
                let hi = (b.clone() * int(d as i64)).floor();
                assert!(lo > hi, "denominator {d} fits in [{a},{b}]");
            }
        }
    }

    #[test]
    fn totient_small_values() {
        let expected = [1, 1, 2, 2, 4, 2, 6, 4, 6, 4];
        for (n, &t) in (1..=10).zip(expected.iter()) {
            assert_eq!(totient(n), t);
        }
    }

    #[test]
    fn length_arithmetic() {
        assert_eq!(Length::Finite(int(0)) * Length::Infinite, Length::zero());
        assert_eq!(Length::Finite(int(2)) + Length::Infinite, Length::Infinite);
        assert!(Length::Infinite > Length::Finite(int(10)));
    }
}
