//! Ternary Cantor and Smith–Volterra–Cantor constructions, exact
//! membership for rationals, and countable covers of rational points.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{format_rational, int, pow2_inv, Rational};
use crate::set::{Interval, Multirectangle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CantorKind {
    Ternary,
    SmithVolterra,
}

impl FromStr for CantorKind {
    type Err = CantorError;
    fn from_str(s: &str) -> Result<CantorKind, CantorError> {
        match s {
            "ternary" => Ok(CantorKind::Ternary),
            "svc" | "smith-volterra" => Ok(CantorKind::SmithVolterra),
            other => Err(CantorError::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for CantorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CantorKind::Ternary => "ternary",
            CantorKind::SmithVolterra => "svc",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CantorError {
    #[error("stage index must be at least 1")]
    BadStage,
    #[error("point {0} lies outside [0,1]")]
    OutOfDomain(String),
    #[error("unknown Cantor kind `{0}`")]
    UnknownKind(String),
    #[error("membership of {point} undecided after {depth} stages")]
    Undecided { point: String, depth: u32 },
}

impl CantorKind {
    /// Length of each middle interval removed at stage `j`.
    pub fn gap_length(self, j: u32) -> Rational {
        let base: i64 = match self {
            CantorKind::Ternary => 3,
            CantorKind::SmithVolterra => 4,
        };
        Rational::new(BigInt::one(), BigInt::from(base).pow(j))
    }

    /// `λ(C_j) = 2^{j−1} · gap_length(j)`.
    pub fn stage_removed(self, j: u32) -> Rational {
        self.gap_length(j) * Rational::from_integer(BigInt::one() << (j - 1))
    }

    /// `λ(C_1 ∪ … ∪ C_J)`, summed stage by stage.
    pub fn removed_measure(self, stages: u32) -> Rational {
        (1..=stages).map(|j| self.stage_removed(j)).fold(Rational::zero(), |a, b| a + b)
    }

    /// Measure of the limit set `[0,1] ∖ ∪ C_j`.
    pub fn limit_measure(self) -> Rational {
        match self {
            CantorKind::Ternary => Rational::zero(),
            CantorKind::SmithVolterra => Rational::new(1.into(), 2.into()),
        }
    }
}

#[derive(Clone, Debug)]
enum Endpoints {
    /// Numerators over a common denominator.
    Scaled {
        pairs: Vec<(i128, i128)>,
        denom: i128,
    },
    Exact(Vec<(Rational, Rational)>),
}

/// The sets after stage `j`: `removed = C_1 ∪ … ∪ C_j` (open, disjoint,
/// sorted) and `retained = D_j` (closed, disjoint, `2^j` components).
///
/// Endpoints are kept as integers over a common denominator; the
/// multirectangle views are built on first use.
#[derive(Clone, Debug)]
pub struct CantorStage {
    pub kind: CantorKind,
    pub j: u32,
    endpoints: Endpoints,
    measure_removed: Rational,
    removed: OnceLock<Multirectangle>,
    retained: OnceLock<Multirectangle>,
}

impl CantorStage {
    pub fn measure_removed(&self) -> Rational {
        self.measure_removed.clone()
    }

    pub fn measure_retained(&self) -> Rational {
        Rational::one() - &self.measure_removed
    }

    /// Number of retained components, `2^j`.
    pub fn components(&self) -> usize {
        match &self.endpoints {
            Endpoints::Scaled { pairs, .. } => pairs.len(),
            Endpoints::Exact(pairs) => pairs.len(),
        }
    }

    /// Retained endpoints as `(numerators, denominator)`, when they fit
    /// in `i128`.
    pub fn scaled(&self) -> Option<(&[(i128, i128)], i128)> {
        match &self.endpoints {
            Endpoints::Scaled { pairs, denom } => Some((pairs, *denom)),
            Endpoints::Exact(_) => None,
        }
    }

    fn pairs(&self) -> Vec<(Rational, Rational)> {
        match &self.endpoints {
            Endpoints::Scaled { pairs, denom } => pairs.iter().map(|&(a, b)| (ratio(a, *denom), ratio(b, *denom))).collect(),
            Endpoints::Exact(pairs) => pairs.clone(),
        }
    }

    pub fn removed(&self) -> &Multirectangle {
        self.removed.get_or_init(|| {
            let pairs = self.pairs();
            Multirectangle::from_intervals(pairs.windows(2).map(|w| Interval::open(w[0].1.clone(), w[1].0.clone())).collect())
        })
    }

    pub fn retained(&self) -> &Multirectangle {
        self.retained.get_or_init(|| Multirectangle::from_intervals(self.pairs().into_iter().map(|(a, b)| Interval::closed(a, b)).collect()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind.to_string(),
            "stage": self.j,
            "removed": self.removed().intervals().map(|i| i.to_string()).collect::<Vec<_>>(),
            "retained": self.retained().intervals().map(|i| i.to_string()).collect::<Vec<_>>(),
            "measureRemoved": format_rational(&self.measure_removed()),
            "measureRetained": format_rational(&self.measure_retained()),
        })
    }
}

/// Retained closed intervals `D_j` as endpoint pairs.
pub fn retained_pairs(kind: CantorKind, j: u32) -> Vec<(Rational, Rational)> {
    let mut pieces = vec![(Rational::zero(), Rational::one())];
    let two = int(2);
    for stage in 1..=j {
        let half_gap = kind.gap_length(stage) / &two;
        pieces = pieces
            .into_iter()
            .flat_map(|(a, b)| {
                let mid = (&a + &b) / &two;
                [(a, &mid - &half_gap), (&mid + &half_gap, b)]
            })
            .collect();
    }
    pieces
}

/// Retained endpoints as numerators over a common denominator
/// `2^{j+1}·base^j`, or `None` when that overflows.
fn scaled_pairs(kind: CantorKind, j: u32) -> Option<(Vec<(i128, i128)>, i128)> {
    let base: i128 = match kind {
        CantorKind::Ternary => 3,
        CantorKind::SmithVolterra => 4,
    };
    let d = 2i128.checked_pow(j + 1)?.checked_mul(base.checked_pow(j)?)?;
    let mut pieces = vec![(0i128, d)];
    for stage in 1..=j {
        let half_gap = d / (2 * base.pow(stage));
        let mut next = Vec::with_capacity(2 * pieces.len());
        for (a, b) in pieces {
            let mid = (a + b) / 2;
            next.push((a, mid - half_gap));
            next.push((mid + half_gap, b));
        }
        pieces = next;
    }
    Some((pieces, d))
}

/// `n/d` in lowest terms for `d = 2^a·3^b`.
fn ratio(n: i128, d: i128) -> Rational {
    if n == 0 {
        return Rational::zero();
    }
    let tz = n.trailing_zeros().min(d.trailing_zeros());
    let (mut n, mut d) = (n >> tz, d >> tz);
    while n % 3 == 0 && d % 3 == 0 {
        n /= 3;
        d /= 3;
    }
    Rational::new_raw(BigInt::from(n), BigInt::from(d))
}

pub fn build_stage(kind: CantorKind, j: u32) -> Result<CantorStage, CantorError> {
    if j == 0 {
        return Err(CantorError::BadStage);
    }
    let (endpoints, measure_removed) = match scaled_pairs(kind, j) {
        Some((pairs, denom)) => {
            let kept: i128 = pairs.iter().map(|(a, b)| b - a).sum();
            (Endpoints::Scaled { pairs, denom }, ratio(denom - kept, denom))
        }
        None => {
            let pairs = retained_pairs(kind, j);
            let kept = pairs.iter().fold(Rational::zero(), |acc, (a, b)| acc + (b - a));
            (Endpoints::Exact(pairs), Rational::one() - kept)
        }
    };
    Ok(CantorStage { kind, j, endpoints, measure_removed, removed: OnceLock::new(), retained: OnceLock::new() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    InComplementOpenSet,
    InLimitSet,
}

/// Stage at which a point is removed, or `None` for the limit set.
pub fn removal_stage(kind: CantorKind, x: &Rational, max_depth: u32) -> Result<Option<u32>, CantorError> {
    if x.is_negative() || x > &Rational::one() {
        return Err(CantorError::OutOfDomain(format_rational(x)));
    }
    match kind {
        CantorKind::Ternary => Ok(ternary_removal(x)),
        CantorKind::SmithVolterra => svc_removal(x, max_depth),
    }
}

pub fn membership(kind: CantorKind, x: &Rational) -> Result<Membership, CantorError> {
    Ok(match removal_stage(kind, x, 4096)? {
        Some(_) => Membership::InComplementOpenSet,
        None => Membership::InLimitSet,
    })
}

/// The ternary set is self-similar, so descending by `x ↦ 3x` or
/// `x ↦ 3x − 2` walks an eventually periodic orbit of rationals; a repeated
/// state means the point is never removed.
fn ternary_removal(x: &Rational) -> Option<u32> {
    let third = Rational::new(1.into(), 3.into());
    let two_thirds = Rational::new(2.into(), 3.into());
    let three = int(3);
    let two = int(2);
    let mut seen = HashSet::new();
    let mut y = x.clone();
    let mut stage = 1;
    loop {
        if y > third && y < two_thirds {
            return Some(stage);
        }
        if !seen.insert(y.clone()) {
            return None;
        }
        y = if y <= third { &y * &three } else { &y * &three - &two };
        stage += 1;
    }
}

/// The fat Cantor set has no self-similarity, so the descent follows the
/// retained interval containing `x`. Endpoints of retained intervals
/// survive every later stage.
fn svc_removal(x: &Rational, max_depth: u32) -> Result<Option<u32>, CantorError> {
    let two = int(2);
    let (mut a, mut b) = (Rational::zero(), Rational::one());
    for stage in 1..=max_depth {
        if x == &a || x == &b {
            return Ok(None);
        }
        let half_gap = CantorKind::SmithVolterra.gap_length(stage) / &two;
        let mid = (&a + &b) / &two;
        let (lo, hi) = (&mid - &half_gap, &mid + &half_gap);
        if x > &lo && x < &hi {
            return Ok(Some(stage));
        }
        if x <= &lo {
            b = lo;
        } else {
            a = hi;
        }
    }
    Err(CantorError::Undecided { point: format_rational(x), depth: max_depth })
}

/// Base-`k` digits of `x ∈ [0,1]` in the non-terminating form (a finite
/// expansion `…c` is rewritten as `…(c−1)(k−1)(k−1)…`).
pub fn canonical_digits(x: &Rational, base: u32, count: usize) -> Vec<u32> {
    let k = int(base as i64);
    let mut y = x.clone();
    let mut digits = Vec::with_capacity(count);
    for _ in 0..count {
        let scaled = &y * &k;
        let mut d = scaled.floor();
        if d == scaled && !d.is_zero() {
            d -= Rational::one();
        }
        y = scaled - &d;
        digits.push(u32::try_from(d.to_integer()).expect("digit below base"));
    }
    digits
}

/// A fixed enumeration of the rationals of a closed interval: by
/// increasing denominator, then numerator, in lowest terms.
#[derive(Clone, Debug)]
pub struct RationalEnumeration {
    lo: Rational,
    hi: Rational,
    q: BigInt,
    p: BigInt,
    p_end: BigInt,
}

impl RationalEnumeration {
    pub fn new(lo: Rational, hi: Rational) -> RationalEnumeration {
        assert!(lo <= hi, "empty range");
        let mut e = RationalEnumeration { lo, hi, q: BigInt::zero(), p: BigInt::one(), p_end: BigInt::zero() };
        e.next_denominator();
        e
    }

    /// `Q ∩ (0,1)`, starting `1/2, 1/3, 2/3, 1/4, 3/4, …`.
    pub fn unit_open() -> impl Iterator<Item = Rational> {
        RationalEnumeration::new(Rational::zero(), Rational::one()).filter(|r| !r.is_zero() && !r.is_one())
    }

    fn next_denominator(&mut self) {
        self.q += 1;
        let q = Rational::from_integer(self.q.clone());
        self.p = (&self.lo * &q).ceil().to_integer();
        self.p_end = (&self.hi * &q).floor().to_integer();
    }
}

/// Position (from 1) of `x` in the enumeration of `Q ∩ [0,1]` by
/// denominator, or `None` outside `[0,1]`.
pub fn unit_index(x: &Rational) -> Option<u64> {
    if x.is_negative() || *x > Rational::one() {
        return None;
    }
    let q = x.denom().to_u64()?;
    let p = x.numer().to_u64()?;
    if q == 1 {
        return Some(p + 1);
    }
    let before: u64 = 2 + (2..q).map(crate::rational::totient).sum::<u64>();
    let rank = (1..=p).filter(|k| k.gcd(&q) == 1).count() as u64;
    Some(before + rank)
}

impl Iterator for RationalEnumeration {
    type Item = Rational;
    fn next(&mut self) -> Option<Rational> {
        if self.lo == self.hi {
            // a single point: emit it once
            if self.q.is_one() {
                self.q += 1;
                return Some(self.lo.clone());
            }
            return None;
        }
        loop {
            while self.p <= self.p_end {
                let p = self.p.clone();
                self.p += 1;
                if p.gcd(&self.q).is_one() {
                    return Some(Rational::new(p, self.q.clone()));
                }
            }
            self.next_denominator();
        }
    }
}

/// Point `n ≥ 1` of the list gets an open interval of length `ε/2^{n+1}`
/// centred on it, so the total length stays below `ε/2`.
pub fn cover_countable(points: &[Rational], eps: &Rational) -> Multirectangle {
    Multirectangle::from_intervals(points.iter().enumerate().map(|(i, q)| cover_interval(q, eps, i as u32 + 1)).collect())
}

pub fn cover_interval(q: &Rational, eps: &Rational, n: u32) -> Interval {
    let half = eps * pow2_inv(n + 2);
    Interval::open(q - &half, q + &half)
}

/// Length still owed by the cover after its first `n` intervals.
pub fn cover_tail_bound(eps: &Rational, n: u32) -> Rational {
    eps * pow2_inv(n + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::rational::Length;

    #[test]
    fn unit_index_matches_enumeration() {
        for (k, r) in RationalEnumeration::new(Rational::zero(), Rational::one()).take(400).enumerate() {
            assert_eq!(unit_index(&r), Some(k as u64 + 1));
        }
        assert_eq!(unit_index(&crate::rational::rat(-1, 2)), None);
    }

    #[test]
    fn first_stages() {
        let t = build_stage(CantorKind::Ternary, 1).unwrap();
        assert_eq!(t.removed().to_string(), "{(1/3,2/3)}");
        assert_eq!(t.measure_retained(), rat(2, 3));
        let s = build_stage(CantorKind::SmithVolterra, 1).unwrap();
        assert_eq!(s.removed().to_string(), "{(3/8,5/8)}");
        assert_eq!(s.measure_retained(), rat(3, 4));
    }

    #[test]
    fn integer_endpoints_match_rational_construction() {
        for j in 1..=8 {
            for kind in [CantorKind::Ternary, CantorKind::SmithVolterra] {
                let st = build_stage(kind, j).unwrap();
                let pairs = retained_pairs(kind, j);
                let built: Vec<(Rational, Rational)> =
                    st.retained().intervals().map(|i| (i.lo().finite().unwrap().clone(), i.hi().finite().unwrap().clone())).collect();
                assert_eq!(built, pairs);
                assert_eq!(Some(&st.measure_removed()), st.removed().length().finite());
            }
        }
    }

    #[test]
    fn stage_measures() {
        for j in 1..=10 {
            for kind in [CantorKind::Ternary, CantorKind::SmithVolterra] {
                let st = build_stage(kind, j).unwrap();
                assert_eq!(st.retained().len(), 1 << j);
                assert_eq!(st.measure_removed() + st.measure_retained(), Rational::one());
                assert_eq!(st.measure_removed(), kind.removed_measure(j));
                if j <= 6 {
                    assert!(st.removed().is_disjoint() && st.retained().is_disjoint());
                }
            }
        }
    }

    #[test]
    fn membership_examples() {
        assert_eq!(membership(CantorKind::Ternary, &rat(1, 3)).unwrap(), Membership::InLimitSet);
        assert_eq!(membership(CantorKind::Ternary, &rat(1, 4)).unwrap(), Membership::InLimitSet);
        assert_eq!(membership(CantorKind::Ternary, &rat(1, 2)).unwrap(), Membership::InComplementOpenSet);
        assert_eq!(membership(CantorKind::SmithVolterra, &rat(1, 2)).unwrap(), Membership::InComplementOpenSet);
        assert_eq!(membership(CantorKind::SmithVolterra, &rat(5, 32)).unwrap(), Membership::InLimitSet);
        assert!(matches!(membership(CantorKind::Ternary, &rat(3, 2)), Err(CantorError::OutOfDomain(_))));
    }

    #[test]
    fn canonical_expansion() {
        assert_eq!(canonical_digits(&rat(1, 3), 3, 4), vec![0, 2, 2, 2]);
        assert_eq!(canonical_digits(&rat(1, 2), 3, 3), vec![1, 1, 1]);
        assert_eq!(canonical_digits(&rat(1, 2), 8, 3), vec![3, 7, 7]);
        assert_eq!(canonical_digits(&Rational::one(), 3, 2), vec![2, 2]);
    }

    #[test]
    fn covers() {
        let c = cover_countable(&[rat(1, 2)], &rat(1, 10));
        assert_eq!(c, Multirectangle::from_intervals(vec![Interval::open(rat(39, 80), rat(41, 80))]));
        assert_eq!(c.length(), Length::Finite(rat(1, 40)));
        let first: Vec<Rational> = RationalEnumeration::unit_open().take(4).collect();
        assert_eq!(first, vec![rat(1, 2), rat(1, 3), rat(2, 3), rat(1, 4)]);
        let eps = rat(1, 10);
        assert_eq!(cover_countable(&first, &eps).length(), Length::Finite(&eps * rat(15, 32)));
        assert!(cover_countable(&[], &eps).is_empty());
    }

    #[test]
    fn enumeration_of_interval() {
        let v: Vec<Rational> = RationalEnumeration::new(int(1), int(2)).take(5).collect();
        assert_eq!(v, vec![int(1), int(2), rat(3, 2), rat(4, 3), rat(5, 3)]);
    }
}
