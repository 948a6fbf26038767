//! Exact set algebra on the line and in `R^d`: intervals, rectangles,
//! multirectangles (finite sequences of rectangles, duplicates allowed),
//! open sets given as finite unions of open rectangles, dyadic
//! decompositions and inner/outer measure brackets.
//!
//! A multirectangle `Δ` carries two distinct quantities: the number
//! `L(Δ)`, the plain sum of component volumes, and the point set `I_Δ`,
//! the union of its components. They agree only for almost-disjoint
//! sequences; [`Multirectangle::length`] returns the former and
//! [`Multirectangle::measure`] the Lebesgue measure of the latter.

mod dyadic;
mod interval;
mod ops;

use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

pub use dyadic::{dyadic_decompose, lattice_hull, DyadicCube, DyadicDecomposition};
pub use interval::{Interval, Topology};
pub use ops::{complement_in_box, disjointify_1d, inner_measure_bound, outer_measure_bound, section, Section};

use crate::rational::{cmp_rational, Endpoint, Length, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("interval endpoints out of order: {0}")]
    InvertedInterval(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("set is not contained in the bounding box")]
    UnboundedSet,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Axis-aligned rectangle `I_1 × … × I_d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rectangle {
    sides: Vec<Interval>,
}

impl Rectangle {
    pub fn new(sides: Vec<Interval>) -> Rectangle {
        Rectangle { sides }
    }

    pub fn closed(bounds: &[(Rational, Rational)]) -> Rectangle {
        Rectangle::new(bounds.iter().map(|(a, b)| Interval::closed(a.clone(), b.clone())).collect())
    }

    pub fn open(bounds: &[(Rational, Rational)]) -> Rectangle {
        Rectangle::new(bounds.iter().map(|(a, b)| Interval::open(a.clone(), b.clone())).collect())
    }

    pub fn whole_space(dim: usize) -> Rectangle {
        Rectangle::new(vec![Interval::real_line(); dim])
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[Interval] {
        &self.sides
    }

    pub fn side(&self, axis: usize) -> &Interval {
        &self.sides[axis]
    }

    /// `L(R) = ∏ L(I_k)`; zero as soon as one side is degenerate.
    pub fn volume(&self) -> Length {
        self.sides.iter().fold(Length::Finite(Rational::one()), |acc, s| acc * s.length())
    }

    pub fn is_bounded(&self) -> bool {
        self.sides.iter().all(Interval::is_bounded)
    }

    pub fn is_degenerate(&self) -> bool {
        self.sides.iter().any(Interval::is_degenerate)
    }

    pub fn is_empty(&self) -> bool {
        self.sides.iter().any(Interval::is_empty)
    }

    pub fn is_open(&self) -> bool {
        self.sides.iter().all(Interval::is_open)
    }

    pub fn is_closed(&self) -> bool {
        self.sides.iter().all(Interval::is_closed)
    }

    pub fn closure(&self) -> Rectangle {
        Rectangle::new(self.sides.iter().map(Interval::closure).collect())
    }

    pub fn interior(&self) -> Rectangle {
        Rectangle::new(self.sides.iter().map(Interval::interior).collect())
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.dim() && self.sides.iter().zip(x).all(|(s, v)| s.contains(v))
    }

    pub fn contains_f64(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.sides.iter().zip(x).all(|(s, v)| s.contains_f64(*v))
    }

    pub fn intersect(&self, other: &Rectangle) -> Option<Rectangle> {
        if self.dim() != other.dim() {
            return None;
        }
        self.sides.iter().zip(&other.sides).map(|(a, b)| a.intersect(b)).collect::<Option<Vec<_>>>().map(Rectangle::new)
    }

    pub fn intersects(&self, other: &Rectangle) -> bool {
        self.intersect(other).is_some()
    }

    /// `R ∩ S ⊆ ∂R ∩ ∂S`, tested as `int R ∩ cl S = ∅` and `cl R ∩ int S = ∅`.
    pub fn almost_disjoint_from(&self, other: &Rectangle) -> bool {
        !self.interior().intersects(&other.closure()) && !self.closure().intersects(&other.interior())
    }

    /// Closed rectangle `self ⊆ other` as point sets.
    pub fn is_subset_of(&self, other: &Rectangle) -> bool {
        self.sides.iter().zip(&other.sides).all(|(a, b)| match a.intersect(b) {
            Some(c) => c == *a || a.is_empty(),
            None => a.is_empty(),
        })
    }

    /// Exact squared Euclidean distance from `x` to the closure.
    pub fn distance_sq(&self, x: &[Rational]) -> Rational {
        self.sides
            .iter()
            .zip(x)
            .map(|(s, v)| {
                let d = s.distance(v);
                &d * &d
            })
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// Nearest point of the closure to `x`.
    pub fn clamp(&self, x: &[Rational]) -> Vec<Rational> {
        self.sides.iter().zip(x).map(|(s, v)| s.clamp(v)).collect()
    }

    pub fn distance_sq_f64(&self, x: &[f64]) -> f64 {
        self.sides
            .iter()
            .zip(x)
            .map(|(s, &v)| {
                let (a, b) = s.f64_bounds();
                let d = if v < a {
                    a - v
                } else if v > b {
                    v - b
                } else {
                    0.0
                };
                d * d
            })
            .sum()
    }

    pub fn f64_bounds(&self) -> Vec<(f64, f64)> {
        self.sides.iter().map(Interval::f64_bounds).collect()
    }

    /// Finite bounds of every side.
    pub fn rational_bounds(&self) -> Option<Vec<(Rational, Rational)>> {
        self.sides.iter().map(|s| s.bounds().map(|(a, b)| (a.clone(), b.clone()))).collect()
    }

    pub fn center(&self) -> Option<Vec<Rational>> {
        self.sides.iter().map(Interval::midpoint).collect()
    }

    /// Removes one axis; used for sections and tensor factors.
    pub fn drop_axis(&self, axis: usize) -> Rectangle {
        let mut sides = self.sides.clone();
        sides.remove(axis);
        Rectangle::new(sides)
    }

    pub fn product(&self, other: &Rectangle) -> Rectangle {
        Rectangle::new(self.sides.iter().chain(&other.sides).cloned().collect())
    }

    /// Parses `"[0,1]x(0,2)"`.
    pub fn parse(text: &str) -> Result<Rectangle, SetError> {
        let sides = text.split(['x', '×']).map(|s| Interval::parse(s.trim())).collect::<Result<Vec<_>, _>>()?;
        Ok(Rectangle::new(sides))
    }
}

impl fmt::Display for Rectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sides.iter().map(Interval::to_string).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Verified structural properties of a multirectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Flags {
    pub disjoint: bool,
    pub almost_disjoint: bool,
    pub open: bool,
    pub closed: bool,
}

/// A finite sequence of rectangles in `R^d`; a one-dimensional instance
/// is a multiinterval.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Multirectangle {
    dim: usize,
    rects: Vec<Rectangle>,
}

impl Multirectangle {
    pub fn empty(dim: usize) -> Multirectangle {
        Multirectangle { dim, rects: Vec::new() }
    }

    pub fn new(dim: usize, rects: Vec<Rectangle>) -> Result<Multirectangle, SetError> {
        if let Some(r) = rects.iter().find(|r| r.dim() != dim) {
            return Err(SetError::DimensionMismatch { expected: dim, found: r.dim() });
        }
        Ok(Multirectangle { dim, rects })
    }

    /// One-dimensional constructor.
    pub fn from_intervals(intervals: Vec<Interval>) -> Multirectangle {
        Multirectangle { dim: 1, rects: intervals.into_iter().map(|i| Rectangle::new(vec![i])).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rects(&self) -> &[Rectangle] {
        &self.rects
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn push(&mut self, r: Rectangle) -> Result<(), SetError> {
        if r.dim() != self.dim {
            return Err(SetError::DimensionMismatch { expected: self.dim, found: r.dim() });
        }
        self.rects.push(r);
        Ok(())
    }

    pub fn concat(&self, other: &Multirectangle) -> Result<Multirectangle, SetError> {
        if self.is_empty() {
            return Ok(other.clone());
        }
        if other.is_empty() {
            return Ok(self.clone());
        }
        if self.dim != other.dim {
            return Err(SetError::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(Multirectangle { dim: self.dim, rects: self.rects.iter().chain(&other.rects).cloned().collect() })
    }

    /// One-dimensional components, for multiintervals.
    pub fn intervals(&self) -> impl Iterator<Item = &Interval> {
        self.rects.iter().map(|r| r.side(0))
    }

    /// `L(Δ) = Σ L(R_n)`: duplicates and overlaps count every time.
    pub fn length(&self) -> Length {
        self.rects.iter().fold(Length::zero(), |acc, r| acc + r.volume())
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.rects.iter().any(|r| r.contains(x))
    }

    pub fn contains_f64(&self, x: &[f64]) -> bool {
        self.rects.iter().any(|r| r.contains_f64(x))
    }

    pub fn is_disjoint(&self) -> bool {
        self.pairs().all(|(a, b)| !a.intersects(b))
    }

    pub fn is_almost_disjoint(&self) -> bool {
        self.pairs().all(|(a, b)| a.almost_disjoint_from(b))
    }

    pub fn is_open(&self) -> bool {
        self.rects.iter().all(Rectangle::is_open)
    }

    pub fn is_closed(&self) -> bool {
        self.rects.iter().all(Rectangle::is_closed)
    }

    pub fn is_bounded(&self) -> bool {
        self.rects.iter().all(Rectangle::is_bounded)
    }

    pub fn flags(&self) -> Flags {
        Flags { disjoint: self.is_disjoint(), almost_disjoint: self.is_almost_disjoint(), open: self.is_open(), closed: self.is_closed() }
    }

    fn pairs(&self) -> impl Iterator<Item = (&Rectangle, &Rectangle)> {
        self.rects.iter().enumerate().flat_map(move |(i, a)| self.rects[i + 1..].iter().map(move |b| (a, b)))
    }

    /// Lebesgue measure of the union `I_Δ`, computed exactly by coordinate
    /// compression (topology tags do not affect it).
    pub fn measure(&self) -> Length {
        let rects: Vec<&Rectangle> = self.rects.iter().filter(|r| !r.is_degenerate() && !r.is_empty()).collect();
        if rects.is_empty() {
            return Length::zero();
        }
        if rects.iter().any(|r| !r.is_bounded()) {
            return Length::Infinite;
        }
        let bounds: Vec<Vec<(Rational, Rational)>> = rects.iter().map(|r| r.rational_bounds().expect("bounded")).collect();
        if self.dim == 1 {
            return Length::Finite(sweep_1d(bounds.into_iter().map(|mut b| b.remove(0)).collect()));
        }
        let mut cuts: Vec<Vec<Rational>> = vec![Vec::new(); self.dim];
        for b in &bounds {
            for (axis, (lo, hi)) in b.iter().enumerate() {
                cuts[axis].push(lo.clone());
                cuts[axis].push(hi.clone());
            }
        }
        for c in cuts.iter_mut() {
            c.sort_by(cmp_rational);
            c.dedup();
        }
        let mut total = Rational::zero();
        let mut index = vec![0usize; self.dim];
        let sizes: Vec<usize> = cuts.iter().map(|c| c.len() - 1).collect();
        if sizes.contains(&0) {
            return Length::zero();
        }
        loop {
            let covered = bounds
                .iter()
                .any(|b| b.iter().enumerate().all(|(axis, (lo, hi))| lo <= &cuts[axis][index[axis]] && &cuts[axis][index[axis] + 1] <= hi));
            if covered {
                let vol = (0..self.dim).map(|axis| &cuts[axis][index[axis] + 1] - &cuts[axis][index[axis]]).fold(Rational::one(), |a, b| a * b);
                total += vol;
            }
            if !advance(&mut index, &sizes) {
                break;
            }
        }
        Length::Finite(total)
    }

    /// JSON form: an array of rectangles, each an array of interval literals.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.rects.iter().map(|r| serde_json::Value::Array(r.sides().iter().map(|s| s.to_string().into()).collect())).collect(),
        )
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Multirectangle, SetError> {
        let arr = value.as_array().ok_or_else(|| SetError::Parse("multirectangle must be an array".into()))?;
        let mut rects = Vec::with_capacity(arr.len());
        for r in arr {
            let sides = match r {
                serde_json::Value::String(s) => Rectangle::parse(s)?.sides,
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|s| s.as_str().ok_or_else(|| SetError::Parse("interval literal must be a string".into())).and_then(Interval::parse))
                    .collect::<Result<Vec<_>, _>>()?,
                _ => return Err(SetError::Parse("rectangle must be an array of interval literals".into())),
            };
            rects.push(Rectangle::new(sides));
        }
        let dim = rects.first().map_or(1, Rectangle::dim);
        Multirectangle::new(dim, rects)
    }

    /// Parses either JSON or the compact `"[0,1]x[0,1]|(2,3)x(0,1)"` form.
    pub fn parse(text: &str) -> Result<Multirectangle, SetError> {
        let t = text.trim();
        if t.starts_with("[[") || t.starts_with("[\"") || t == "[]" {
            let v: serde_json::Value = serde_json::from_str(t).map_err(|e| SetError::Parse(e.to_string()))?;
            return Multirectangle::from_json(&v);
        }
        let rects = t.split('|').map(Rectangle::parse).collect::<Result<Vec<_>, _>>()?;
        let dim = rects.first().map_or(1, Rectangle::dim);
        Multirectangle::new(dim, rects)
    }

    pub fn total_length_f64(&self) -> f64 {
        self.length().to_f64()
    }
}

impl fmt::Display for Multirectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.rects.iter().map(Rectangle::to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Odometer increment over a product index; false once it wraps.
pub(crate) fn advance(index: &mut [usize], sizes: &[usize]) -> bool {
    for axis in (0..index.len()).rev() {
        index[axis] += 1;
        if index[axis] < sizes[axis] {
            return true;
        }
        index[axis] = 0;
    }
    false
}

/// An open set presented as a finite union of open rectangles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenSet {
    rects: Multirectangle,
}

impl OpenSet {
    pub fn new(rects: Multirectangle) -> Result<OpenSet, SetError> {
        if !rects.is_open() {
            return Err(SetError::Precondition("open set components must be open rectangles".into()));
        }
        Ok(OpenSet { rects })
    }

    pub fn dim(&self) -> usize {
        self.rects.dim()
    }

    pub fn components(&self) -> &Multirectangle {
        &self.rects
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.rects.contains(x)
    }

    pub fn measure(&self) -> Length {
        self.rects.measure()
    }

    /// Whether the closed rectangle `cube` lies inside the union. Every
    /// open component is constant on each cell of the grid cut by all
    /// component endpoints (cells here include the cut points themselves),
    /// so testing one representative per cell is exact.
    pub fn contains_closed(&self, cube: &Rectangle) -> bool {
        let cube_bounds = match cube.rational_bounds() {
            Some(b) => b,
            None => return false,
        };
        if self.rects.rects().iter().any(|r| cube.closure().is_subset_of(r)) {
            return true;
        }
        let relevant: Vec<&Rectangle> = self.rects.rects().iter().filter(|r| r.intersects(cube)).collect();
        if relevant.is_empty() {
            return false;
        }
        // per axis: cut points inside the cube, then alternating
        // point / open-gap representatives
        let mut reps: Vec<Vec<Rational>> = Vec::with_capacity(cube.dim());
        for (axis, (lo, hi)) in cube_bounds.iter().enumerate() {
            let mut cuts = vec![lo.clone(), hi.clone()];
            for r in &relevant {
                for e in [r.side(axis).lo(), r.side(axis).hi()] {
                    if let Endpoint::Finite(v) = e {
                        if v > lo && v < hi {
                            cuts.push(v.clone());
                        }
                    }
                }
            }
            cuts.sort();
            cuts.dedup();
            let two = Rational::from_integer(2.into());
            let mut axis_reps = Vec::with_capacity(2 * cuts.len());
            for (i, c) in cuts.iter().enumerate() {
                axis_reps.push(c.clone());
                if let Some(next) = cuts.get(i + 1) {
                    axis_reps.push((c + next) / &two);
                }
            }
            reps.push(axis_reps);
        }
        let sizes: Vec<usize> = reps.iter().map(Vec::len).collect();
        let mut index = vec![0usize; cube.dim()];
        loop {
            let point: Vec<Rational> = index.iter().enumerate().map(|(a, &i)| reps[a][i].clone()).collect();
            if !relevant.iter().any(|r| r.contains(&point)) {
                return false;
            }
            if !advance(&mut index, &sizes) {
                return true;
            }
        }
    }
}

/// Length of a union of intervals: sort by left end and merge.
fn sweep_1d(mut ivs: Vec<(Rational, Rational)>) -> Rational {
    ivs.sort_by(|a, b| cmp_rational(&a.0, &b.0));
    let mut total = Rational::zero();
    let mut current: Option<(Rational, Rational)> = None;
    for (lo, hi) in ivs {
        current = match current {
            Some((a, b)) if cmp_rational(&lo, &b).is_le() => Some((a, if cmp_rational(&hi, &b).is_gt() { hi } else { b })),
            Some((a, b)) => {
                total += b - a;
                Some((lo, hi))
            }
            None => Some((lo, hi)),
        };
    }
    if let Some((a, b)) = current {
        total += b - a;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn mi(s: &str) -> Multirectangle {
        Multirectangle::parse(s).unwrap()
    }

    #[test]
    fn length_counts_duplicates() {
        assert_eq!(mi("(0,1)|(0,1)").length(), Length::Finite(int(2)));
        assert_eq!(Multirectangle::empty(1).length(), Length::zero());
        assert_eq!(mi("(0,1/2)|(1/4,3/4)").length(), Length::Finite(int(1)));
    }

    #[test]
    fn measure_is_of_the_union() {
        assert_eq!(mi("(0,1)|(0,1)").measure(), Length::Finite(int(1)));
        assert_eq!(mi("(0,1/2)|(1/4,3/4)").measure(), Length::Finite(rat(3, 4)));
        assert_eq!(mi("[0,2]x[0,2]|[1,3]x[1,3]").measure(), Length::Finite(int(7)));
        assert_eq!(mi("[0,inf)").measure(), Length::Infinite);
    }

    #[test]
    fn flags_are_verified() {
        let a = mi("[0,1]x[0,1]|[1,2]x[0,1]");
        let f = a.flags();
        assert!(f.almost_disjoint && !f.disjoint && f.closed && !f.open);
        let b = mi("(0,2)|(1,3)");
        assert!(!b.is_almost_disjoint());
        assert!(b.is_open());
    }

    #[test]
    fn json_round_trip() {
        let a = mi("[0,1]x(0,1/2]|[-1/8,3]x[2,inf)");
        let back = Multirectangle::from_json(&a.to_json()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn closed_cube_inside_union_of_open_rectangles() {
        let o = OpenSet::new(mi("(0,1)|(1/2,2)")).unwrap();
        let cube = Rectangle::closed(&[(rat(1, 4), rat(3, 2))]);
        assert!(o.contains_closed(&cube));
        let o2 = OpenSet::new(mi("(0,1)|(1,2)")).unwrap();
        assert!(!o2.contains_closed(&cube));
        let sq = OpenSet::new(mi("(0,1)x(0,2)|(1/2,2)x(0,2)")).unwrap();
        assert!(sq.contains_closed(&Rectangle::closed(&[(rat(1, 4), rat(7, 4)), (rat(1, 2), int(1))])));
        assert!(!sq.contains_closed(&Rectangle::closed(&[(int(0), int(1)), (rat(1, 2), int(1))])));
    }
}
