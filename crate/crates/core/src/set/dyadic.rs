use std::collections::VecDeque;

use num_traits::Zero;

use super::{Interval, Multirectangle, OpenSet, Rectangle, SetError};
use crate::rational::{pow2_inv, Endpoint, Rational};

/// The closed cube `∏ [k_i/2^level, (k_i+1)/2^level]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    pub level: u32,
    pub index: Vec<i64>,
}

impl DyadicCube {
    pub fn side(&self) -> Rational {
        pow2_inv(self.level)
    }

    pub fn volume(&self) -> Rational {
        pow2_inv(self.level * self.index.len() as u32)
    }

    pub fn rectangle(&self) -> Rectangle {
        let h = self.side();
        Rectangle::new(
            self.index
                .iter()
                .map(|&k| {
                    let lo = Rational::from_integer(k.into()) * &h;
                    Interval::closed(lo.clone(), lo + &h)
                })
                .collect(),
        )
    }

    pub fn children(&self) -> Vec<DyadicCube> {
        let d = self.index.len();
        (0..1usize << d)
            .map(|mask| DyadicCube { level: self.level + 1, index: (0..d).map(|i| 2 * self.index[i] + ((mask >> (d - 1 - i)) & 1) as i64).collect() })
            .collect()
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        (self.level > 0).then(|| DyadicCube { level: self.level - 1, index: self.index.iter().map(|k| k.div_euclid(2)).collect() })
    }

    /// Whether `other` is this cube or one of its descendants.
    pub fn contains_cube(&self, other: &DyadicCube) -> bool {
        if other.level < self.level {
            return false;
        }
        let shift = other.level - self.level;
        self.index.iter().zip(&other.index).all(|(a, b)| b >> shift == *a)
    }
}

#[derive(Clone, Debug)]
pub struct DyadicDecomposition {
    pub cubes: Vec<DyadicCube>,
    pub max_depth: u32,
    /// Retained cubes per level `0..=max_depth`.
    pub per_level: Vec<usize>,
}

impl DyadicDecomposition {
    pub fn length(&self) -> Rational {
        self.cubes.iter().map(DyadicCube::volume).fold(Rational::zero(), |a, b| a + b)
    }

    pub fn to_multirectangle(&self, dim: usize) -> Multirectangle {
        Multirectangle::new(dim, self.cubes.iter().map(DyadicCube::rectangle).collect()).expect("uniform dimension")
    }
}

/// Decomposes a bounded open set into closed, almost-disjoint dyadic cubes.
///
/// Level 0 seeds the integer-lattice unit cubes meeting `bbox`; every cube
/// inside `O` is kept, every cube meeting `O` without lying inside it is
/// split into its `2^d` children, breadth first, down to `max_depth`.
pub fn dyadic_decompose(o: &OpenSet, bbox: &Rectangle, max_depth: u32) -> Result<DyadicDecomposition, SetError> {
    if max_depth == 0 || max_depth > 48 {
        return Err(SetError::Precondition("max depth must lie in 1..=48".into()));
    }
    if bbox.dim() != o.dim() {
        return Err(SetError::DimensionMismatch { expected: o.dim(), found: bbox.dim() });
    }
    let bounds = bbox.rational_bounds().ok_or(SetError::UnboundedSet)?;
    let hull = bbox.closure();
    if o.components().rects().iter().any(|r| !r.is_empty() && !r.closure().is_subset_of(&hull)) {
        return Err(SetError::UnboundedSet);
    }
    let ranges: Vec<(i64, i64)> = bounds.iter().map(|(lo, hi)| (floor_i64(lo), ceil_i64(hi).max(floor_i64(lo) + 1))).collect();
    let mut queue: VecDeque<DyadicCube> = VecDeque::new();
    let mut index: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    'seed: loop {
        queue.push_back(DyadicCube { level: 0, index: index.clone() });
        for axis in (0..index.len()).rev() {
            index[axis] += 1;
            if index[axis] < ranges[axis].1 {
                continue 'seed;
            }
            index[axis] = ranges[axis].0;
        }
        break;
    }
    let mut cubes = Vec::new();
    let mut per_level = vec![0usize; max_depth as usize + 1];
    while let Some(cube) = queue.pop_front() {
        let rect = cube.rectangle();
        if !o.components().rects().iter().any(|r| r.intersects(&rect)) {
            continue;
        }
        if o.contains_closed(&rect) {
            per_level[cube.level as usize] += 1;
            cubes.push(cube);
        } else if cube.level < max_depth {
            queue.extend(cube.children());
        }
    }
    Ok(DyadicDecomposition { cubes, max_depth, per_level })
}

fn floor_i64(r: &Rational) -> i64 {
    i64::try_from(r.floor().to_integer()).expect("bounding box fits in i64")
}

fn ceil_i64(r: &Rational) -> i64 {
    i64::try_from(r.ceil().to_integer()).expect("bounding box fits in i64")
}

/// Smallest integer box containing the closure of an open set.
pub fn lattice_hull(o: &OpenSet) -> Option<Rectangle> {
    let d = o.dim();
    let mut lo: Vec<Option<Rational>> = vec![None; d];
    let mut hi: Vec<Option<Rational>> = vec![None; d];
    for r in o.components().rects() {
        for (axis, s) in r.sides().iter().enumerate() {
            let (Endpoint::Finite(a), Endpoint::Finite(b)) = (s.lo(), s.hi()) else { return None };
            let a = a.floor();
            let b = b.ceil();
            if lo[axis].as_ref().is_none_or(|x| &a < x) {
                lo[axis] = Some(a);
            }
            if hi[axis].as_ref().is_none_or(|x| &b > x) {
                hi[axis] = Some(b);
            }
        }
    }
    let sides = lo.into_iter().zip(hi).map(|(a, b)| Some(Interval::closed(a?, b?))).collect::<Option<Vec<_>>>()?;
    Some(Rectangle::new(sides))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn open_set(s: &str) -> OpenSet {
        OpenSet::new(Multirectangle::parse(s).unwrap()).unwrap()
    }

    #[test]
    fn unit_interval_closed_form() {
        let o = open_set("(0,1)");
        let bx = Rectangle::closed(&[(int(0), int(1))]);
        for j in 1..=8u32 {
            let dec = dyadic_decompose(&o, &bx, j).unwrap();
            assert_eq!(dec.length(), int(1) - pow2_inv(j - 1), "depth {j}");
        }
    }

    #[test]
    fn integer_cube_kept_at_level_zero() {
        let o = open_set("(-2,2)");
        let bx = Rectangle::closed(&[(int(-2), int(2))]);
        let dec = dyadic_decompose(&o, &bx, 3).unwrap();
        assert!(dec.cubes.contains(&DyadicCube { level: 0, index: vec![0] }));
    }

    #[test]
    fn unit_square_depth_two() {
        let o = open_set("(0,1)x(0,1)");
        let bx = Rectangle::closed(&[(int(0), int(1)), (int(0), int(1))]);
        let dec = dyadic_decompose(&o, &bx, 2).unwrap();
        assert_eq!(dec.cubes.len(), 4);
        assert_eq!(dec.length(), rat(1, 4));
        assert!(dec.to_multirectangle(2).is_almost_disjoint());
    }

    #[test]
    fn rejects_set_outside_box() {
        let o = open_set("(0,3)");
        let bx = Rectangle::closed(&[(int(0), int(1))]);
        assert_eq!(dyadic_decompose(&o, &bx, 2).unwrap_err(), SetError::UnboundedSet);
    }

    #[test]
    fn hull_is_integral() {
        let o = open_set("(1/3,5/2)x(-1/2,1/2)");
        assert_eq!(lattice_hull(&o).unwrap(), Rectangle::closed(&[(int(0), int(3)), (int(-1), int(1))]));
    }
}
