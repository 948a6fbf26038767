use num_traits::{One, Zero};

use super::{Interval, Multirectangle, Rectangle, SetError, Topology};
use crate::rational::{pow2_inv, Endpoint, Length, Rational};

/// Sorts and merges a multiinterval into pairwise disjoint components with
/// the same union. Overlapping or touching pieces are merged only when the
/// touching point belongs to the union, so `(0,1),(1,2)` stays split.
pub fn disjointify_1d(delta: &Multirectangle) -> Multirectangle {
    let mut items: Vec<Interval> = delta.intervals().filter(|i| !i.is_empty()).cloned().collect();
    items.sort_by(|a, b| a.lo().cmp(b.lo()).then(b.topology().lo_closed().cmp(&a.topology().lo_closed())));
    let mut out: Vec<Interval> = Vec::with_capacity(items.len());
    for next in items {
        if let Some(cur) = out.last_mut() {
            let joins = next.lo() < cur.hi() || (next.lo() == cur.hi() && (cur.topology().hi_closed() || next.topology().lo_closed()));
            if joins {
                let (hi, hi_closed) = match next.hi().cmp(cur.hi()) {
                    std::cmp::Ordering::Greater => (next.hi().clone(), next.topology().hi_closed()),
                    std::cmp::Ordering::Less => (cur.hi().clone(), cur.topology().hi_closed()),
                    std::cmp::Ordering::Equal => (cur.hi().clone(), cur.topology().hi_closed() || next.topology().hi_closed()),
                };
                let topo = Topology::from_flags(cur.topology().lo_closed(), hi_closed);
                *cur = Interval::new(cur.lo().clone(), hi, topo).expect("merged bounds ordered");
                continue;
            }
        }
        out.push(next);
    }
    Multirectangle::from_intervals(out)
}

fn budget(eps: &Rational, k: usize) -> Rational {
    eps * pow2_inv(k as u32 + 1)
}

fn finite_bounds(r: &Rectangle) -> Result<Vec<(Rational, Rational)>, SetError> {
    r.rational_bounds().ok_or(SetError::UnboundedSet)
}

fn product_of(sides: impl Iterator<Item = Rational>) -> Rational {
    sides.fold(Rational::one(), |a, b| a * b)
}

/// Open multirectangle covering `I_A`; component `k` is inflated
/// symmetrically with a volume budget of `ε/2^{k+1}`, so the total excess
/// stays strictly below `ε`.
pub fn outer_measure_bound(a: &Multirectangle, eps: &Rational) -> Result<Multirectangle, SetError> {
    if eps <= &Rational::zero() {
        return Err(SetError::Precondition("epsilon must be positive".into()));
    }
    let two = Rational::from_integer(2.into());
    let mut out = Multirectangle::empty(a.dim());
    for (k, r) in a.rects().iter().enumerate() {
        let bounds = finite_bounds(r)?;
        let b = budget(eps, k);
        let base = product_of(bounds.iter().map(|(lo, hi)| hi - lo));
        let mut delta = &b / &two;
        loop {
            let grown = product_of(bounds.iter().map(|(lo, hi)| hi - lo + &delta * &two));
            if grown - &base <= b {
                break;
            }
            delta /= &two;
        }
        let sides = bounds.iter().map(|(lo, hi)| Interval::open(lo - &delta, hi + &delta)).collect();
        out.push(Rectangle::new(sides))?;
    }
    Ok(out)
}

/// Disjoint closed multirectangle inside `I_A`; component `k` is deflated
/// symmetrically into its interior, losing at most `ε/2^{k+1}` of volume.
/// Degenerate components are kept as their (closed) point sets, which
/// contribute nothing to the length.
pub fn inner_measure_bound(a: &Multirectangle, eps: &Rational) -> Result<Multirectangle, SetError> {
    if eps <= &Rational::zero() {
        return Err(SetError::Precondition("epsilon must be positive".into()));
    }
    let two = Rational::from_integer(2.into());
    let four = Rational::from_integer(4.into());
    let mut out = Multirectangle::empty(a.dim());
    for (k, r) in a.rects().iter().enumerate() {
        if r.is_empty() {
            continue;
        }
        let bounds = finite_bounds(r)?;
        if r.is_degenerate() {
            let closed = r.closure();
            if r.is_closed() && !out.rects().contains(&closed) {
                out.push(closed)?;
            }
            continue;
        }
        let b = budget(eps, k);
        let base = product_of(bounds.iter().map(|(lo, hi)| hi - lo));
        let shortest = bounds.iter().map(|(lo, hi)| hi - lo).min().expect("dim >= 1");
        let mut delta = std::cmp::min(&b / &two, &shortest / &four);
        loop {
            let shrunk = product_of(bounds.iter().map(|(lo, hi)| hi - lo - &delta * &two));
            if &base - shrunk <= b {
                break;
            }
            delta /= &two;
        }
        let sides = bounds.iter().map(|(lo, hi)| Interval::closed(lo + &delta, hi - &delta)).collect();
        out.push(Rectangle::new(sides))?;
    }
    Ok(out)
}

/// The section of a multirectangle at `x_axis = c`, with the
/// almost-disjointness of the result reported rather than enforced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub rects: Multirectangle,
    pub almost_disjoint: bool,
}

impl Section {
    pub fn measure(&self) -> Length {
        self.rects.measure()
    }
}

pub fn section(delta: &Multirectangle, axis: usize, c: &Rational) -> Result<Section, SetError> {
    if axis >= delta.dim() || delta.dim() < 2 {
        return Err(SetError::DimensionMismatch { expected: axis + 2, found: delta.dim() });
    }
    let rects: Vec<Rectangle> = delta.rects().iter().filter(|r| r.side(axis).contains(c)).map(|r| r.drop_axis(axis)).collect();
    let rects = Multirectangle::new(delta.dim() - 1, rects)?;
    let almost_disjoint = rects.is_almost_disjoint();
    Ok(Section { rects, almost_disjoint })
}

/// The complement of `I_A` inside a closed box, as an almost-disjoint
/// multirectangle whose closure is `box ∖ int I_A` up to a null set.
/// Built on the grid cut by all component endpoints.
pub fn complement_in_box(a: &Multirectangle, bx: &Rectangle) -> Result<Multirectangle, SetError> {
    let box_bounds = finite_bounds(bx)?;
    let mut cuts: Vec<Vec<Rational>> = box_bounds.iter().map(|(lo, hi)| vec![lo.clone(), hi.clone()]).collect();
    for r in a.rects() {
        for (axis, side) in r.sides().iter().enumerate() {
            let (lo, hi) = &box_bounds[axis];
            for e in [side.lo(), side.hi()] {
                if let Endpoint::Finite(v) = e {
                    if v > lo && v < hi {
                        cuts[axis].push(v.clone());
                    }
                }
            }
        }
    }
    for c in cuts.iter_mut() {
        c.sort();
        c.dedup();
    }
    let sizes: Vec<usize> = cuts.iter().map(|c| c.len() - 1).collect();
    let mut out = Multirectangle::empty(bx.dim());
    if sizes.contains(&0) {
        return Ok(out);
    }
    let two = Rational::from_integer(2.into());
    let mut index = vec![0usize; bx.dim()];
    loop {
        let mid: Vec<Rational> = index.iter().enumerate().map(|(a, &i)| (&cuts[a][i] + &cuts[a][i + 1]) / &two).collect();
        if !a.rects().iter().any(|r| r.closure().contains(&mid)) {
            let sides = index.iter().enumerate().map(|(a, &i)| Interval::closed(cuts[a][i].clone(), cuts[a][i + 1].clone())).collect();
            out.push(Rectangle::new(sides))?;
        }
        if !super::advance(&mut index, &sizes) {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn mi(s: &str) -> Multirectangle {
        Multirectangle::parse(s).unwrap()
    }

    #[test]
    fn disjointify_examples() {
        assert_eq!(disjointify_1d(&mi("(0,2)|(1,3)")), mi("(0,3)"));
        assert_eq!(disjointify_1d(&mi("(0,1)|(2,3)")), mi("(0,1)|(2,3)"));
        let dup = disjointify_1d(&mi("(0,1)|(0,1)"));
        assert_eq!(dup, mi("(0,1)"));
        assert_eq!(dup.length(), Length::Finite(int(1)));
        assert_eq!(disjointify_1d(&mi("(0,1)|(1,2)")), mi("(0,1)|(1,2)"));
        assert_eq!(disjointify_1d(&mi("(0,1]|(1,2)")), mi("(0,2)"));
    }

    #[test]
    fn disjointify_idempotent() {
        let a = disjointify_1d(&mi("(3,4)|(0,2)|(1,3)|(5,6)|(5,5)"));
        assert_eq!(disjointify_1d(&a), a);
    }

    #[test]
    fn outer_inflation() {
        let out = outer_measure_bound(&mi("[0,1]"), &rat(1, 8)).unwrap();
        assert_eq!(out, mi("(-1/32,33/32)"));
        assert_eq!(out.length(), Length::Finite(rat(17, 16)));
        assert!(outer_measure_bound(&Multirectangle::empty(1), &rat(1, 8)).unwrap().is_empty());
        let svc2 = mi("[0,5/32]|[7/32,3/8]|[5/8,25/32]|[27/32,1]");
        let cover = outer_measure_bound(&svc2, &rat(1, 16)).unwrap();
        assert_eq!(svc2.length(), Length::Finite(rat(5, 8)));
        assert!(cover.is_open());
        assert!(cover.length() < Length::Finite(rat(11, 16)));
    }

    #[test]
    fn inner_deflation() {
        let a = mi("(0,1)|(1,2)");
        let inner = inner_measure_bound(&a, &rat(1, 2)).unwrap();
        assert!(inner.is_disjoint() && inner.is_closed());
        assert!(inner.length() >= Length::Finite(rat(3, 2)));
        let one = inner_measure_bound(&mi("(0,1)"), &rat(1, 4)).unwrap();
        assert!(one.length() >= Length::Finite(rat(3, 4)));
        assert!(inner_measure_bound(&Multirectangle::empty(1), &rat(1, 4)).unwrap().is_empty());
    }

    #[test]
    fn sections() {
        let sq = mi("[0,1]x[0,1]");
        assert_eq!(section(&sq, 0, &rat(1, 2)).unwrap().rects, mi("[0,1]"));
        let two = mi("[0,1]x[0,1]|[1,2]x[0,1]");
        let s = section(&two, 0, &int(1)).unwrap();
        assert_eq!(s.rects, mi("[0,1]|[0,1]"));
        assert!(!s.almost_disjoint);
        assert!(section(&sq, 0, &int(2)).unwrap().rects.is_empty());
    }

    #[test]
    fn complement_fills_box() {
        let a = mi("[0,1]x[0,1]|[2,3]x[1,2]");
        let bx = Rectangle::closed(&[(int(0), int(3)), (int(0), int(2))]);
        let c = complement_in_box(&a, &bx).unwrap();
        assert!(c.is_almost_disjoint());
        assert_eq!(c.length(), Length::Finite(int(4)));
    }
}
