//! Associated multirectangles: open sets of small total volume off which a
//! function is continuous.

use num_traits::{One, Zero};

use super::expr::{Cell, Coord, Exceptional, Expr, Face};
use super::QcError;
use crate::cantor::RationalEnumeration;
use crate::rational::{pow2_inv, Rational};
use crate::set::{Interval, Multirectangle, Rectangle};

/// Open cover of `{x ∈ box : x_axis ∈ ℚ}`. Component `n` (from 0) is a slab
/// around the `n`-th rational of the fixed enumeration with volume
/// `budget/2^{n+2}`, so the whole cover has volume exactly `budget/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalCover {
    pub axis: usize,
    pub extent: Vec<(Rational, Rational)>,
    pub budget: Rational,
}

fn transverse(extent: &Cell, axis: usize) -> Rational {
    let two = Rational::from_integer(2.into());
    extent.iter().enumerate().filter(|(j, _)| *j != axis).fold(Rational::one(), |acc, (_, (a, b))| acc * (b - a + &two))
}

fn inflated_side(a: &Rational, b: &Rational) -> Interval {
    Interval::open(a - Rational::one(), b + Rational::one())
}

impl RationalCover {
    pub fn total(&self) -> Rational {
        &self.budget / Rational::from_integer(2.into())
    }

    pub fn half_width(&self, n: usize) -> Rational {
        &self.budget * pow2_inv(n as u32 + 3) / transverse(&self.extent, self.axis)
    }

    pub fn centers(&self) -> impl Iterator<Item = Rational> {
        let (a, b) = &self.extent[self.axis];
        RationalEnumeration::new(a.clone(), b.clone())
    }

    /// The first `count` components.
    pub fn components(&self, count: usize) -> Vec<Rectangle> {
        self.centers()
            .take(count)
            .enumerate()
            .map(|(n, q)| {
                let h = self.half_width(n);
                let sides = self
                    .extent
                    .iter()
                    .enumerate()
                    .map(|(j, (a, b))| if j == self.axis { Interval::open(&q - &h, &q + &h) } else { inflated_side(a, b) })
                    .collect();
                Rectangle::new(sides)
            })
            .collect()
    }

    /// Volume still owed after the first `count` components.
    pub fn tail(&self, count: usize) -> Rational {
        &self.budget * pow2_inv(count as u32 + 1)
    }

    /// Every point with a rational `axis` coordinate in the box is covered.
    pub fn contains_exact(&self, x: &[Rational]) -> bool {
        x.iter().enumerate().all(|(j, v)| {
            let (a, b) = &self.extent[j];
            if j == self.axis {
                a <= v && v <= b
            } else {
                inflated_side(a, b).contains(v)
            }
        })
    }
}

/// A witness: finitely many open slabs plus rational covers.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub slabs: Multirectangle,
    pub covers: Vec<RationalCover>,
}

/// Components of each cover examined for sampled points.
const SAMPLED_COVER_PREFIX: usize = 256;

impl Witness {
    pub fn empty(dim: usize) -> Witness {
        Witness { slabs: Multirectangle::empty(dim), covers: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.slabs.dim()
    }

    /// Exact total volume `L(Δ)`, infinite covers included.
    pub fn length(&self) -> Rational {
        let slabs = self.slabs.length().finite().cloned().expect("slabs are bounded");
        self.covers.iter().fold(slabs, |acc, c| acc + c.total())
    }

    pub fn slab_length(&self) -> Rational {
        self.slabs.length().finite().cloned().expect("slabs are bounded")
    }

    pub fn union(mut self, other: Witness) -> Witness {
        self.slabs = self.slabs.concat(&other.slabs).expect("same dimension");
        self.covers.extend(other.covers);
        self
    }

    /// Finite truncation keeping the first `per_cover` components of each
    /// cover.
    pub fn truncate(&self, per_cover: usize) -> Multirectangle {
        let mut out = self.slabs.clone();
        for c in &self.covers {
            for r in c.components(per_cover) {
                out.push(r).expect("same dimension");
            }
        }
        out
    }

    /// Membership; sampled points are tested against a finite prefix of
    /// each cover, so `false` may be a false negative for them.
    pub fn contains(&self, x: &[Coord]) -> bool {
        if let Some(ex) = x.iter().map(|c| c.exact().cloned()).collect::<Option<Vec<_>>>() {
            return self.slabs.contains(&ex) || self.covers.iter().any(|c| c.contains_exact(&ex));
        }
        let p: Vec<f64> = x.iter().map(Coord::to_f64).collect();
        self.slabs.contains_f64(&p) || self.covers.iter().any(|c| c.components(SAMPLED_COVER_PREFIX).iter().any(|r| r.contains_f64(&p)))
    }
}

/// Open slab of volume `budget/2` around a face.
pub fn slab(face: &Face, budget: &Rational) -> Rectangle {
    let delta = budget / (Rational::from_integer(4.into()) * transverse(&face.extent, face.axis));
    let sides = face
        .extent
        .iter()
        .enumerate()
        .map(|(j, (a, b))| if j == face.axis { Interval::open(&face.value - &delta, &face.value + &delta) } else { inflated_side(a, b) })
        .collect();
    Rectangle::new(sides)
}

fn item_count(expr: &Expr, cell: &Cell) -> usize {
    expr.faces(cell).len() + expr.exceptional(cell).len()
}

/// Builds a witness of order `eps` on the closed box `cell`.
///
/// Sums, products, maxima and minima split the budget between their
/// operands; every other node spends `eps/2^{i+1}` on its `i`-th face or
/// exceptional set.
pub fn build(expr: &Expr, cell: &Cell, eps: &Rational) -> Result<Witness, QcError> {
    if eps <= &Rational::zero() {
        return Err(QcError::BadParams("epsilon must be positive".into()));
    }
    match expr {
        Expr::Sum(f, g) | Expr::Product(f, g) | Expr::Max(f, g) | Expr::Min(f, g) => {
            let (nf, ng) = (item_count(f, cell), item_count(g, cell));
            if nf == 0 {
                return build(g, cell, eps);
            }
            if ng == 0 {
                return build(f, cell, eps);
            }
            let half = eps / Rational::from_integer(2.into());
            Ok(build(f, cell, &half)?.union(build(g, cell, &half)?))
        }
        Expr::Neg(f) => build(f, cell, eps),
        _ => {
            let mut w = Witness::empty(cell.len());
            let faces = expr.faces(cell);
            let nf = faces.len();
            for (i, face) in faces.iter().enumerate() {
                w.slabs.push(slab(face, &(eps * pow2_inv(i as u32 + 1)))).expect("same dimension");
            }
            for (k, e) in expr.exceptional(cell).into_iter().enumerate() {
                let budget = eps * pow2_inv((nf + k) as u32 + 1);
                match e {
                    Exceptional::Plane(face) => w.slabs.push(slab(&face, &budget)).expect("same dimension"),
                    Exceptional::Rationals { axis, extent } => w.covers.push(RationalCover { axis, extent, budget }),
                    Exceptional::Everything => return Err(QcError::WitnessBudgetExceeded),
                }
            }
            Ok(w)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qc::expr::Atom;
    use crate::rational::{int, rat};

    #[test]
    fn dirichlet_cover_is_exact() {
        let d = Expr::atom(Atom::Dirichlet);
        let w = build(&d, &[(int(0), int(1))], &rat(1, 8)).unwrap();
        assert_eq!(w.length(), rat(1, 32));
        assert!(w.contains(&[Coord::Exact(rat(5, 7))]));
        let first = &w.covers[0].components(3);
        assert_eq!(first[0], Rectangle::new(vec![Interval::open(rat(-1, 128), rat(1, 128))]));
    }

    #[test]
    fn budgets_split() {
        let step = Expr::atom(Atom::Indicator(Multirectangle::parse("[0,1/2]").unwrap()));
        let f = Expr::Sum(Box::new(step.clone()), Box::new(Expr::atom(Atom::Dirichlet)));
        let cell = [(int(0), int(1))];
        for k in 1..=20 {
            let eps = pow2_inv(k);
            let w = build(&f, &cell, &eps).unwrap();
            assert!(w.length() < eps);
        }
        let c = Expr::Max(Box::new(Expr::constant(int(1))), Box::new(Expr::constant(int(2))));
        assert_eq!(build(&c, &cell, &rat(1, 2)).unwrap().length(), Rational::zero());
    }
}
