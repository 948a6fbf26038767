//! Piecewise-linear functions of one variable on a partition of the line.

use num_traits::Zero;

use crate::rational::{Endpoint, Rational};
use crate::set::{Interval, Topology};

/// `a + b x` on each piece; the pieces partition the line.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    pieces: Vec<(Interval, Rational, Rational)>,
}

impl PiecewiseLinear {
    /// Builds from increasing breakpoints. `lines[i]` applies on the i-th
    /// piece; `closed_left_piece[j]` says breakpoint `j` belongs to the
    /// piece on its left.
    pub fn new(breaks: &[Rational], closed_left_piece: &[bool], lines: Vec<(Rational, Rational)>) -> PiecewiseLinear {
        assert_eq!(lines.len(), breaks.len() + 1);
        assert_eq!(closed_left_piece.len(), breaks.len());
        let mut pieces = Vec::with_capacity(lines.len());
        for (i, (a, b)) in lines.into_iter().enumerate() {
            let lo = if i == 0 { Endpoint::NegInf } else { Endpoint::Finite(breaks[i - 1].clone()) };
            let hi = if i == breaks.len() { Endpoint::PosInf } else { Endpoint::Finite(breaks[i].clone()) };
            let lo_closed = i > 0 && !closed_left_piece[i - 1];
            let hi_closed = i < breaks.len() && closed_left_piece[i];
            let iv = Interval::new(lo, hi, Topology::from_flags(lo_closed, hi_closed)).expect("ordered breaks");
            pieces.push((iv, a, b));
        }
        pieces.retain(|(iv, _, _)| !iv.is_empty());
        PiecewiseLinear { pieces }
    }

    /// Piecewise constant with the given values.
    pub fn constant_pieces(breaks: &[Rational], closed_left_piece: &[bool], values: &[Rational]) -> PiecewiseLinear {
        let lines = values.iter().map(|v| (v.clone(), Rational::zero())).collect();
        PiecewiseLinear::new(breaks, closed_left_piece, lines)
    }

    fn piece_at(&self, x: &Rational) -> &(Interval, Rational, Rational) {
        self.pieces.iter().find(|(iv, _, _)| iv.contains(x)).expect("pieces partition the line")
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let (_, a, b) = self.piece_at(x);
        a + b * x
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        for (iv, a, b) in &self.pieces {
            if iv.contains_f64(x) {
                return crate::rational::to_f64(a) + crate::rational::to_f64(b) * x;
            }
        }
        0.0
    }

    fn boundaries(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.pieces.iter().enumerate().skip(1).filter_map(|(i, (iv, _, _))| iv.lo().finite().map(|p| (i, p)))
    }

    /// Points where left and right limits differ.
    pub fn jumps(&self) -> Vec<Rational> {
        self.boundaries()
            .filter(|(i, p)| {
                let (_, a0, b0) = &self.pieces[i - 1];
                let (_, a1, b1) = &self.pieces[*i];
                a0 + b0 * *p != a1 + b1 * *p
            })
            .map(|(_, p)| p.clone())
            .collect()
    }

    /// Continuous breakpoints where the slope changes.
    pub fn kinks(&self) -> Vec<Rational> {
        self.boundaries()
            .filter(|(i, p)| {
                let (_, a0, b0) = &self.pieces[i - 1];
                let (_, a1, b1) = &self.pieces[*i];
                a0 + b0 * *p == a1 + b1 * *p && b0 != b1
            })
            .map(|(_, p)| p.clone())
            .collect()
    }

    /// Exact range over the closed interval `[lo, hi]` (closures of the
    /// pieces, so a valid enclosure).
    pub fn range(&self, lo: &Rational, hi: &Rational) -> (Rational, Rational) {
        let cell = Interval::closed(lo.clone(), hi.clone());
        let mut out: Option<(Rational, Rational)> = None;
        for (iv, a, b) in &self.pieces {
            if let Some(part) = iv.intersect(&cell) {
                let (p, q) = part.bounds().expect("bounded cell");
                for x in [p, q] {
                    let y = a + b * x;
                    out = Some(match out {
                        None => (y.clone(), y),
                        Some((l, h)) => (l.min(y.clone()), h.max(y)),
                    });
                }
            }
        }
        out.expect("cell meets some piece")
    }

    /// Line on the piece containing `x`.
    pub fn line_at(&self, x: &Rational) -> (Rational, Rational) {
        let (_, a, b) = self.piece_at(x);
        (a.clone(), b.clone())
    }

    pub fn max_abs_slope(&self) -> Rational {
        self.pieces.iter().map(|(_, _, b)| if b < &Rational::zero() { -b.clone() } else { b.clone() }).max().unwrap_or_default()
    }
}
