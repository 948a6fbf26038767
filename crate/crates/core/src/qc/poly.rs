//! Exact multivariate polynomials with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};

use crate::rational::{to_f64, Rational};

/// `Σ c_e x^e`, keyed by exponent vectors with trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MultiPoly {
    terms: BTreeMap<Vec<u32>, Rational>,
}

fn trim(mut e: Vec<u32>) -> Vec<u32> {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

fn pow(x: &Rational, e: u32) -> Rational {
    Pow::pow(x, e)
}

impl MultiPoly {
    pub fn zero() -> MultiPoly {
        MultiPoly::default()
    }

    pub fn constant(c: Rational) -> MultiPoly {
        let mut p = MultiPoly::zero();
        p.add_term(Vec::new(), c);
        p
    }

    /// `Σ_i coeffs[i] x_axis^i`.
    pub fn univariate(axis: usize, coeffs: &[Rational]) -> MultiPoly {
        let mut p = MultiPoly::zero();
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0u32; axis + 1];
            e[axis] = i as u32;
            p.add_term(e, c.clone());
        }
        p
    }

    /// `a + b x_axis`.
    pub fn linear(axis: usize, a: Rational, b: Rational) -> MultiPoly {
        MultiPoly::univariate(axis, &[a, b])
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = trim(e);
        let slot = self.terms.entry(e.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn degree_in(&self, axis: usize) -> u32 {
        self.terms.keys().map(|e| e.get(axis).copied().unwrap_or(0)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn neg(&self) -> MultiPoly {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Rational) -> MultiPoly {
        let mut p = MultiPoly::zero();
        for (e, c) in &self.terms {
            p.add_term(e.clone(), c * k);
        }
        p
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let mut p = MultiPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let n = ea.len().max(eb.len());
                let e = (0..n).map(|i| ea.get(i).unwrap_or(&0) + eb.get(i).unwrap_or(&0)).collect();
                p.add_term(e, ca * cb);
            }
        }
        p
    }

    /// Renames variable `i` to `i + offset`.
    pub fn shift_axes(&self, offset: usize) -> MultiPoly {
        let mut p = MultiPoly::zero();
        for (e, c) in &self.terms {
            let mut ne = vec![0u32; offset];
            ne.extend_from_slice(e);
            p.add_term(ne, c.clone());
        }
        p
    }

    /// `p(x − α)`.
    pub fn translate(&self, alpha: &[Rational]) -> MultiPoly {
        let mut out = MultiPoly::constant(Rational::zero());
        for (e, c) in &self.terms {
            let mut term = MultiPoly::constant(c.clone());
            for (axis, &k) in e.iter().enumerate() {
                let a = alpha.get(axis).cloned().unwrap_or_else(Rational::zero);
                let base = MultiPoly::linear(axis, -a, Rational::one());
                for _ in 0..k {
                    term = term.mul(&base);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Substitutes `x_axis = v`, keeping the variable slot (now unused).
    pub fn fix(&self, axis: usize, v: &Rational) -> MultiPoly {
        let mut p = MultiPoly::zero();
        for (e, c) in &self.terms {
            let k = e.get(axis).copied().unwrap_or(0);
            let mut ne = e.clone();
            if axis < ne.len() {
                ne[axis] = 0;
            }
            p.add_term(ne, c * pow(v, k));
        }
        p
    }

    /// Removes variable slot `axis` (which must not occur), renaming the
    /// later variables down by one.
    pub fn remove_axis(&self, axis: usize) -> MultiPoly {
        let mut p = MultiPoly::zero();
        for (e, c) in &self.terms {
            debug_assert_eq!(e.get(axis).copied().unwrap_or(0), 0);
            let mut ne = e.clone();
            if axis < ne.len() {
                ne.remove(axis);
            }
            p.add_term(ne, c.clone());
        }
        p
    }

    pub fn derivative(&self, axis: usize) -> MultiPoly {
        let mut p = MultiPoly::zero();
        for (e, c) in &self.terms {
            let k = e.get(axis).copied().unwrap_or(0);
            if k == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[axis] -= 1;
            p.add_term(ne, c * Rational::from_integer(BigInt::from(k)));
        }
        p
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().enumerate().fold(c.clone(), |acc, (i, &k)| if k == 0 { acc } else { acc * pow(&x[i], k) }))
            .fold(Rational::zero(), |a, b| a + b)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(e, c)| e.iter().enumerate().fold(to_f64(c), |acc, (i, &k)| acc * x[i].powi(k as i32))).sum()
    }

    /// Exact integral over the box `∏ [a_i, b_i]` (axes beyond the box
    /// must not occur).
    pub fn integrate_box(&self, bounds: &[(Rational, Rational)]) -> Rational {
        let vol_rest = |skip: usize| -> Rational { bounds.iter().skip(skip).map(|(a, b)| b - a).fold(Rational::one(), |x, y| x * y) };
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut acc = c.clone();
                for (i, (a, b)) in bounds.iter().enumerate() {
                    let k = e.get(i).copied().unwrap_or(0);
                    let k1 = k + 1;
                    acc *= (pow(b, k1) - pow(a, k1)) / Rational::from_integer(BigInt::from(k1));
                }
                debug_assert!(e.len() <= bounds.len());
                acc * vol_rest(bounds.len())
            })
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// Integrates out variable `axis` over `[a,b]`.
    pub fn integrate_axis(&self, axis: usize, a: &Rational, b: &Rational) -> MultiPoly {
        let mut p = MultiPoly::zero();
        for (e, c) in &self.terms {
            let k1 = e.get(axis).copied().unwrap_or(0) + 1;
            let mut ne = e.clone();
            if axis < ne.len() {
                ne[axis] = 0;
            }
            let f = (pow(b, k1) - pow(a, k1)) / Rational::from_integer(BigInt::from(k1));
            p.add_term(ne, c * f);
        }
        p
    }

    /// Rational interval enclosure of the polynomial on a closed box,
    /// by monomial-wise interval products.
    pub fn enclose(&self, cell: &[(Rational, Rational)]) -> (Rational, Rational) {
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for (e, c) in &self.terms {
            let mut m = (Rational::one(), Rational::one());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let (a, b) = &cell[i];
                let (pa, pb) = (pow(a, k), pow(b, k));
                let r = if k % 2 == 0 && a.is_negative() && b.is_positive() {
                    (Rational::zero(), pa.max(pb))
                } else if pa <= pb {
                    (pa, pb)
                } else {
                    (pb, pa)
                };
                m = interval_mul(&m, &r);
            }
            let t = interval_mul(&m, &(c.clone(), c.clone()));
            lo += t.0;
            hi += t.1;
        }
        (lo, hi)
    }

    /// Tight enclosure: exact when the polynomial is monotone in every
    /// coordinate on the cell, refined by bisection otherwise.
    pub fn range(&self, cell: &[(Rational, Rational)], depth: u32) -> (Rational, Rational) {
        let d = cell.len();
        let monotone = (0..d).all(|axis| {
            let (lo, hi) = self.derivative(axis).enclose(cell);
            !lo.is_negative() || !hi.is_positive()
        });
        if monotone {
            let mut lo: Option<Rational> = None;
            let mut hi: Option<Rational> = None;
            for mask in 0..(1usize << d) {
                let v: Vec<Rational> = (0..d).map(|i| if mask >> i & 1 == 0 { cell[i].0.clone() } else { cell[i].1.clone() }).collect();
                let y = self.eval(&v);
                if lo.as_ref().is_none_or(|l| &y < l) {
                    lo = Some(y.clone());
                }
                if hi.as_ref().is_none_or(|h| &y > h) {
                    hi = Some(y);
                }
            }
            return (lo.unwrap_or_else(Rational::zero), hi.unwrap_or_else(Rational::zero));
        }
        if depth == 0 {
            return self.enclose(cell);
        }
        let axis = (0..d).max_by(|&i, &j| (&cell[i].1 - &cell[i].0).cmp(&(&cell[j].1 - &cell[j].0))).expect("nonempty cell");
        let mid = (&cell[axis].0 + &cell[axis].1) / Rational::from_integer(2.into());
        let mut left = cell.to_vec();
        left[axis].1 = mid.clone();
        let mut right = cell.to_vec();
        right[axis].0 = mid;
        let (a, b) = self.range(&left, depth - 1);
        let (c, e) = self.range(&right, depth - 1);
        (a.min(c), b.max(e))
    }
}

pub(crate) fn interval_mul(a: &(Rational, Rational), b: &(Rational, Rational)) -> (Rational, Rational) {
    let p = [&a.0 * &b.0, &a.0 * &b.1, &a.1 * &b.0, &a.1 * &b.1];
    let lo = p.iter().min().cloned().expect("four products");
    let hi = p.iter().max().cloned().expect("four products");
    (lo, hi)
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let vars: Vec<String> =
                    e.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| if k == 1 { format!("x{i}") } else { format!("x{i}^{k}") }).collect();
                if vars.is_empty() {
                    c.to_string()
                } else {
                    format!("{c}*{}", vars.join("*"))
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn algebra_and_integrals() {
        let x = MultiPoly::univariate(0, &[int(0), int(1)]);
        let y = MultiPoly::univariate(1, &[int(0), int(1)]);
        let xy = x.mul(&y);
        let unit = [(int(0), int(1)), (int(0), int(1))];
        assert_eq!(xy.integrate_box(&unit), rat(1, 4));
        let inner = xy.integrate_axis(1, &int(0), &int(1));
        assert_eq!(inner, x.scale(&rat(1, 2)));
        let sq = x.mul(&x);
        assert_eq!(sq.integrate_box(&[(int(0), int(1))]), rat(1, 3));
        assert_eq!(sq.translate(&[int(1)]).eval(&[int(3)]), int(4));
        assert_eq!(xy.fix(0, &int(2)), y.scale(&int(2)));
    }

    #[test]
    fn ranges() {
        let p = MultiPoly::univariate(0, &[int(0), int(-1), int(1)]);
        let (lo, hi) = p.range(&[(int(0), int(1))], 12);
        assert!(lo <= rat(-1, 4) && lo > rat(-1, 4) - rat(1, 100));
        assert_eq!(hi, int(0));
        let x = MultiPoly::univariate(0, &[int(0), int(1)]);
        assert_eq!(x.range(&[(rat(1, 4), rat(1, 2))], 0), (rat(1, 4), rat(1, 2)));
    }
}
