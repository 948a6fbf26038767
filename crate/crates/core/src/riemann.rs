//! Riemann integration with certified brackets.
//!
//! The region is cut at every breakpoint of the integrand. Each grid cell
//! is integrated exactly when the integrand is a polynomial there, by
//! composite two-point Gauss–Legendre when a fourth-derivative bound is
//! available, and otherwise by Darboux bisection with range enclosures.

use std::collections::VecDeque;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::qc::expr::{Cell, Coord, Expr};
use crate::qc::poly::MultiPoly;
use crate::rational::{to_f64, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiemannError {
    #[error("integrand is unbounded on the region")]
    UnboundedFunction,
    #[error("not Riemann integrable within budget: gap {gap} after {levels} refinement levels")]
    NotRiemannIntegrable { gap: f64, levels: u32 },
    #[error("bad parameters: {0}")]
    BadParams(String),
}

/// What the integration engine needs from an integrand.
pub trait Integrand {
    fn dim(&self) -> usize;
    /// Per-axis sorted cut coordinates, cell ends included.
    fn breakpoints(&self, cell: &Cell) -> Vec<Vec<Rational>>;
    fn range(&self, cell: &Cell) -> Option<(f64, f64)>;
    fn deriv_bound(&self, axis: usize, k: u32, cell: &Cell) -> Option<f64>;
    fn cell_poly(&self, cell: &Cell) -> Option<MultiPoly>;
    /// Value at an interior point of a breakpoint cell.
    fn eval_f64(&self, x: &[f64]) -> f64;
}

impl Integrand for Expr {
    fn dim(&self) -> usize {
        Expr::dim(self)
    }
    fn breakpoints(&self, cell: &Cell) -> Vec<Vec<Rational>> {
        Expr::breakpoints(self, cell)
    }
    fn range(&self, cell: &Cell) -> Option<(f64, f64)> {
        Expr::range(self, cell)
    }
    fn deriv_bound(&self, axis: usize, k: u32, cell: &Cell) -> Option<f64> {
        Expr::deriv_bound(self, axis, k, cell)
    }
    fn cell_poly(&self, cell: &Cell) -> Option<MultiPoly> {
        Expr::cell_poly(self, cell)
    }
    fn eval_f64(&self, x: &[f64]) -> f64 {
        let c: Vec<Coord> = x.iter().map(|&t| Coord::Sampled(t)).collect();
        self.eval(&c)
    }
}

/// Points `h = h_0 < … < h_N = k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub points: Vec<Rational>,
}

impl Partition {
    pub fn equispaced(h: &Rational, k: &Rational, n: u32) -> Partition {
        let n_r = Rational::from_integer(n.into());
        Partition { points: (0..=n).map(|i| h + (k - h) * Rational::from_integer(i.into()) / &n_r).collect() }
    }

    /// Largest gap.
    pub fn mesh(&self) -> Rational {
        self.points.windows(2).map(|w| &w[1] - &w[0]).max().unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DarbouxPair {
    pub lower: f64,
    pub upper: f64,
    /// `(m_i, M_i)` per cell.
    pub cells: Vec<(f64, f64)>,
}

impl DarbouxPair {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Lower and upper Darboux sums on the equispaced partition with `n`
/// cells.
pub fn darboux(f: &dyn Integrand, h: &Rational, k: &Rational, n: u32) -> Result<DarbouxPair, RiemannError> {
    if n == 0 || h >= k {
        return Err(RiemannError::BadParams("need n ≥ 1 and h < k".into()));
    }
    let p = Partition::equispaced(h, k, n);
    let mut cells = Vec::with_capacity(n as usize);
    let (mut lower, mut upper) = (0.0, 0.0);
    for w in p.points.windows(2) {
        let (m, big_m) = f.range(&[(w[0].clone(), w[1].clone())]).ok_or(RiemannError::UnboundedFunction)?;
        let len = to_f64(&(&w[1] - &w[0]));
        lower += m * len;
        upper += big_m * len;
        cells.push((m, big_m));
    }
    Ok(DarbouxPair { lower, upper, cells })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Gauss,
    Darboux,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RiemannValue {
    pub value: f64,
    /// Certified bound on `|value − ∫f|` (up to binary64 rounding).
    pub gap: f64,
    /// The exact value when every cell was integrated exactly.
    #[serde(serialize_with = "crate::rational::serialize_opt_rational")]
    pub exact: Option<Rational>,
    pub method: Method,
    pub cells: usize,
    pub levels: u32,
}

/// Refinement budget of the Darboux fallback.
pub const MAX_LEVELS: u32 = 20;
const LEAF_CAP: usize = 1 << 16;
const NODE_CAP: f64 = 4.0e6;

fn volume(cell: &Cell) -> Rational {
    cell.iter().fold(Rational::one(), |acc, (a, b)| acc * (b - a))
}

fn bisect(cell: &Cell) -> Vec<Vec<(Rational, Rational)>> {
    let two = Rational::from_integer(2.into());
    let mut out: Vec<Vec<(Rational, Rational)>> = vec![Vec::new()];
    for (a, b) in cell {
        let m = (a + b) / &two;
        let mut next = Vec::with_capacity(out.len() * 2);
        for prefix in &out {
            for half in [(a.clone(), m.clone()), (m.clone(), b.clone())] {
                let mut v = prefix.clone();
                v.push(half);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

enum Gauss {
    Done(f64, f64),
    /// The rule would need too many nodes; the axis needing most panels.
    TooLarge(usize),
    NoBound,
}

/// Composite two-point Gauss–Legendre on a smooth cell.
fn gauss(f: &dyn Integrand, cell: &Cell, tol: f64) -> Gauss {
    match gauss_inner(f, cell, tol) {
        Ok((v, e)) => Gauss::Done(v, e),
        Err(Some(axis)) => Gauss::TooLarge(axis),
        Err(None) => Gauss::NoBound,
    }
}

fn gauss_inner(f: &dyn Integrand, cell: &Cell, tol: f64) -> Result<(f64, f64), Option<usize>> {
    let d = cell.len();
    let vol = to_f64(&volume(cell));
    let mut panels = Vec::with_capacity(d);
    let mut err = 0.0;
    for axis in 0..d {
        let m4 = f.deriv_bound(axis, 4, cell).ok_or(None)?;
        if !m4.is_finite() {
            return Err(None);
        }
        let w = to_f64(&(&cell[axis].1 - &cell[axis].0));
        let n = if m4 == 0.0 || tol <= 0.0 {
            if m4 == 0.0 {
                1.0
            } else {
                return Err(None);
            }
        } else {
            let h = (4320.0 * tol / (d as f64 * vol * m4)).powf(0.25);
            (w / h).ceil().max(1.0)
        };
        let h = w / n;
        err += vol * h.powi(4) * m4 / 4320.0;
        panels.push(n);
    }
    let nodes: f64 = panels.iter().map(|n| 2.0 * n).product();
    if nodes > NODE_CAP || !nodes.is_finite() {
        let axis = (0..d).max_by(|&i, &j| panels[i].total_cmp(&panels[j])).unwrap_or(0);
        return Err(Some(axis));
    }
    let offset = 0.5 / 3f64.sqrt();
    let axes: Vec<Vec<(f64, f64)>> = (0..d)
        .map(|axis| {
            let a = to_f64(&cell[axis].0);
            let w = to_f64(&(&cell[axis].1 - &cell[axis].0));
            let n = panels[axis] as usize;
            let h = w / n as f64;
            (0..n)
                .flat_map(|i| {
                    let c = a + (i as f64 + 0.5) * h;
                    [(c - offset * h, h / 2.0), (c + offset * h, h / 2.0)]
                })
                .collect()
        })
        .collect();
    let mut total = 0.0;
    let mut abs_total = 0.0;
    let mut idx = vec![0usize; d];
    let sizes: Vec<usize> = axes.iter().map(Vec::len).collect();
    let mut x = vec![0.0; d];
    loop {
        let mut wgt = 1.0;
        for axis in 0..d {
            let (p, w) = axes[axis][idx[axis]];
            x[axis] = p;
            wgt *= w;
        }
        let v = f.eval_f64(&x) * wgt;
        total += v;
        abs_total += v.abs();
        if !crate::set::advance(&mut idx, &sizes) {
            break;
        }
    }
    Ok((total, err + abs_total * nodes.sqrt() * f64::EPSILON))
}

/// Splits one axis, at a rational near the geometric mean when the side
/// spans several octaves on one side of 0, else at the midpoint.
fn split_axis(cell: &Cell, axis: usize) -> Vec<Vec<(Rational, Rational)>> {
    let (a, b) = &cell[axis];
    let two = Rational::from_integer(2.into());
    let mut cut = (a + b) / &two;
    let (fa, fb) = (to_f64(a), to_f64(b));
    if fa > 0.0 && fb > 4.0 * fa {
        cut = crate::rational::simplest_in(
            &crate::rational::from_f64((fa * fb).sqrt() * 0.9).expect("finite"),
            &crate::rational::from_f64((fa * fb).sqrt() * 1.1).expect("finite"),
        );
    } else if fb < 0.0 && fa < 4.0 * fb {
        cut = -crate::rational::simplest_in(
            &crate::rational::from_f64((fa * fb).sqrt() * 0.9).expect("finite"),
            &crate::rational::from_f64((fa * fb).sqrt() * 1.1).expect("finite"),
        );
    }
    [(a.clone(), cut.clone()), (cut, b.clone())]
        .into_iter()
        .map(|half| {
            let mut c = cell.to_vec();
            c[axis] = half;
            c
        })
        .collect()
}

/// Integrates over the closed box `region` to within `tol`.
pub fn riemann_integrate(f: &dyn Integrand, region: &Cell, tol: f64) -> Result<RiemannValue, RiemannError> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(RiemannError::BadParams("tolerance must be positive".into()));
    }
    if region.len() != f.dim() {
        return Err(RiemannError::BadParams(format!("region has dimension {}, integrand {}", region.len(), f.dim())));
    }
    let total_vol = volume(region);
    if total_vol.is_zero() {
        return Ok(RiemannValue { value: 0.0, gap: 0.0, exact: Some(Rational::zero()), method: Method::Exact, cells: 0, levels: 0 });
    }
    let total_vol_f = to_f64(&total_vol);
    let cuts = f.breakpoints(region);
    let sizes: Vec<usize> = cuts.iter().map(|c| c.len() - 1).collect();
    let mut queue: VecDeque<(Vec<(Rational, Rational)>, u32)> = VecDeque::new();
    let mut idx = vec![0usize; region.len()];
    loop {
        let cell: Vec<(Rational, Rational)> = idx.iter().enumerate().map(|(a, &i)| (cuts[a][i].clone(), cuts[a][i + 1].clone())).collect();
        queue.push_back((cell, 0));
        if !crate::set::advance(&mut idx, &sizes) {
            break;
        }
    }
    let mut exact_sum = Rational::zero();
    let mut all_exact = true;
    let mut used = [false; 3];
    let mut value = 0.0;
    let mut gap = 0.0;
    let mut cells = 0usize;
    let mut levels = 0u32;
    while let Some((cell, level)) = queue.pop_front() {
        levels = levels.max(level);
        let vol = volume(&cell);
        if vol.is_zero() {
            continue;
        }
        if let Some(p) = f.cell_poly(&cell) {
            exact_sum += p.integrate_box(&cell);
            used[0] = true;
            cells += 1;
            continue;
        }
        let vol_f = to_f64(&vol);
        let share = tol * vol_f / total_vol_f;
        match gauss(f, &cell, share / 2.0) {
            Gauss::Done(v, e) => {
                value += v;
                gap += e;
                all_exact = false;
                used[1] = true;
                cells += 1;
                continue;
            }
            Gauss::TooLarge(axis) if level < MAX_LEVELS => {
                for child in split_axis(&cell, axis) {
                    queue.push_back((child, level + 1));
                }
                continue;
            }
            _ => {}
        }
        let (m, big_m) = f.range(&cell).ok_or(RiemannError::UnboundedFunction)?;
        if (big_m - m) * vol_f <= share || level >= MAX_LEVELS || queue.len() >= LEAF_CAP {
            if (big_m - m) * vol_f > share {
                let rest: f64 = queue.iter().map(|(c, _)| f.range(c).map_or(f64::INFINITY, |(lo, hi)| (hi - lo) * to_f64(&volume(c)))).sum();
                return Err(RiemannError::NotRiemannIntegrable { gap: gap + (big_m - m) * vol_f + rest, levels: level });
            }
            value += (m + big_m) / 2.0 * vol_f;
            gap += (big_m - m) / 2.0 * vol_f;
            all_exact = false;
            used[2] = true;
            cells += 1;
            continue;
        }
        for child in bisect(&cell) {
            queue.push_back((child, level + 1));
        }
    }
    let method = match used {
        [true, false, false] | [false, false, false] => Method::Exact,
        [false, true, false] => Method::Gauss,
        [false, false, true] => Method::Darboux,
        _ => Method::Mixed,
    };
    let exact = all_exact.then(|| exact_sum.clone());
    Ok(RiemannValue { value: value + to_f64(&exact_sum), gap, exact, method, cells, levels })
}

/// Upper estimates of `Ω(f, B(x0, r))` for each radius, made
/// nonincreasing.
pub fn oscillation_at(f: &dyn Integrand, x0: &[Rational], radii: &[Rational]) -> Result<Vec<f64>, RiemannError> {
    let mut out: Vec<f64> = Vec::with_capacity(radii.len());
    for r in radii {
        if r <= &Rational::zero() {
            return Err(RiemannError::BadParams("radii must be positive".into()));
        }
        let cell: Vec<(Rational, Rational)> = x0.iter().map(|c| (c - r, c + r)).collect();
        let (lo, hi) = f.range(&cell).ok_or(RiemannError::UnboundedFunction)?;
        let w = hi - lo;
        out.push(out.last().map_or(w, |&prev: &f64| prev.min(w)));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DiniOutcome {
    pub pass: bool,
    /// Cells of the best partition tried.
    pub n: u32,
    /// Total length of the cells with oscillation at least `α`.
    #[serde(serialize_with = "crate::rational::serialize_rational")]
    pub heavy_length: Rational,
    pub heavy_cells: Vec<usize>,
}

/// Looks for an equispaced partition with `N = 2^k ≤ max_n` cells whose
/// cells of oscillation `≥ α` have total length `< ε`.
pub fn dini_test(f: &dyn Integrand, h: &Rational, k: &Rational, alpha: &Rational, eps: &Rational, max_n: u32) -> Result<DiniOutcome, RiemannError> {
    if alpha <= &Rational::zero() || eps <= &Rational::zero() || h >= k || max_n == 0 {
        return Err(RiemannError::BadParams("need α > 0, ε > 0, h < k, maxN ≥ 1".into()));
    }
    let alpha_f = to_f64(alpha);
    let mut best: Option<DiniOutcome> = None;
    let mut n = 1u32;
    while n <= max_n {
        let pair = darboux(f, h, k, n)?;
        let heavy: Vec<usize> = pair.cells.iter().enumerate().filter(|(_, (m, big_m))| big_m - m >= alpha_f).map(|(i, _)| i).collect();
        let heavy_length = (k - h) * Rational::new(heavy.len().into(), n.into());
        let outcome = DiniOutcome { pass: &heavy_length < eps, n, heavy_length, heavy_cells: heavy };
        if outcome.pass {
            return Ok(outcome);
        }
        if best.as_ref().is_none_or(|b| outcome.heavy_length < b.heavy_length) {
            best = Some(outcome);
        }
        n = match n.checked_mul(2) {
            Some(v) => v,
            None => break,
        };
    }
    Ok(best.expect("at least one partition tried"))
}

/// `M·L(Δ)`: the bound on `|∫f|` for `|f| ≤ M` vanishing off `I_Δ`.
pub fn riemann_zero_bound(bound: &Rational, delta: &crate::set::Multirectangle) -> Option<Rational> {
    delta.length().finite().map(|l| bound * l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qc::dsl::parse_expr;
    use crate::rational::{int, rat};

    fn unit() -> Vec<(Rational, Rational)> {
        vec![(int(0), int(1))]
    }

    #[test]
    fn darboux_examples() {
        let c = parse_expr("const:3").unwrap();
        let p = darboux(&c, &int(0), &int(2), 5).unwrap();
        assert!((p.lower - 6.0).abs() < 1e-12 && p.gap() == 0.0);
        let x = parse_expr("id").unwrap();
        let p = darboux(&x, &int(0), &int(1), 4).unwrap();
        assert_eq!((p.lower, p.upper), (0.375, 0.625));
        let d = parse_expr("dirichlet").unwrap();
        let p = darboux(&d, &int(0), &int(1), 16).unwrap();
        assert_eq!((p.lower, p.upper), (0.0, 1.0));
    }

    #[test]
    fn refinement_is_monotone() {
        let f = parse_expr("cos-power:1,2").unwrap();
        let mut prev = darboux(&f, &int(0), &int(1), 1).unwrap();
        for n in [2, 4, 8, 16, 32] {
            let next = darboux(&f, &int(0), &int(1), n).unwrap();
            assert!(next.lower >= prev.lower - 1e-15 && next.upper <= prev.upper + 1e-15);
            prev = next;
        }
    }

    #[test]
    fn integrate_examples() {
        let sq = parse_expr("poly:0,0,1").unwrap();
        let r = riemann_integrate(&sq, &unit(), 1e-6).unwrap();
        assert_eq!(r.exact, Some(rat(1, 3)));
        let step = parse_expr("step:0,1/2,1,2,5").unwrap();
        assert_eq!(riemann_integrate(&step, &unit(), 1e-8).unwrap().exact, Some(rat(7, 2)));
        let d = parse_expr("dirichlet").unwrap();
        match riemann_integrate(&d, &unit(), 1e-3) {
            Err(RiemannError::NotRiemannIntegrable { gap, .. }) => assert!((gap - 1.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        let c = parse_expr("cos-power:1,1").unwrap();
        let r = riemann_integrate(&c, &unit(), 1e-8).unwrap();
        assert!((r.value - 0.5).abs() <= r.gap + 1e-12 && r.gap <= 1e-8);
        let m = parse_expr("max(poly:0,0,1,const:1/4)").unwrap();
        let r = riemann_integrate(&m, &unit(), 1e-8).unwrap();
        assert!((r.value - (1.0 / 8.0 + 7.0 / 24.0)).abs() <= 1e-8, "{r:?}");
    }

    #[test]
    fn gauss_on_tensor() {
        let f = parse_expr("exp-abs-y").unwrap();
        let cell = vec![(int(0), int(1)), (int(-2), int(2))];
        let r = riemann_integrate(&f, &cell, 1e-9).unwrap();
        let truth = 2.0 * (1.0 - (-2f64).exp());
        assert!((r.value - truth).abs() <= r.gap + 1e-12, "{r:?}");
    }

    #[test]
    fn oscillation_and_dini() {
        let t = parse_expr("thomae").unwrap();
        let radii: Vec<Rational> = (4..12).map(|k| rat(1, 1 << k)).collect();
        let osc = oscillation_at(&t, &[rat(2, 3)], &radii).unwrap();
        assert!((osc.last().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(osc.windows(2).all(|w| w[1] <= w[0]));
        let d = parse_expr("dirichlet").unwrap();
        assert!(oscillation_at(&d, &[rat(1, 2)], &radii).unwrap().iter().all(|&w| w == 1.0));
        let pass = dini_test(&t, &int(0), &int(1), &rat(1, 5), &rat(1, 10), 1 << 12).unwrap();
        assert!(pass.pass);
        let fail = dini_test(&d, &int(0), &int(1), &rat(1, 2), &rat(1, 2), 256).unwrap();
        assert!(!fail.pass);
        assert_eq!(fail.heavy_length, int(1));
    }

    #[test]
    fn zero_bound() {
        let delta = crate::set::Multirectangle::parse("(0,1/8)").unwrap();
        assert_eq!(riemann_zero_bound(&int(1), &delta), Some(rat(1, 8)));
    }
}
