//! Tietze extensions from closed sets.
//!
//! In one dimension the extension interpolates linearly across each gap of
//! `K` and is constant on the tails. In higher dimension it is the dyadic
//! average `F_n(x) = 2^{-n} Σ_k M(x, (1 + k/2^n) ρ(x))` of ball maxima,
//! where `ρ(x) = dist(x, K)` and `M(x, r)` is the maximum of `f` over
//! `K ∩ D(x, r)`.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::qc::{QcError, QcFunction};
use crate::rational::{to_f64, Endpoint, Rational};
use crate::set::{complement_in_box, disjointify_1d, Interval, Multirectangle, Rectangle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TietzeError {
    #[error("the closed set K is empty")]
    EmptyK,
    #[error("the box must be closed and bounded")]
    BadBox,
    #[error("the removed set must be open")]
    RemovedNotOpen,
    #[error("point lies outside the box")]
    OutsideBox,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("sampler cannot certify the ball maxima: bracket width {width} exceeds {tol}")]
    SamplerTooCoarse { width: f64, tol: f64 },
    #[error(transparent)]
    Qc(#[from] QcError),
}

/// `K = box ∖ I_removed` for a closed bounded box and an open
/// multirectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedComplementDomain {
    bx: Rectangle,
    removed: Multirectangle,
    cells: Multirectangle,
    bounds: Vec<(Rational, Rational)>,
}

impl ClosedComplementDomain {
    pub fn new(bx: Rectangle, removed: Multirectangle) -> Result<ClosedComplementDomain, TietzeError> {
        let bounds = match bx.rational_bounds() {
            Some(b) if bx.is_closed() => b,
            _ => return Err(TietzeError::BadBox),
        };
        if removed.dim() != bx.dim() && !removed.is_empty() {
            return Err(TietzeError::DimensionMismatch);
        }
        if !removed.is_open() {
            return Err(TietzeError::RemovedNotOpen);
        }
        let removed = if removed.is_empty() { Multirectangle::empty(bx.dim()) } else { removed };
        let cells = complement_in_box(&removed, &bx).map_err(|_| TietzeError::BadBox)?;
        let dom = ClosedComplementDomain { bx, removed, cells, bounds };
        if dom.dim() == 1 {
            dom.gaps_1d()?;
        } else if dom.cells.is_empty() {
            return Err(TietzeError::EmptyK);
        }
        Ok(dom)
    }

    pub fn dim(&self) -> usize {
        self.bx.dim()
    }

    pub fn bx(&self) -> &Rectangle {
        &self.bx
    }

    pub fn removed(&self) -> &Multirectangle {
        &self.removed
    }

    /// Closed cells whose union is `K` (lower-dimensional slivers of `K`
    /// excepted when `d ≥ 2`).
    pub fn cells(&self) -> &Multirectangle {
        &self.cells
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.bx.contains(x) && !self.removed.contains(x)
    }

    /// Merged open gaps `(a, b)` meeting the box; an endpoint outside the
    /// box marks an unbounded side.
    fn gaps_1d(&self) -> Result<Vec<(Rational, Rational)>, TietzeError> {
        let (lo, hi) = &self.bounds[0];
        let merged = disjointify_1d(&self.removed);
        let mut gaps = Vec::new();
        for iv in merged.intervals() {
            let a = match iv.lo() {
                Endpoint::Finite(v) => v.clone(),
                _ => lo - Rational::one(),
            };
            let b = match iv.hi() {
                Endpoint::Finite(v) => v.clone(),
                _ => hi + Rational::one(),
            };
            if &b <= lo || &a >= hi {
                continue;
            }
            if &a < lo && &b > hi {
                return Err(TietzeError::EmptyK);
            }
            gaps.push((a, b));
        }
        Ok(gaps)
    }

    /// Exact `dist(x, K)²`.
    pub fn rho_sq(&self, x: &[Rational]) -> Result<Rational, TietzeError> {
        if x.len() != self.dim() {
            return Err(TietzeError::DimensionMismatch);
        }
        if self.contains(x) {
            return Ok(Rational::zero());
        }
        self.cells.rects().iter().map(|c| c.distance_sq(x)).min().ok_or(TietzeError::EmptyK)
    }
}

/// `dist(x, K)`, rounded from the exact square.
pub fn rho(k: &ClosedComplementDomain, x: &[Rational]) -> Result<f64, TietzeError> {
    Ok(to_f64(&k.rho_sq(x)?).sqrt())
}

/// Values that can be interpolated linearly.
pub trait Lerp: Clone {
    /// `λ·a + (1 − λ)·b`.
    fn lerp(a: &Self, b: &Self, lambda: &Rational) -> Self;
}

impl Lerp for Rational {
    fn lerp(a: &Self, b: &Self, lambda: &Rational) -> Self {
        lambda * a + (Rational::one() - lambda) * b
    }
}

impl Lerp for f64 {
    fn lerp(a: &Self, b: &Self, lambda: &Rational) -> Self {
        let l = to_f64(lambda);
        l * a + (1.0 - l) * b
    }
}

/// The 1D extension of `f|_K` evaluated at `x` in the box.
pub fn extend_1d<T: Lerp>(k: &ClosedComplementDomain, f: impl Fn(&Rational) -> T, x: &Rational) -> Result<T, TietzeError> {
    if k.dim() != 1 {
        return Err(TietzeError::DimensionMismatch);
    }
    let (lo, hi) = &k.bounds[0];
    if x < lo || x > hi {
        return Err(TietzeError::OutsideBox);
    }
    for (a, b) in k.gaps_1d()? {
        if &a < x && x < &b {
            if &a < lo {
                return Ok(f(&b));
            }
            if &b > hi {
                return Ok(f(&a));
            }
            let lambda = (&b - x) / (&b - &a);
            return Ok(T::lerp(&f(&a), &f(&b), &lambda));
        }
    }
    Ok(f(x))
}

/// The extension of a quasicontinuous function restricted to `K`.
///
/// When `K` avoids an exceptional set the function agrees on `K` with its
/// generic part, which is what gets interpolated.
pub fn extend_qc_1d(f: &QcFunction, k: &ClosedComplementDomain, x: &Rational) -> Result<f64, TietzeError> {
    if f.dim() != 1 {
        return Err(TietzeError::DimensionMismatch);
    }
    let g = f.generic();
    extend_1d(k, |t| g.expr.eval(&[crate::qc::Coord::Exact(t.clone())]), x)
}

/// A compact set that can be sampled for ball maxima.
pub trait CompactSet {
    fn dim(&self) -> usize;
    fn contains_f64(&self, x: &[f64]) -> bool;
    fn rho_f64(&self, x: &[f64]) -> f64;
    /// Points of `K` such that every point of `K` lies within
    /// `covering_radius(resolution)` of one of them.
    fn samples(&self, resolution: u32) -> Vec<Vec<f64>>;
    fn covering_radius(&self, resolution: u32) -> f64;
}

impl CompactSet for ClosedComplementDomain {
    fn dim(&self) -> usize {
        self.bx.dim()
    }

    fn contains_f64(&self, x: &[f64]) -> bool {
        self.bx.contains_f64(x) && !self.removed.contains_f64(x)
    }

    fn rho_f64(&self, x: &[f64]) -> f64 {
        match x.iter().map(|&v| crate::rational::from_f64(v)).collect::<Option<Vec<_>>>() {
            Some(ex) => rho(self, &ex).unwrap_or(f64::INFINITY),
            None => f64::INFINITY,
        }
    }

    fn samples(&self, resolution: u32) -> Vec<Vec<f64>> {
        let steps = 1usize << resolution;
        let mut out = Vec::new();
        for cell in self.cells.rects() {
            let b = cell.f64_bounds();
            let sizes = vec![steps + 1; b.len()];
            let mut idx = vec![0usize; b.len()];
            loop {
                out.push(idx.iter().zip(&b).map(|(&i, (lo, hi))| lo + (hi - lo) * i as f64 / steps as f64).collect());
                if !crate::set::advance(&mut idx, &sizes) {
                    break;
                }
            }
        }
        out
    }

    fn covering_radius(&self, resolution: u32) -> f64 {
        let steps = (1u64 << resolution) as f64;
        let widest =
            self.cells.rects().iter().map(|c| c.f64_bounds().iter().map(|(lo, hi)| ((hi - lo) / steps).powi(2)).sum::<f64>()).fold(0.0, f64::max);
        widest.sqrt() / 2.0
    }
}

/// The unit circle in the plane, sampled at `2^resolution` equal angles
/// plus any extra angles supplied (e.g. where the function peaks).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CircleK {
    pub extra_angles: Vec<f64>,
}

impl CompactSet for CircleK {
    fn dim(&self) -> usize {
        2
    }

    fn contains_f64(&self, x: &[f64]) -> bool {
        (x[0].hypot(x[1]) - 1.0).abs() <= 1e-12
    }

    fn rho_f64(&self, x: &[f64]) -> f64 {
        (x[0].hypot(x[1]) - 1.0).abs()
    }

    fn samples(&self, resolution: u32) -> Vec<Vec<f64>> {
        let n = 1u64 << resolution;
        (0..n).map(|j| std::f64::consts::TAU * j as f64 / n as f64).chain(self.extra_angles.iter().copied()).map(|t| vec![t.cos(), t.sin()]).collect()
    }

    fn covering_radius(&self, resolution: u32) -> f64 {
        std::f64::consts::PI / (1u64 << resolution) as f64
    }
}

/// Grid and certification settings for `extend_nd`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampler {
    pub resolution: u32,
    /// Lipschitz constant of `f` on `K`, when known.
    pub lipschitz: Option<f64>,
    /// Required width of the certified bracket.
    pub tol: Option<f64>,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler { resolution: 6, lipschitz: None, tol: None }
    }
}

/// `F_n(x)` with a bracket for the exact `F_n(x)`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Extension {
    /// Lower approximant built from the sampled maxima; nondecreasing in
    /// `n`.
    pub value: f64,
    /// Upper bound from the modulus hint, if one was given.
    pub upper: Option<f64>,
    pub rho: f64,
}

/// Default averaging depth.
pub const DEFAULT_DEPTH: u32 = 10;

/// Tonelli's averaging formula on a sampled compact set.
pub fn extend_nd(k: &dyn CompactSet, f: &dyn Fn(&[f64]) -> f64, x: &[f64], n: u32, sampler: &Sampler) -> Result<Extension, TietzeError> {
    if x.len() != k.dim() {
        return Err(TietzeError::DimensionMismatch);
    }
    if k.contains_f64(x) {
        let v = f(x);
        return Ok(Extension { value: v, upper: Some(v), rho: 0.0 });
    }
    let rho = k.rho_f64(x);
    let samples = k.samples(sampler.resolution);
    if samples.is_empty() || !rho.is_finite() {
        return Err(TietzeError::EmptyK);
    }
    let h = k.covering_radius(sampler.resolution);
    let mut pts: Vec<(f64, f64)> = samples.iter().map(|p| (p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(), f(p))).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    // prefix maxima by distance give a monotone M̂(r)
    let mut best = f64::NEG_INFINITY;
    let prefix: Vec<(f64, f64)> = pts
        .iter()
        .map(|&(d, v)| {
            best = best.max(v);
            (d, best)
        })
        .collect();
    let m_hat = |r: f64| -> f64 {
        let i = prefix.partition_point(|(d, _)| *d <= r);
        if i == 0 {
            f64::NEG_INFINITY
        } else {
            prefix[i - 1].1
        }
    };
    let terms = 1u64 << n;
    let mut lower = Rational::zero();
    let mut upper = Rational::zero();
    let mut lower_finite = true;
    for j in 0..terms {
        let r = (1.0 + j as f64 / terms as f64) * rho;
        let lo = m_hat(r);
        // every point of K ∩ D(x, r) is within h of a sample in D(x, r + h)
        let hi = sampler.lipschitz.map(|l| m_hat(r + h) + l * h);
        // the nearest sample can sit up to h beyond ρ; its value keeps
        // M̂ monotone but is no longer a certified lower bound
        let lo = if lo.is_finite() {
            lo
        } else {
            lower_finite = false;
            prefix[0].1
        };
        lower += crate::rational::from_f64(lo).expect("finite");
        if let Some(hi) = hi {
            upper += crate::rational::from_f64(hi).expect("finite");
        }
    }
    let denom = Rational::from_integer(terms.into());
    let value = to_f64(&(lower / &denom));
    let upper = sampler.lipschitz.map(|_| to_f64(&(upper / &denom)));
    if let Some(tol) = sampler.tol {
        let width = match upper {
            Some(u) if lower_finite => u - value,
            _ => f64::INFINITY,
        };
        if width > tol {
            return Err(TietzeError::SamplerTooCoarse { width, tol });
        }
    }
    Ok(Extension { value, upper, rho })
}

/// Tents on the circle of height 1 and angular half-width `1/(2m²)`
/// centred at angle `1/m`, alternating with the zero function. They tend to
/// 0 pointwise on the circle while `F_n(0,0)` alternates between 1 and 0.
pub fn circle_tent(m: u32) -> (CircleK, impl Fn(&[f64]) -> f64) {
    let odd = m % 2 == 1;
    let mf = m.max(1) as f64;
    let centre = 1.0 / mf;
    let half = 1.0 / (2.0 * mf * mf);
    let k = CircleK { extra_angles: if odd { vec![centre] } else { Vec::new() } };
    let f = move |p: &[f64]| {
        if !odd {
            return 0.0;
        }
        let t = p[1].atan2(p[0]);
        (1.0 - (t - centre).abs() / half).max(0.0)
    };
    (k, f)
}

/// Helper for building `[lo, hi]` boxes.
pub fn closed_box(bounds: &[(Rational, Rational)]) -> Rectangle {
    Rectangle::new(bounds.iter().map(|(a, b)| Interval::closed(a.clone(), b.clone())).collect())
}
