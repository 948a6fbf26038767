//! Exact-arithmetic Lebesgue integration on R^d.
//!
//! Sets are finite unions of rectangles with rational endpoints. Functions
//! are quasicontinuous: continuous off an open set of arbitrarily small
//! total length, described by a small expression language ([`qc`]). The
//! integral is the limit of continuous approximants that interpolate across
//! those small sets, with certified error bounds. Around it sit Riemann and
//! Darboux integration, Cantor-type sets, Tietze extension, the convergence
//! theorems and Fubini reductions.
//!
//! ```
//! use lebesgue::lebesgue::integrate_bounded;
//! use lebesgue::qc::QcFunction;
//! use lebesgue::rational::int;
//!
//! let f = QcFunction::parse("dirichlet").unwrap();
//! let r = integrate_bounded(&f, &[(int(0), int(1))], 8, 1e-9).unwrap();
//! assert_eq!(r.exact, Some(int(0)));
//! ```

pub mod cantor;
pub mod cli;
pub mod convergence;
pub mod fubini;
pub mod lebesgue;
pub mod qc;
pub mod rational;
pub mod riemann;
pub mod set;
pub mod tietze;
