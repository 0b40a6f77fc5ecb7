//! Spectral and Monte Carlo machinery for mass-cutoff Gibbs measures of the
//! quantum harmonic oscillator field.
//!
//! The crate is organized around the eigenbasis of −Δ + |x|² (Hermite
//! functions on the line, radial Laguerre modes in higher dimension):
//!
//! - [`basis`] — stable eigenfunction evaluation, quadrature grids, spectral
//!   projection, and basis self-checks;
//! - [`field`] — sampling of the truncated free field, Wick-ordered mass, and
//!   L^p / Sobolev norms;
//! - [`gibbs`] — Monte Carlo partition functions with a Wick-mass cutoff,
//!   a one-dimensional quadrature oracle, and boundary / tail-set estimates;
//! - [`profile`] — L²-normalized bump profiles with annular frequency support
//!   and their spectral projections;
//! - [`ou`] — the exponentially filtered (Ornstein–Uhlenbeck) approximation of
//!   the Brownian field with exact endpoint laws;
//! - [`drift`] — the explicit shifted-field construction: amplitude, drift
//!   cost, cutoff survival probability, and the variational objective that
//!   separates the normalizable and non-normalizable regimes;
//! - [`mc`] — deterministic chunked Monte Carlo plumbing shared by all of the
//!   above.

pub mod basis;
mod batch;
pub mod drift;
pub mod error;
pub mod field;
pub mod geometry;
pub mod gibbs;
pub mod grid;
pub mod mc;
pub mod ou;
pub mod profile;
pub mod recurrence;
pub mod report;
pub mod special;

pub use error::{Error, Result};
pub use geometry::Geometry;
