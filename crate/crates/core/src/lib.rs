//! Spectral toolkit for the radial Hermite operator `H = -Δ + |x|²` on the plane.
//!
//! The radial eigenfunctions `e_k(x) = π^{-1/2} e^{-|x|²/2} L_k(|x|²)` (eigenvalue
//! `4k + 2`) are the coordinate system for everything here: Gaussian random data,
//! Gibbs measures built on it, the Galerkin-truncated cubic/higher-power NLS flow,
//! and the lens transform to the potential-free equation.
//!
//! Modules:
//! - [`basis`]: stable Laguerre function evaluation and eigenfunction estimates.
//! - [`quadrature`]: Gauss rules, spectral transforms, multilinear integrals.
//! - [`random_field`]: free-field sampling, tails, Gaussian chaos sums.
//! - [`gibbs`]: Gibbs densities and importance-weighted ensembles.
//! - [`dynamics`]: truncated flows, integrators, invariance experiments.
//! - [`lens`]: lens transform and free-evolution cross-checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod dynamics;
mod error;
pub mod gibbs;
pub mod golden;
pub mod lens;
pub mod quadrature;
pub mod random_field;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
