//! `∫_{ℝ²} |u|^q dx` for band-limited `u`, on a grid matched to the exponent.

use std::sync::Arc;

use num_complex::Complex64;

use super::rule::{size_for_degree, RadialGrid};
use super::transform::{SpectralCoefficients, SpectralTransform};
use crate::{Error, Result};

/// Evaluator of `‖u‖_{L^q}^q` for `u ∈ span{e_0, …, e_K}`.
///
/// `|u|^q e^{qz/2}` is a polynomial of degree `qK` when `q` is an even integer, so
/// a grid with decay `q/2` and `qK/2 + 1` nodes is exact. Other exponents use
/// twice as many nodes; [`PowerNorm::richardson_gap`] estimates the remaining bias.
#[derive(Debug, Clone)]
pub struct PowerNorm {
    transform: SpectralTransform,
    exponent: f64,
    exact: bool,
}

impl PowerNorm {
    pub fn new(k_max: usize, exponent: f64) -> Result<Self> {
        Self::with_oversampling(k_max, exponent, 1)
    }

    /// As [`PowerNorm::new`] with the node count multiplied by `factor`.
    pub fn with_oversampling(k_max: usize, exponent: f64, factor: usize) -> Result<Self> {
        if !(exponent >= 2.0) || !exponent.is_finite() {
            return Err(Error::UnsupportedExponent(exponent));
        }
        let exact = exponent.fract() == 0.0 && (exponent as u64).is_multiple_of(2);
        let degree = (exponent * k_max as f64).ceil() as usize;
        let base = if exact {
            size_for_degree(degree)
        } else {
            2 * size_for_degree(degree)
        };
        let grid = Arc::new(RadialGrid::with_size(base * factor.max(1), exponent / 2.0)?);
        Ok(Self {
            transform: SpectralTransform::new(grid, k_max)?,
            exponent,
            exact,
        })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Whether the quadrature is exact for this exponent.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn k_max(&self) -> usize {
        self.transform.k_max()
    }

    pub fn transform(&self) -> &SpectralTransform {
        &self.transform
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.transform.grid()
    }

    /// `∫ |u|^q dx`.
    pub fn powered(&self, coeffs: &SpectralCoefficients) -> Result<f64> {
        if coeffs.k_max() != self.k_max() {
            return Err(Error::InvalidParameter(format!(
                "evaluator has K = {}, coefficients have K = {}",
                self.k_max(),
                coeffs.k_max()
            )));
        }
        let mut values = vec![Complex64::new(0.0, 0.0); self.grid().len()];
        Ok(self.powered_with(coeffs.as_slice(), &mut values))
    }

    /// Allocation-free variant; `scratch` must have one slot per grid node.
    pub fn powered_with(&self, coeffs: &[Complex64], scratch: &mut [Complex64]) -> f64 {
        self.transform.synthesize_into(coeffs, scratch);
        self.integrate_values(scratch)
    }

    /// `∫ |u|^q dx` from node values already on this evaluator's grid.
    pub fn integrate_values(&self, values: &[Complex64]) -> f64 {
        let w = self.transform.plane_weights();
        let q = self.exponent;
        if self.exact {
            let half = (q / 2.0) as i32;
            values
                .iter()
                .zip(w)
                .map(|(v, w)| w * v.norm_sqr().powi(half))
                .sum()
        } else {
            values
                .iter()
                .zip(w)
                .map(|(v, w)| w * v.norm_sqr().powf(q / 2.0))
                .sum()
        }
    }

    /// `‖u‖_{L^q}`.
    pub fn norm(&self, coeffs: &SpectralCoefficients) -> Result<f64> {
        Ok(self.powered(coeffs)?.powf(1.0 / self.exponent))
    }

    /// Relative change of `∫|u|^q` when the node count is doubled; zero for exact grids.
    pub fn richardson_gap(&self, coeffs: &SpectralCoefficients) -> Result<f64> {
        if self.exact {
            return Ok(0.0);
        }
        let n = self.grid().len();
        let finer = PowerNorm {
            transform: SpectralTransform::new(
                Arc::new(RadialGrid::with_size(2 * n, self.exponent / 2.0)?),
                self.k_max(),
            )?,
            exponent: self.exponent,
            exact: false,
        };
        let coarse = self.powered(coeffs)?;
        let fine = finer.powered(coeffs)?;
        Ok(if fine == 0.0 {
            0.0
        } else {
            (coarse - fine).abs() / fine
        })
    }
}
