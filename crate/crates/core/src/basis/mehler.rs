//! Heat-type kernel of `e^{-σtH}` (Mehler's formula) and its spectral check.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::laguerre::{eigenfunction, eigenvalue};
use crate::quadrature::{GaussLegendre, RadialGrid};
use crate::{Error, Result};

/// Coefficients of the kernel `pref · exp(-A(|x|²+|y|²)/2 + B x·y)`.
#[derive(Debug, Clone, Copy)]
struct MehlerParams {
    prefactor: f64,
    a: f64,
    b: f64,
}

fn params(sigma: f64, t: f64) -> Result<MehlerParams> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "kernel time must be positive, got {t}"
        )));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "σ must be positive, got {sigma}"
        )));
    }
    let tau = 2.0 * sigma * t;
    let one_minus_q = -(-2.0 * tau).exp_m1();
    let q = (-2.0 * tau).exp();
    let half = (-tau).exp();
    Ok(MehlerParams {
        prefactor: half / (PI * one_minus_q),
        a: (1.0 + q) / one_minus_q,
        b: 2.0 * half / one_minus_q,
    })
}

/// `K_t(x, y)` of `e^{-σtH}` from `|x|`, `|y|`, and the cosine of their angle.
pub fn mehler_kernel(sigma: f64, t: f64, x_norm: f64, y_norm: f64, cos_angle: f64) -> Result<f64> {
    if !(cos_angle.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cosine must lie in [-1, 1], got {cos_angle}"
        )));
    }
    let p = params(sigma, t)?;
    let dot = x_norm * y_norm * cos_angle;
    Ok(p.prefactor * (-0.5 * p.a * (x_norm * x_norm + y_norm * y_norm) + p.b * dot).exp())
}

/// `e^{-x} I_0(x)` for `x ≥ 0`.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let x = x.abs();
    if x <= 30.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut m = 1.0;
        while term > 1e-17 * sum {
            term *= q / (m * m);
            sum += term;
            m += 1.0;
        }
        sum * (-x).exp()
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..200 {
            let mf = m as f64;
            let ratio = (2.0 * mf - 1.0).powi(2) / (8.0 * mf * x);
            if ratio >= 1.0 {
                break;
            }
            term *= ratio;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// Angular integral `∫_0^{2π} K_t(r, s, cos θ) dθ` in closed form.
pub fn radial_mehler_kernel(sigma: f64, t: f64, r: f64, s: f64) -> Result<f64> {
    let p = params(sigma, t)?;
    let x = p.b * r * s;
    let expo = -0.5 * p.a * (r * r + s * s) + x;
    Ok(2.0 * PI * p.prefactor * expo.exp() * bessel_i0_scaled(x))
}

/// The radial operator `f ↦ ∫ K_t(·, y) f(|y|) dy` discretized on a fixed set of
/// output radii and a composite Gauss–Legendre grid in `|y|`.
pub struct MehlerOperator {
    radii: Vec<f64>,
    points: Vec<f64>,
    // row-major: output radius, integration point (weights folded in)
    matrix: Vec<f64>,
}

impl MehlerOperator {
    pub fn new(sigma: f64, t: f64, radii: Vec<f64>, panel_width: f64) -> Result<Self> {
        let gl = GaussLegendre::new(16)?;
        let r_max = radii.iter().cloned().fold(0.0, f64::max);
        let s_max = r_max + 10.0;
        let panels = (s_max / panel_width).ceil() as usize;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for i in 0..panels {
            gl.push_panel(
                i as f64 * panel_width,
                (i + 1) as f64 * panel_width,
                &mut points,
                &mut weights,
            );
        }
        let rows = radii
            .par_iter()
            .map(|&r| -> Result<Vec<f64>> {
                points
                    .iter()
                    .zip(&weights)
                    .map(|(&s, &w)| Ok(w * s * radial_mehler_kernel(sigma, t, r, s)?))
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            radii,
            points,
            matrix: rows.concat(),
        })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Apply to a radial function given by its values at the integration points.
    pub fn apply(&self, f: impl Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
        let vals = self
            .points
            .iter()
            .map(|&s| f(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .matrix
            .chunks_exact(self.points.len())
            .map(|row| row.iter().zip(&vals).map(|(a, b)| a * b).sum())
            .collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MehlerCheckReport {
    pub sigma: f64,
    pub t: f64,
    /// Grid-`L²` distance between `K_t e_k` and `e^{-σνt} e_k`, per `k`.
    pub discrepancies: Vec<f64>,
    pub max_discrepancy: f64,
}

/// Apply the kernel to `e_k`, `k ≤ k_max`, and compare with `e^{-σ(4k+2)t} e_k`.
pub fn mehler_spectral_check(sigma: f64, t: f64, k_max: usize) -> Result<MehlerCheckReport> {
    // comparison grid: |difference|² is a degree-2K polynomial times e^{-z}
    let grid = RadialGrid::with_size(2 * k_max + 16, 1.0)?;
    let radii: Vec<f64> = grid.nodes().iter().map(|z| z.sqrt()).collect();
    let op = MehlerOperator::new(sigma, t, radii.clone(), 0.25)?;
    let discrepancies = (0..=k_max)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let out = op.apply(|s| eigenfunction(k, s))?;
            let decay = (-sigma * eigenvalue(k) * t).exp();
            let mut acc = 0.0;
            for ((v, &r), w) in out.iter().zip(&radii).zip(grid.weights()) {
                let d = v - decay * eigenfunction(k, r)?;
                acc += w * d * d;
            }
            Ok((PI * acc).sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    let max_discrepancy = discrepancies.iter().cloned().fold(0.0, f64::max);
    Ok(MehlerCheckReport {
        sigma,
        t,
        discrepancies,
        max_discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_value() {
        let k = mehler_kernel(1.0, 0.1, 0.0, 0.0, 1.0).unwrap();
        let expect = (-0.2f64).exp() / (PI * (1.0 - (-0.4f64).exp()));
        assert!((k - expect).abs() < 1e-14 * expect);
        assert!(k > 0.0);
    }

    #[test]
    fn rejects_nonpositive_time() {
        assert!(mehler_kernel(1.0, 0.0, 1.0, 1.0, 0.0).is_err());
        assert!(mehler_kernel(1.0, -1.0, 1.0, 1.0, 0.0).is_err());
        assert!(mehler_kernel(1.0, 1.0, 1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn long_time_limit() {
        let (x, y) = (0.7, 1.3);
        let t = 40.0;
        let k = mehler_kernel(1.0, t, x, y, 0.3).unwrap() / (-2.0 * t).exp();
        let limit = (-(x * x + y * y) / 2.0).exp() / PI;
        assert!((k - limit).abs() < 1e-12);
    }

    #[test]
    fn scaled_bessel_branches_agree() {
        // reference values of e^{-x} I_0(x) from a 40-digit evaluation
        let table = [
            (0.0, 1.0),
            (29.9, 0.073_269_219_046_001_91),
            (30.0, 0.073_145_946_482_237_3),
            (31.0, 0.071_946_496_696_983_83),
            (40.0, 0.063_278_279_875_235_33),
        ];
        for (x, v) in table {
            assert!((bessel_i0_scaled(x) - v).abs() < 2e-16, "x={x}");
        }
    }
}
