//! `L^q` norms of the eigenfunctions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::laguerre::{eigenvalue, weighted_laguerre};
use crate::quadrature::{GaussLegendre, QuadratureRule};
use crate::stats::{linear_fit, LinearFit};
use crate::{Error, Result};

const PANEL_POINTS: usize = 20;

/// Zeros of `L_k` (the nodes of the `k`-point Gauss–Laguerre rule).
pub fn laguerre_zeros(k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    Ok(QuadratureRule::gauss_laguerre(k)?.nodes().to_vec())
}

/// `∫_0^∞ |𝓛_k(z)|^q dz`, integrating panel-wise between consecutive zeros.
pub fn laguerre_power_integral(k: usize, q: f64) -> Result<f64> {
    let gl = GaussLegendre::new(PANEL_POINTS)?;
    let zeros = laguerre_zeros(k)?;
    let f = |z: f64| weighted_laguerre(k, z).map(|v| v.abs().powf(q));
    let mut total = 0.0;
    let mut left = 0.0;
    for &z in &zeros {
        total += panel(&gl, left, z, &f)?;
        left = z;
    }
    // tail past the last zero: march until the panels stop contributing
    let nu = eigenvalue(k);
    let width = nu.cbrt().max(1.0);
    loop {
        let right = left + width;
        let part = panel(&gl, left, right, &f)?;
        total += part;
        left = right;
        if left > nu && part <= 1e-17 * total {
            break;
        }
    }
    Ok(total)
}

fn panel(gl: &GaussLegendre, a: f64, b: f64, f: &impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let h = 0.5 * (b - a);
    let m = 0.5 * (b + a);
    let mut s = 0.0;
    for (&x, &w) in gl.nodes().iter().zip(gl.weights()) {
        s += w * f(m + h * x)?;
    }
    Ok(h * s)
}

/// `‖e_k‖_{L^q(ℝ²)}` for `q ∈ [2, ∞]`.
pub fn lp_norm(k: usize, q: f64) -> Result<f64> {
    if q.is_nan() || q < 2.0 {
        return Err(Error::UnsupportedExponent(q));
    }
    if q.is_infinite() {
        return sup_norm(k);
    }
    let integral = laguerre_power_integral(k, q)?;
    Ok((PI.powf(1.0 - q / 2.0) * integral).powf(1.0 / q))
}

/// `‖e_k‖_{L^∞}` by dense sampling, refined around the turning point `z ≈ ν`.
pub fn sup_norm(k: usize) -> Result<f64> {
    let nu = eigenvalue(k);
    let mut best: f64 = 0.0;
    let coarse = 10_000;
    for i in 0..=coarse {
        let z = 3.0 * nu * i as f64 / coarse as f64;
        best = best.max(weighted_laguerre(k, z)?.abs());
    }
    let fine = 2_000;
    for i in 0..=fine {
        let z = nu * (0.8 + 0.4 * i as f64 / fine as f64);
        best = best.max(weighted_laguerre(k, z)?.abs());
    }
    Ok(best / PI.sqrt())
}

/// `max |𝓛_k(z)|` over `z ∈ [z_lo, z_hi]` by dense sampling.
pub fn window_sup(k: usize, z_lo: f64, z_hi: f64, points: usize) -> Result<f64> {
    let mut best: f64 = 0.0;
    for i in 0..=points {
        let z = z_lo + (z_hi - z_lo) * i as f64 / points as f64;
        best = best.max(weighted_laguerre(k, z)?.abs());
    }
    Ok(best)
}

/// `‖e_k‖⁴_{L⁴}·ν / ln ν` across a range of indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct L4LogReport {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub ratio: f64,
}

/// Evaluate the `q = 4` logarithmic law at each index; indices must lie in `[16, 4096]`.
pub fn l4_log_check(indices: &[usize]) -> Result<L4LogReport> {
    if indices.is_empty() {
        return Err(Error::InvalidParameter("no indices supplied".into()));
    }
    if let Some(&k) = indices.iter().find(|&&k| !(16..=4096).contains(&k)) {
        return Err(Error::Domain(format!(
            "index {k} outside [16, 4096]; ln ν is too small or the sweep too costly"
        )));
    }
    let mut values = Vec::with_capacity(indices.len());
    for &k in indices {
        let nu = eigenvalue(k);
        values.push(lp_norm(k, 4.0)?.powi(4) * nu / nu.ln());
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(0.0, f64::max);
    Ok(L4LogReport {
        indices: indices.to_vec(),
        values,
        min,
        max,
        ratio: max / min,
    })
}

/// Predicted decay exponent `min(1/2 - 1/q, 1/q)` of `‖e_k‖_{L^q}` in `ν`
/// (with a logarithmic correction at `q = 4`).
pub fn lq_decay_exponent(q: f64) -> f64 {
    (0.5 - 1.0 / q).min(1.0 / q)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LqScalingFit {
    pub q: f64,
    pub indices: Vec<usize>,
    pub norms: Vec<f64>,
    /// Least-squares fit of `ln ‖e_k‖_{L^q}` against `ln ν`.
    pub fit: LinearFit,
    pub predicted_slope: f64,
}

impl LqScalingFit {
    pub fn slope_error(&self) -> f64 {
        (self.fit.slope - self.predicted_slope).abs()
    }
}

/// Fit the log-log slope of `‖e_k‖_{L^q}` over the given indices.
pub fn lq_scaling_fit(q: f64, indices: &[usize]) -> Result<LqScalingFit> {
    if indices.len() < 2 {
        return Err(Error::InvalidParameter(
            "a slope fit needs at least two indices".into(),
        ));
    }
    let norms = indices
        .iter()
        .map(|&k| lp_norm(k, q))
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = indices.iter().map(|&k| eigenvalue(k).ln()).collect();
    let y: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    Ok(LqScalingFit {
        q,
        indices: indices.to_vec(),
        norms,
        fit: linear_fit(&x, &y),
        predicted_slope: -lq_decay_exponent(q),
    })
}

/// Roughly geometric index sweep `lo..=hi` with `count` distinct points.
pub fn geometric_indices(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let t = i as f64 / (count.max(2) - 1) as f64;
            (lo as f64 * (hi as f64 / lo as f64).powf(t)).round() as usize
        })
        .collect();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_l4() {
        let v = lp_norm(0, 4.0).unwrap();
        assert!((v - (1.0 / (2.0 * PI)).powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn l2_norm_is_one() {
        for k in [0, 1, 5, 40, 300] {
            assert!((lp_norm(k, 2.0).unwrap() - 1.0).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn exponent_below_two_is_unsupported() {
        assert!(matches!(
            lp_norm(3, 1.5),
            Err(Error::UnsupportedExponent(_))
        ));
    }

    #[test]
    fn sup_norm_is_attained_at_origin() {
        for k in [0, 3, 50] {
            assert!((sup_norm(k).unwrap() - PI.sqrt().recip()).abs() < 1e-14);
        }
    }

    #[test]
    fn l4_check_guards_small_indices() {
        assert!(l4_log_check(&[0]).is_err());
        let r = l4_log_check(&[64]).unwrap();
        assert!(r.values[0] > 0.0 && r.values[0].is_finite());
    }
}
