//! The lens change of variables between `i∂_s u + Δu = ±|u|^{p-1}u` on the plane
//! and the harmonic-potential equation on `|t| < π/4`.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quadrature::SpectralCoefficients;
use crate::{Error, Result};

/// Default distance kept from `±π/4`, where `(cos 2t)^{-1}` blows up.
pub const DEFAULT_MARGIN: f64 = 0.05;

/// Matching pair of times: compact `t ∈ (-π/4, π/4)` and free `s = tan(2t)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensTime {
    pub t_compact: f64,
    pub t_free: f64,
}

impl LensTime {
    pub fn from_compact(t: f64) -> Result<Self> {
        if !(t.abs() < FRAC_PI_4) {
            return Err(Error::LensDomain(t));
        }
        Ok(Self {
            t_compact: t,
            t_free: (2.0 * t).tan() / 2.0,
        })
    }

    pub fn from_free(s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "free time must be finite, got {s}"
            )));
        }
        Ok(Self {
            t_compact: (2.0 * s).atan() / 2.0,
            t_free: s,
        })
    }

    /// `cos 2t = (1 + 4s²)^{-1/2}`.
    pub fn contraction(&self) -> f64 {
        (2.0 * self.t_compact).cos()
    }
}

/// `(cos 2t)^{-1} u(tan(2t)/2, r/cos 2t) e^{-i r² tan(2t)/2}`.
pub fn lens_forward_eval(
    u: impl Fn(f64, f64) -> Complex64,
    t_compact: f64,
    r: f64,
) -> Result<Complex64> {
    let lt = LensTime::from_compact(t_compact)?;
    let c = lt.contraction();
    Ok(u(lt.t_free, r / c) / c * Complex64::from_polar(1.0, -r * r * lt.t_free))
}

/// `(1+4s²)^{-1/2} v(arctan(2s)/2, r(1+4s²)^{-1/2}) e^{i r² s/(1+4s²)}`.
pub fn lens_inverse_eval(
    v: impl Fn(f64, f64) -> Complex64,
    t_free: f64,
    r: f64,
) -> Result<Complex64> {
    let lt = LensTime::from_free(t_free)?;
    let q = 1.0 + 4.0 * t_free * t_free;
    let root = q.sqrt();
    Ok(v(lt.t_compact, r / root) / root * Complex64::from_polar(1.0, r * r * t_free / q))
}

/// `amplitude · Σ c_k e_k(r/dilation) · e^{i chirp r²}`.
///
/// The lens maps act on the three scalars only, so composing transforms never
/// resamples the coefficients and the chirp stays symbolic until evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub coeffs: SpectralCoefficients,
    pub amplitude: f64,
    pub dilation: f64,
    pub chirp: f64,
}

impl RadialProfile {
    pub fn new(coeffs: SpectralCoefficients) -> Self {
        Self {
            coeffs,
            amplitude: 1.0,
            dilation: 1.0,
            chirp: 0.0,
        }
    }

    pub fn eval(&self, r: f64) -> Result<Complex64> {
        let x = r / self.dilation;
        Ok(self.coeffs.eval_at_z(x * x)?
            * self.amplitude
            * Complex64::from_polar(1.0, self.chirp * r * r))
    }

    /// `‖·‖_{L²(ℝ²)}`; the coefficients are orthonormal and the dilation Jacobian
    /// cancels against `amplitude²` whenever the profile came from lens maps.
    pub fn l2_norm(&self) -> f64 {
        self.amplitude * self.dilation * self.coeffs.mass().sqrt()
    }

    /// Image under the forward lens map of a free-side profile given at `s = tan(2t)/2`.
    pub fn lens_forward(&self, t_compact: f64) -> Result<Self> {
        let lt = LensTime::from_compact(t_compact)?;
        let c = lt.contraction();
        Ok(Self {
            coeffs: self.coeffs.clone(),
            amplitude: self.amplitude / c,
            dilation: self.dilation * c,
            chirp: self.chirp / (c * c) - lt.t_free,
        })
    }

    /// Image under the inverse lens map of a harmonic-side profile given at `arctan(2s)/2`.
    pub fn lens_inverse(&self, t_free: f64) -> Result<Self> {
        LensTime::from_free(t_free)?;
        let q = 1.0 + 4.0 * t_free * t_free;
        Ok(Self {
            coeffs: self.coeffs.clone(),
            amplitude: self.amplitude / q.sqrt(),
            dilation: self.dilation * q.sqrt(),
            chirp: (self.chirp + t_free) / q,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(_: f64, r: f64) -> Complex64 {
        Complex64::new((-r * r / 2.0).exp(), 0.0)
    }

    #[test]
    fn time_bijection() {
        let lt = LensTime::from_compact(0.3).unwrap();
        let back = LensTime::from_free(lt.t_free).unwrap();
        assert!((back.t_compact - 0.3).abs() < 1e-15);
        assert!(matches!(
            LensTime::from_compact(-FRAC_PI_4),
            Err(Error::LensDomain(_))
        ));
    }

    #[test]
    fn forward_of_static_gaussian() {
        for t in [0.0, 0.2, -0.6] {
            let c = (2.0f64 * t).cos();
            for r in [0.0, 0.5, 1.7] {
                let v = lens_forward_eval(gaussian, t, r).unwrap();
                let expect = (-r * r / (2.0 * c * c)).exp() / c;
                assert!((v.norm() - expect).abs() < 1e-15 * expect.max(1.0));
            }
        }
    }

    #[test]
    fn large_free_time_decay() {
        let s = 1e4;
        let v = lens_inverse_eval(|_, _| Complex64::new(1.0, 0.0), s, 0.0).unwrap();
        assert!((v.norm() * 2.0 * s - 1.0).abs() < 1e-8);
    }

    #[test]
    fn profile_maps_match_pointwise_maps() {
        let mut c = SpectralCoefficients::zeros(3);
        c.as_mut_slice()[1] = Complex64::new(0.4, 0.3);
        c.as_mut_slice()[3] = Complex64::new(-0.2, 0.5);
        let p = RadialProfile {
            chirp: 0.25,
            dilation: 1.3,
            amplitude: 0.9,
            coeffs: c,
        };
        let f = |_: f64, r: f64| p.eval(r).unwrap();
        let fwd = p.lens_forward(0.4).unwrap();
        let inv = p.lens_inverse(-0.8).unwrap();
        for r in [0.0, 0.3, 1.1, 2.5] {
            assert!((fwd.eval(r).unwrap() - lens_forward_eval(f, 0.4, r).unwrap()).norm() < 1e-14);
            assert!((inv.eval(r).unwrap() - lens_inverse_eval(f, -0.8, r).unwrap()).norm() < 1e-14);
        }
        let back = fwd
            .lens_inverse(LensTime::from_compact(0.4).unwrap().t_free)
            .unwrap();
        assert!((back.amplitude - p.amplitude).abs() < 1e-15);
        assert!((back.dilation - p.dilation).abs() < 1e-15);
        assert!((back.chirp - p.chirp).abs() < 1e-15);
        assert!((fwd.l2_norm() - p.l2_norm()).abs() < 1e-15);
    }
}
