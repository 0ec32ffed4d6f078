//! Gibbs densities with respect to the free-field measure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quadrature::{PowerNorm, SpectralCoefficients};
use crate::random_field::alpha;
use crate::{Error, Result};

/// Sign of the nonlinearity: `+|u|^{p-1}u` (defocusing) or `-|u|^{p-1}u` (focusing).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Defocusing,
    Focusing,
}

impl Sign {
    /// `+1` for defocusing, `-1` for focusing.
    pub fn factor(self) -> f64 {
        match self {
            Sign::Defocusing => 1.0,
            Sign::Focusing => -1.0,
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "defocusing" | "+" => Ok(Sign::Defocusing),
            "focusing" | "-" => Ok(Sign::Focusing),
            other => Err(Error::InvalidParameter(format!(
                "sign must be `defocusing` or `focusing`, got `{other}`"
            ))),
        }
    }
}

/// Continuous cutoff equal to 1 on `[-plateau, plateau]`, linear down to 0 at `±half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trapezoid {
    pub plateau: f64,
    pub half_width: f64,
}

impl Trapezoid {
    pub fn new(plateau: f64, half_width: f64) -> Result<Self> {
        if !(plateau > 0.0 && plateau <= half_width && half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cutoff needs 0 < plateau ≤ half-width, got {plateau} and {half_width}"
            )));
        }
        Ok(Self {
            plateau,
            half_width,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        if a <= self.plateau {
            1.0
        } else if a >= self.half_width {
            0.0
        } else {
            (self.half_width - a) / (self.half_width - self.plateau)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsConfig {
    /// Power `p` of the nonlinearity `|u|^{p-1}u`.
    pub p: f64,
    pub sign: Sign,
    pub k_max: usize,
    /// Half-width of the cutoff support (focusing only).
    pub beta: f64,
    /// Half-width of the region where the cutoff equals 1.
    pub plateau: f64,
}

impl GibbsConfig {
    pub fn defocusing(p: f64, k_max: usize) -> Self {
        Self {
            p,
            sign: Sign::Defocusing,
            k_max,
            beta: 2.0,
            plateau: 1.0,
        }
    }

    pub fn focusing(p: f64, k_max: usize) -> Self {
        Self {
            sign: Sign::Focusing,
            ..Self::defocusing(p, k_max)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "p must exceed 1, got {}",
                self.p
            )));
        }
        if self.sign == Sign::Focusing && self.p >= 3.0 {
            return Err(Error::InvalidParameter(format!(
                "the focusing measure is only normalizable for 1 < p < 3, got p = {}",
                self.p
            )));
        }
        Trapezoid::new(self.plateau, self.beta)?;
        Ok(())
    }

    pub fn cutoff(&self) -> Trapezoid {
        Trapezoid {
            plateau: self.plateau,
            half_width: self.beta,
        }
    }
}

/// `‖u‖_{L^{p+1}}^{p+1}` with an evaluator built for exponent `p + 1`.
pub fn lp1_norm_powered(coeffs: &SpectralCoefficients, evaluator: &PowerNorm) -> Result<f64> {
    evaluator.powered(coeffs)
}

/// `exp(-(2/(p+1)) ‖u‖_{L^{p+1}}^{p+1})`.
pub fn defocusing_weight(coeffs: &SpectralCoefficients, evaluator: &PowerNorm) -> Result<f64> {
    let q = evaluator.exponent();
    Ok((-2.0 / q * evaluator.powered(coeffs)?).exp())
}

/// `χ(Σ|c_k|² - α_K) · exp((2/(p+1)) ‖u‖_{L^{p+1}}^{p+1})`, zero outside the cutoff support.
pub fn focusing_weight(
    coeffs: &SpectralCoefficients,
    config: &GibbsConfig,
    evaluator: &PowerNorm,
) -> Result<f64> {
    if !(config.p > 1.0 && config.p < 3.0) {
        return Err(Error::InvalidParameter(format!(
            "the focusing measure is only normalizable for 1 < p < 3, got p = {}",
            config.p
        )));
    }
    let chi = config.cutoff().eval(coeffs.mass() - alpha(coeffs.k_max()));
    if chi == 0.0 {
        return Ok(0.0);
    }
    let q = evaluator.exponent();
    Ok(chi * (2.0 / q * evaluator.powered(coeffs)?).exp())
}

/// A configured density `ρ_K`, reusable across many samples.
#[derive(Debug, Clone)]
pub struct GibbsDensity {
    config: GibbsConfig,
    evaluator: PowerNorm,
    chi: Trapezoid,
    alpha: f64,
}

impl GibbsDensity {
    pub fn new(config: GibbsConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            evaluator: PowerNorm::new(config.k_max, config.p + 1.0)?,
            chi: config.cutoff(),
            alpha: alpha(config.k_max),
            config,
        })
    }

    pub fn config(&self) -> &GibbsConfig {
        &self.config
    }

    pub fn evaluator(&self) -> &PowerNorm {
        &self.evaluator
    }

    /// Scratch buffer sized for [`GibbsDensity::weight_with`].
    pub fn scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.evaluator.grid().len()]
    }

    /// `ρ_K(u)`; modes above `K` are ignored.
    pub fn weight(&self, coeffs: &[Complex64]) -> f64 {
        self.weight_with(coeffs, &mut self.scratch())
    }

    pub fn weight_with(&self, coeffs: &[Complex64], scratch: &mut [Complex64]) -> f64 {
        let len = self.config.k_max + 1;
        let padded;
        let c = if coeffs.len() >= len {
            &coeffs[..len]
        } else {
            let mut v = coeffs.to_vec();
            v.resize(len, Complex64::new(0.0, 0.0));
            padded = v;
            &padded[..]
        };
        let q = self.config.p + 1.0;
        match self.config.sign {
            Sign::Defocusing => (-2.0 / q * self.evaluator.powered_with(c, scratch)).exp(),
            Sign::Focusing => {
                let mass: f64 = c.iter().map(|v| v.norm_sqr()).sum();
                let chi = self.chi.eval(mass - self.alpha);
                if chi == 0.0 {
                    0.0
                } else {
                    chi * (2.0 / q * self.evaluator.powered_with(c, scratch)).exp()
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn trapezoid_shape() {
        let t = Trapezoid::new(1.0, 2.0).unwrap();
        assert_eq!(t.eval(0.0), 1.0);
        assert_eq!(t.eval(-1.0), 1.0);
        assert_eq!(t.eval(1.5), 0.5);
        assert_eq!(t.eval(-2.0), 0.0);
        assert_eq!(t.eval(7.0), 0.0);
        assert!(Trapezoid::new(2.0, 1.0).is_err());
    }

    #[test]
    fn ground_state_weights() {
        let ev = PowerNorm::new(4, 4.0).unwrap();
        let e0 = SpectralCoefficients::unit(4, 0);
        assert!((lp1_norm_powered(&e0, &ev).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let w = defocusing_weight(&e0, &ev).unwrap();
        assert!((w - (-1.0 / (4.0 * PI)).exp()).abs() < 1e-15);
        assert_eq!(
            defocusing_weight(&SpectralCoefficients::zeros(4), &ev).unwrap(),
            1.0
        );
    }

    #[test]
    fn focusing_range_enforced() {
        let ev = PowerNorm::new(1, 4.0).unwrap();
        let cfg = GibbsConfig::focusing(3.0, 1);
        assert!(focusing_weight(&SpectralCoefficients::zeros(1), &cfg, &ev).is_err());
        assert!(GibbsDensity::new(cfg).is_err());
    }

    #[test]
    fn focusing_zero_field() {
        // mass deviation -2/3 lies on the plateau
        let cfg = GibbsConfig::focusing(2.0, 1);
        let ev = PowerNorm::new(1, 3.0).unwrap();
        let w = focusing_weight(&SpectralCoefficients::zeros(1), &cfg, &ev).unwrap();
        assert_eq!(w, 1.0);
        let narrow = GibbsConfig {
            plateau: 0.5,
            beta: 1.0,
            ..cfg
        };
        let w = focusing_weight(&SpectralCoefficients::zeros(1), &narrow, &ev).unwrap();
        assert!((w - (1.0 - 2.0 / 3.0) / 0.5).abs() < 1e-15);
    }

    #[test]
    fn density_ignores_modes_above_truncation() {
        let d = GibbsDensity::new(GibbsConfig::defocusing(3.0, 3)).unwrap();
        let mut c = vec![Complex64::new(0.3, -0.1); 4];
        let base = d.weight(&c);
        c.extend([Complex64::new(5.0, 5.0); 3]);
        assert_eq!(d.weight(&c), base);
    }
}
