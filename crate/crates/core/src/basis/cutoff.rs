//! Smooth cutoff profile and the Littlewood–Paley weights built from it.

use serde::{Deserialize, Serialize};

use super::laguerre::eigenvalue;
use crate::{Error, Result};

/// A nonincreasing cutoff with `η = 1` on `[0, 1]` and `η = 0` on `[2, ∞)`.
pub trait CutoffProfile {
    fn eta(&self, x: f64) -> f64;
}

/// `η(x) = φ(2 - x) / (φ(2 - x) + φ(x - 1))` with `φ(s) = e^{-1/s}` for `s > 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SmoothStep;

fn bump_tail(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

impl CutoffProfile for SmoothStep {
    fn eta(&self, x: f64) -> f64 {
        if x <= 1.0 {
            return 1.0;
        }
        if x >= 2.0 {
            return 0.0;
        }
        let a = bump_tail(2.0 - x);
        let b = bump_tail(x - 1.0);
        a / (a + b)
    }
}

/// Dyadic frequency scale `N = 2^{j/2}`, so that `N² = 2^j` with `j ≥ 2`.
///
/// The weights `η(2ν/N²) − η(4ν/N²)` telescope to one only when consecutive
/// values of `N²` differ by a factor of two, which fixes this parametrization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicScale {
    exponent: u32,
}

impl DyadicScale {
    /// Scale with `N² = 2^exponent`; requires `exponent ≥ 2` (`N ≥ 2`).
    pub fn from_exponent(exponent: u32) -> Result<Self> {
        if !(2..=1000).contains(&exponent) {
            return Err(Error::NotDyadic(2f64.powf(exponent as f64 / 2.0)));
        }
        Ok(Self { exponent })
    }

    /// Parse a numeric `N`; errors unless `N ≥ 2` and `N²` is a power of two.
    pub fn new(n: f64) -> Result<Self> {
        if !(n >= 2.0) || !n.is_finite() {
            return Err(Error::NotDyadic(n));
        }
        let sq = n * n;
        let j = sq.log2().round();
        if (sq - 2f64.powf(j)).abs() > 1e-9 * sq {
            return Err(Error::NotDyadic(n));
        }
        Self::from_exponent(j as u32)
    }

    pub fn exponent(self) -> u32 {
        self.exponent
    }

    /// `N²`.
    pub fn squared(self) -> f64 {
        2f64.powi(self.exponent as i32)
    }

    pub fn value(self) -> f64 {
        self.squared().sqrt()
    }
}

/// Spectral weight of `Δ_N` on `e_k`: `η(2ν/N²) − η(4ν/N²)` with `ν = 4k + 2`.
pub fn littlewood_paley_weight(scale: DyadicScale, k: usize, eta: &impl CutoffProfile) -> f64 {
    let nu = eigenvalue(k);
    let n2 = scale.squared();
    eta.eta(2.0 * nu / n2) - eta.eta(4.0 * nu / n2)
}

/// Sum of the weights over every dyadic scale that can be nonzero for `e_k`.
pub fn littlewood_paley_total(k: usize, eta: &impl CutoffProfile) -> f64 {
    let nu = eigenvalue(k);
    // weights vanish once 4ν/N² ≤ 1
    let top = (4.0 * nu).log2().ceil() as u32 + 1;
    (2..=top.max(2))
        .map(|j| littlewood_paley_weight(DyadicScale { exponent: j }, k, eta))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_shape() {
        let eta = SmoothStep;
        assert_eq!(eta.eta(0.0), 1.0);
        assert_eq!(eta.eta(1.0), 1.0);
        assert_eq!(eta.eta(2.0), 0.0);
        assert_eq!(eta.eta(7.0), 0.0);
        assert!((eta.eta(1.5) - 0.5).abs() < 1e-15);
        let mut last = 1.0;
        for i in 0..=1000 {
            let v = eta.eta(1.0 + i as f64 / 1000.0);
            assert!(v <= last + 1e-15);
            last = v;
        }
    }

    #[test]
    fn dyadic_parsing() {
        assert_eq!(DyadicScale::new(2.0).unwrap().exponent(), 2);
        assert_eq!(DyadicScale::new(8.0).unwrap().exponent(), 6);
        assert_eq!(DyadicScale::new(2f64.sqrt() * 4.0).unwrap().exponent(), 5);
        assert!(matches!(DyadicScale::new(3.0), Err(Error::NotDyadic(_))));
        assert!(DyadicScale::new(1.0).is_err());
        assert!(DyadicScale::new(f64::NAN).is_err());
    }

    #[test]
    fn vanishing_regimes() {
        let eta = SmoothStep;
        // 2ν/N² ≥ 2: both cutoffs vanish
        let s = DyadicScale::new(2.0).unwrap();
        assert_eq!(littlewood_paley_weight(s, 10, &eta), 0.0);
        // 4ν/N² ≤ 1: both cutoffs equal one
        let s = DyadicScale::from_exponent(12).unwrap();
        assert_eq!(littlewood_paley_weight(s, 3, &eta), 0.0);
    }

    #[test]
    fn lowest_mode_sums_to_one() {
        assert!((littlewood_paley_total(0, &SmoothStep) - 1.0).abs() < 1e-15);
    }
}
