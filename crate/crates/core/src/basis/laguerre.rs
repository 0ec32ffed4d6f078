//! Weighted Laguerre functions `𝓛_k(z) = e^{-z/2} L_k(z)` and the radial eigenfunctions.
//!
//! Everything runs through the three-term recurrence on the weighted functions,
//! carried with a separate logarithmic scale so neither `e^{-z/2}` nor the
//! polynomial growth can underflow or overflow in the intermediate state.
//!
//! The recurrence `(k+1)𝓛_{k+1} = (2k+1−z)𝓛_k − k𝓛_{k−1}` is advanced in the
//! equivalent difference form `D_{k+1} = (k D_k − z 𝓛_k)/(k+1)`,
//! `𝓛_{k+1} = 𝓛_k + D_{k+1}`, which avoids the cancellation of two O(1) terms
//! for small `z`. Relative accuracy still degrades near the zeros of `L_k`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const RESCALE_HIGH: f64 = 1e150;
const RESCALE_LOW: f64 = 1e-150;
const LN_RESCALE: f64 = 345.387_763_949_107_1; // ln(1e150)

/// Index of a radial eigenfunction `e_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisIndex(pub usize);

impl BasisIndex {
    pub fn k(self) -> usize {
        self.0
    }

    /// Eigenvalue `4k + 2` of the Hermite operator.
    pub fn eigenvalue(self) -> f64 {
        eigenvalue(self.0)
    }
}

impl From<usize> for BasisIndex {
    fn from(k: usize) -> Self {
        BasisIndex(k)
    }
}

/// Eigenvalue `ν = 4k + 2` attached to `e_k`.
pub fn eigenvalue(k: usize) -> f64 {
    4.0 * k as f64 + 2.0
}

/// A real number stored as sign and log-magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: f64,
    pub ln_abs: f64,
}

impl SignedLog {
    pub fn value(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }
}

/// Forward sweep producing `𝓛_0(z), 𝓛_1(z), …` in order.
///
/// The state `(cur, diff) = (𝓛_k, 𝓛_k − 𝓛_{k−1})` is stored in units of `e^{ln_scale}`.
#[derive(Debug, Clone)]
pub struct LaguerreSweep {
    z: f64,
    k: usize,
    diff: f64,
    cur: f64,
    ln_scale: f64,
    factor: f64,
}

impl LaguerreSweep {
    pub fn new(z: f64) -> Result<Self> {
        check_argument(z)?;
        let ln_scale = -0.5 * z;
        Ok(Self {
            z,
            k: 0,
            diff: 1.0,
            cur: 1.0,
            ln_scale,
            factor: scale_factor(ln_scale),
        })
    }

    /// Current order.
    pub fn order(&self) -> usize {
        self.k
    }

    /// `𝓛_k(z)` for the current order.
    pub fn value(&self) -> f64 {
        if self.factor.is_finite() && self.factor > 0.0 {
            self.cur * self.factor
        } else {
            self.log_value().value()
        }
    }

    /// `𝓛_{k-1}(z)` for the current order (zero when `k = 0`).
    pub fn previous_value(&self) -> f64 {
        self.rescaled(self.cur - self.diff)
    }

    /// `𝓛_k(z) − 𝓛_{k-1}(z)`, without cancellation.
    pub fn difference(&self) -> f64 {
        self.rescaled(self.diff)
    }

    fn rescaled(&self, v: f64) -> f64 {
        if self.factor.is_finite() && self.factor > 0.0 {
            v * self.factor
        } else if v == 0.0 {
            0.0
        } else {
            v.signum() * (v.abs().ln() + self.ln_scale).exp()
        }
    }

    /// Sign and log-magnitude of `𝓛_k(z)`; usable deep in the exponential tail.
    pub fn log_value(&self) -> SignedLog {
        if self.cur == 0.0 {
            SignedLog {
                sign: 0.0,
                ln_abs: f64::NEG_INFINITY,
            }
        } else {
            SignedLog {
                sign: self.cur.signum(),
                ln_abs: self.cur.abs().ln() + self.ln_scale,
            }
        }
    }

    /// Advance from order `k` to `k + 1`.
    pub fn advance(&mut self) {
        let k = self.k as f64;
        let d = if self.k == 0 { 0.0 } else { self.diff };
        self.diff = (k * d - self.z * self.cur) / (k + 1.0);
        self.cur += self.diff;
        self.k += 1;
        let big = self.cur.abs().max(self.diff.abs());
        if big > RESCALE_HIGH {
            self.diff /= RESCALE_HIGH;
            self.cur /= RESCALE_HIGH;
            self.ln_scale += LN_RESCALE;
            self.factor = scale_factor(self.ln_scale);
        } else if big < RESCALE_LOW && big > 0.0 {
            self.diff *= RESCALE_HIGH;
            self.cur *= RESCALE_HIGH;
            self.ln_scale -= LN_RESCALE;
            self.factor = scale_factor(self.ln_scale);
        }
    }

    /// Advance until the current order equals `k`.
    pub fn advance_to(&mut self, k: usize) {
        while self.k < k {
            self.advance();
        }
    }
}

fn scale_factor(ln_scale: f64) -> f64 {
    if ln_scale.abs() < 700.0 {
        ln_scale.exp()
    } else {
        f64::NAN
    }
}

fn check_argument(z: f64) -> Result<()> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!(
            "Laguerre argument must be finite and nonnegative, got {z}"
        )));
    }
    Ok(())
}

/// `𝓛_k(z) = e^{-z/2} L_k(z)`.
pub fn weighted_laguerre(k: usize, z: f64) -> Result<f64> {
    let mut sweep = LaguerreSweep::new(z)?;
    sweep.advance_to(k);
    Ok(sweep.value())
}

/// Sign and log-magnitude of `𝓛_k(z)`.
pub fn weighted_laguerre_ln(k: usize, z: f64) -> Result<SignedLog> {
    let mut sweep = LaguerreSweep::new(z)?;
    sweep.advance_to(k);
    Ok(sweep.log_value())
}

/// `(𝓛_k(z) − 𝓛_{k-1}(z), 𝓛_k(z))`, with `𝓛_{-1} = 0`.
pub fn weighted_laguerre_with_difference(k: usize, z: f64) -> Result<(f64, f64)> {
    let mut sweep = LaguerreSweep::new(z)?;
    sweep.advance_to(k);
    Ok((sweep.difference(), sweep.value()))
}

/// All orders `𝓛_0(z), …, 𝓛_{k_max}(z)` from one sweep.
pub fn weighted_laguerre_all(k_max: usize, z: f64) -> Result<Vec<f64>> {
    let mut sweep = LaguerreSweep::new(z)?;
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(sweep.value());
    for _ in 0..k_max {
        sweep.advance();
        out.push(sweep.value());
    }
    Ok(out)
}

/// Radial eigenfunction `e_k` at `|x| = r`, i.e. `π^{-1/2} 𝓛_k(r²)`.
pub fn eigenfunction(k: usize, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!(
            "radius must be nonnegative, got {r}"
        )));
    }
    Ok(weighted_laguerre(k, r * r)? / PI.sqrt())
}

/// `e_k` as a function of `z = |x|²`.
pub fn eigenfunction_of_z(k: usize, z: f64) -> Result<f64> {
    Ok(weighted_laguerre(k, z)? / PI.sqrt())
}

/// `e_0, …, e_{k_max}` at `z = |x|²`.
pub fn eigenfunctions_of_z(k_max: usize, z: f64) -> Result<Vec<f64>> {
    let s = PI.sqrt().recip();
    Ok(weighted_laguerre_all(k_max, z)?
        .into_iter()
        .map(|v| v * s)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn low_orders_match_closed_forms() {
        assert_eq!(weighted_laguerre(0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(weighted_laguerre(5, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            weighted_laguerre(1, 2.0).unwrap(),
            -(-1.0f64).exp(),
            epsilon = 1e-15
        );
        let z: f64 = 0.7;
        let l2 = (z * z / 2.0 - 2.0 * z + 1.0) * (-z / 2.0).exp();
        assert_relative_eq!(weighted_laguerre(2, z).unwrap(), l2, epsilon = 1e-15);
    }

    #[test]
    fn eigenvalues() {
        assert_eq!(eigenvalue(0), 2.0);
        assert_eq!(eigenvalue(1), 6.0);
        assert_eq!(BasisIndex(100).eigenvalue(), 402.0);
    }

    #[test]
    fn ground_state() {
        assert_relative_eq!(eigenfunction(0, 0.0).unwrap(), PI.sqrt().recip());
        for r in [0.3, 1.0, 2.5] {
            assert_relative_eq!(
                eigenfunction(0, r).unwrap(),
                (-r * r / 2.0).exp() / PI.sqrt(),
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn negative_arguments_are_rejected() {
        assert!(matches!(weighted_laguerre(3, -1.0), Err(Error::Domain(_))));
        assert!(matches!(eigenfunction(3, -0.5), Err(Error::Domain(_))));
        assert!(weighted_laguerre(3, f64::NAN).is_err());
    }

    #[test]
    fn extreme_orders_stay_finite() {
        let k = 1 << 16;
        let nu = eigenvalue(k);
        for z in [0.0, 1.0, nu / 2.0, nu, 3.0 * nu, 10.0 * nu] {
            let v = weighted_laguerre(k, z).unwrap();
            assert!(v.is_finite(), "k={k} z={z}");
            assert!(v.abs() <= 1.0 + 1e-9);
            let lg = weighted_laguerre_ln(k, z).unwrap();
            assert!(lg.ln_abs.is_finite() || lg.sign == 0.0);
        }
        // deep tail: the value underflows but the logarithm stays informative
        let lg = weighted_laguerre_ln(k, 10.0 * nu).unwrap();
        assert!(lg.ln_abs < -1e4);
    }

    #[test]
    fn all_orders_match_single_evaluations() {
        let z = 13.25;
        let all = weighted_laguerre_all(40, z).unwrap();
        for (k, v) in all.iter().enumerate() {
            assert_eq!(*v, weighted_laguerre(k, z).unwrap());
        }
        let (diff, cur) = weighted_laguerre_with_difference(40, z).unwrap();
        assert!((diff - (all[40] - all[39])).abs() < 1e-15);
        assert_eq!(cur, all[40]);
    }

    #[test]
    fn bounded_by_one() {
        // |𝓛_k(z)| ≤ 1 for all z ≥ 0
        for k in [0, 1, 7, 50, 333] {
            for i in 0..400 {
                let z = i as f64 * 0.37;
                assert!(weighted_laguerre(k, z).unwrap().abs() <= 1.0 + 1e-12);
            }
        }
    }
}
