//! Check of the four-region pointwise envelope for `𝓛_k`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::laguerre::{eigenvalue, LaguerreSweep};
use crate::{Error, Result};

/// Upper end of the sampled exterior region, in units of `ν`.
pub const EXTERIOR_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeRegion {
    /// `[0, 1/ν]`: bounded.
    Origin,
    /// `[1/ν, ν/2]`: `(zν)^{-1/4}`.
    Oscillatory,
    /// `[ν/2, 3ν/2]`: `ν^{-1/4}(ν^{1/3} + |ν − z|)^{-1/4}`.
    Transition,
    /// `[3ν/2, ∞)`: `e^{-cz}`.
    Exterior,
}

impl EnvelopeRegion {
    pub const ALL: [EnvelopeRegion; 4] = [
        EnvelopeRegion::Origin,
        EnvelopeRegion::Oscillatory,
        EnvelopeRegion::Transition,
        EnvelopeRegion::Exterior,
    ];

    fn sample_points(self, nu: f64, count: usize) -> Vec<f64> {
        let t = |i: usize| i as f64 / (count.max(2) - 1) as f64;
        match self {
            EnvelopeRegion::Origin => (0..count).map(|i| t(i) / nu).collect(),
            EnvelopeRegion::Oscillatory => {
                let (lo, hi) = ((1.0 / nu).ln(), (nu / 2.0).ln());
                (0..count).map(|i| (lo + (hi - lo) * t(i)).exp()).collect()
            }
            EnvelopeRegion::Transition => (0..count).map(|i| nu * (0.5 + t(i))).collect(),
            EnvelopeRegion::Exterior => (0..count)
                .map(|i| nu * (1.5 + (EXTERIOR_LIMIT - 1.5) * t(i)))
                .collect(),
        }
    }

    /// `ln` of the envelope with unit constant.
    fn ln_envelope(self, nu: f64, z: f64, decay_rate: f64) -> f64 {
        match self {
            EnvelopeRegion::Origin => 0.0,
            EnvelopeRegion::Oscillatory => -0.25 * (z * nu).ln(),
            EnvelopeRegion::Transition => {
                -0.25 * nu.ln() - 0.25 * (nu.cbrt() + (nu - z).abs()).ln()
            }
            EnvelopeRegion::Exterior => -decay_rate * z,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionResult {
    pub region: EnvelopeRegion,
    pub max_ratio: f64,
    pub worst_index: usize,
    pub worst_point: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub k_max: usize,
    pub samples_per_region: usize,
    pub decay_rate: f64,
    pub regions: Vec<RegionResult>,
    /// Smallest constant bounding every sampled ratio.
    pub fitted_constant: f64,
    /// Number of sampled ratios above the reference constant, if one was supplied.
    pub violations: usize,
    pub reference_constant: Option<f64>,
}

impl EnvelopeReport {
    /// A single finite constant bounds all four regions (and the reference, if given).
    pub fn passed(&self) -> bool {
        self.fitted_constant.is_finite() && self.violations == 0
    }
}

/// Largest `ln|𝓛_k(z)| / z` over sampled exterior points, for all `k ≤ k_max`.
///
/// Any decay rate below the negative of this value makes the exterior envelope
/// bounded; it is the input used to pick the frozen rate.
pub fn exterior_decay_bound(k_max: usize, samples: usize) -> Result<f64> {
    let worst = (0..=k_max)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let nu = eigenvalue(k);
            let mut best = f64::NEG_INFINITY;
            for z in EnvelopeRegion::Exterior.sample_points(nu, samples) {
                let mut s = LaguerreSweep::new(z)?;
                s.advance_to(k);
                best = best.max(s.log_value().ln_abs / z);
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(worst.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Sample every region for every `k ≤ k_max` and report the worst ratios
/// `|𝓛_k(z)| / envelope(z)` (unit constant).
pub fn pointwise_envelope_check(
    k_max: usize,
    samples_per_region: usize,
    decay_rate: f64,
    reference_constant: Option<f64>,
) -> Result<EnvelopeReport> {
    if k_max < 1 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    if samples_per_region < 2 {
        return Err(Error::InvalidParameter(
            "need at least two samples per region".into(),
        ));
    }
    if !(decay_rate > 0.0) {
        return Err(Error::InvalidParameter(
            "decay rate must be positive".into(),
        ));
    }
    // per k: (ln max ratio, z) for each region, plus count above reference
    let per_k = (0..=k_max)
        .into_par_iter()
        .map(|k| -> Result<([(f64, f64); 4], usize)> {
            let nu = eigenvalue(k);
            let mut out = [(f64::NEG_INFINITY, 0.0); 4];
            let mut above = 0;
            let ln_ref = reference_constant.map(f64::ln);
            for (slot, region) in EnvelopeRegion::ALL.iter().enumerate() {
                for z in region.sample_points(nu, samples_per_region) {
                    let mut s = LaguerreSweep::new(z)?;
                    s.advance_to(k);
                    let lv = s.log_value();
                    if lv.sign == 0.0 {
                        continue;
                    }
                    let ln_ratio = lv.ln_abs - region.ln_envelope(nu, z, decay_rate);
                    if ln_ratio > out[slot].0 {
                        out[slot] = (ln_ratio, z);
                    }
                    if let Some(r) = ln_ref {
                        if ln_ratio > r {
                            above += 1;
                        }
                    }
                }
            }
            Ok((out, above))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut regions = Vec::new();
    for (slot, region) in EnvelopeRegion::ALL.iter().enumerate() {
        let (k, (ln_ratio, z)) = per_k
            .iter()
            .enumerate()
            .map(|(k, (r, _))| (k, r[slot]))
            .fold((0, (f64::NEG_INFINITY, 0.0)), |acc, x| {
                if x.1 .0 > acc.1 .0 {
                    x
                } else {
                    acc
                }
            });
        regions.push(RegionResult {
            region: *region,
            max_ratio: ln_ratio.exp(),
            worst_index: k,
            worst_point: z,
        });
    }
    let fitted_constant = regions.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    let violations = per_k.iter().map(|(_, a)| a).sum();
    Ok(EnvelopeReport {
        k_max,
        samples_per_region,
        decay_rate,
        regions,
        fitted_constant,
        violations,
        reference_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_case_is_finite() {
        let r = pointwise_envelope_check(1, 50, 0.05, None).unwrap();
        assert!(r.regions.iter().all(|x| x.max_ratio.is_finite()));
        assert!(r.passed());
    }

    #[test]
    fn transition_peak_for_ground_state() {
        // at z = ν = 2 the envelope is ν^{-1/4 - 1/12}
        let nu: f64 = 2.0;
        let env = EnvelopeRegion::Transition.ln_envelope(nu, nu, 0.0).exp();
        assert!((env - nu.powf(-1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn invalid_arguments() {
        assert!(pointwise_envelope_check(0, 10, 0.1, None).is_err());
        assert!(pointwise_envelope_check(4, 10, 0.0, None).is_err());
    }
}
