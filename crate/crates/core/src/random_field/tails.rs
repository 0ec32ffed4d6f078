//! Empirical exceedance curves `P(‖f_K‖_{W^{α,q}} > A)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{sample_free_field, RandomSeed};
use crate::basis::laguerre::eigenvalue;
use crate::quadrature::PowerNorm;
use crate::stats::{weighted_linear_fit, LinearFit};
use crate::{Error, Result};

/// Fewest exceedances the automatic grid keeps at its largest threshold.
const MIN_TAIL_COUNT: usize = 30;
const AUTO_GRID_POINTS: usize = 12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailSpec {
    pub k_max: usize,
    pub q: f64,
    pub regularity: f64,
    /// Thresholds `A`; chosen from the sample quantiles when absent.
    pub thresholds: Option<Vec<f64>>,
    pub n_samples: usize,
    pub seed: RandomSeed,
}

impl TailSpec {
    fn validate(&self) -> Result<()> {
        if !(self.q > 2.0 && self.q.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tail exponent must satisfy 2 < q < ∞, got {}",
                self.q
            )));
        }
        let cap = (2.0 / self.q).min(1.0 - 2.0 / self.q);
        if !(self.regularity > 0.0 && self.regularity < cap) {
            return Err(Error::InvalidParameter(format!(
                "regularity must lie in (0, {cap}) for q = {}, got {}",
                self.q, self.regularity
            )));
        }
        if self.n_samples < 2 * MIN_TAIL_COUNT {
            return Err(Error::InvalidParameter(format!(
                "need at least {} samples",
                2 * MIN_TAIL_COUNT
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailPoint {
    pub threshold: f64,
    pub exceedances: usize,
    pub probability: f64,
    /// Binomial standard error `√(P(1-P)/n)`.
    pub standard_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailCurve {
    pub spec: TailSpec,
    pub median: f64,
    pub points: Vec<TailPoint>,
    /// Weighted fit of `ln P` against `A²` over points with at least one exceedance.
    pub fit: LinearFit,
}

impl TailCurve {
    pub fn is_nonincreasing(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].probability <= w[0].probability)
    }
}

/// `‖f‖_{W^{α,q}}` of every sample, computed spectrally: the multiplier
/// `(4k+2)^{α/2}` is applied to the coefficients and the `L^q` norm is taken on
/// a grid exact for the resulting polynomial when `q` is an even integer.
pub fn sample_sobolev_lq_norms(spec: &TailSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let evaluator = PowerNorm::new(spec.k_max, spec.q)?;
    let multiplier: Vec<f64> = (0..=spec.k_max)
        .map(|k| eigenvalue(k).powf(spec.regularity / 2.0))
        .collect();
    let nodes = evaluator.grid().len();
    Ok((0..spec.n_samples as u64)
        .into_par_iter()
        .map_init(
            || {
                (
                    vec![Complex64::new(0.0, 0.0); nodes],
                    vec![Complex64::new(0.0, 0.0); spec.k_max + 1],
                )
            },
            |(scratch, c), i| {
                let s = sample_free_field(spec.k_max, spec.seed.member(i));
                for ((out, v), m) in c.iter_mut().zip(s.coeffs.as_slice()).zip(&multiplier) {
                    *out = v * m;
                }
                evaluator.powered_with(c, scratch).powf(1.0 / spec.q)
            },
        )
        .collect())
}

/// Exceedance curve with binomial error bars and the Gaussian-tail fit.
pub fn tail_exceedance_curve(spec: &TailSpec) -> Result<TailCurve> {
    let mut norms = sample_sobolev_lq_norms(spec)?;
    norms.sort_by(|a, b| a.total_cmp(b));
    let n = norms.len();
    let median = norms[n / 2];
    let thresholds = match &spec.thresholds {
        Some(t) => t.clone(),
        None => {
            let top = norms[n - MIN_TAIL_COUNT];
            (0..AUTO_GRID_POINTS)
                .map(|i| {
                    let s = i as f64 / (AUTO_GRID_POINTS - 1) as f64;
                    (median * median + s * (top * top - median * median)).sqrt()
                })
                .collect()
        }
    };
    let points: Vec<TailPoint> = thresholds
        .iter()
        .map(|&a| {
            let below = norms.partition_point(|&v| v <= a);
            let exceedances = n - below;
            let p = exceedances as f64 / n as f64;
            TailPoint {
                threshold: a,
                exceedances,
                probability: p,
                standard_error: (p * (1.0 - p) / n as f64).sqrt(),
            }
        })
        .collect();
    let usable: Vec<&TailPoint> = points
        .iter()
        .filter(|p| p.exceedances > 0 && p.exceedances < n)
        .collect();
    if usable.len() < 3 {
        return Err(Error::InvalidParameter(
            "fewer than three thresholds with a nondegenerate exceedance count".into(),
        ));
    }
    let x: Vec<f64> = usable.iter().map(|p| p.threshold * p.threshold).collect();
    let y: Vec<f64> = usable.iter().map(|p| p.probability.ln()).collect();
    // Var(ln P̂) ≈ (1 - P) / (n P)
    let w: Vec<f64> = usable
        .iter()
        .map(|p| n as f64 * p.probability / (1.0 - p.probability))
        .collect();
    let fit = weighted_linear_fit(&x, &y, &w);
    Ok(TailCurve {
        spec: spec.clone(),
        median,
        points,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize) -> TailSpec {
        TailSpec {
            k_max: 16,
            q: 6.0,
            regularity: 0.2,
            thresholds: None,
            n_samples: n,
            seed: RandomSeed::new(5, 0),
        }
    }

    #[test]
    fn parameter_region() {
        let mut s = spec(1000);
        s.q = 2.0;
        assert!(tail_exceedance_curve(&s).is_err());
        let mut s = spec(1000);
        s.regularity = 0.4;
        assert!(tail_exceedance_curve(&s).is_err());
    }

    #[test]
    fn median_anchor_and_monotone() {
        let c = tail_exceedance_curve(&spec(4000)).unwrap();
        assert!((c.points[0].probability - 0.5).abs() < 0.01);
        assert!(c.is_nonincreasing());
        assert!(c.fit.slope < 0.0);
    }
}
