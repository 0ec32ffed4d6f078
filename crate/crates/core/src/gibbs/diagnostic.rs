//! Convergence of the truncated densities `ρ_K` along a common stream of draws.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::{GibbsConfig, GibbsDensity, Sign};
use crate::random_field::{sample_free_field, RandomSeed};
use crate::stats::Moments;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CauchyDifference {
    pub k_low: usize,
    pub k_high: usize,
    /// `E|ρ_{K_low} - ρ_{K_high}|^r` and its standard error, for `r = 1, 2`.
    pub moments: [(f64, f64); 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: GibbsConfig,
    pub truncations: Vec<usize>,
    pub n_samples: usize,
    pub differences: Vec<CauchyDifference>,
    /// Every consecutive difference is at most the previous one plus three
    /// combined standard errors, for both exponents.
    pub monotone_within_error: bool,
}

/// Draw `n` fields at the largest truncation, evaluate `ρ_K` of their consistent
/// truncations for every `K` in `truncations`, and measure consecutive differences.
///
/// `config.k_max` is ignored; the truncations come from the list.
pub fn density_convergence_diagnostic(
    truncations: &[usize],
    config: GibbsConfig,
    n: usize,
    seed: RandomSeed,
) -> Result<ConvergenceReport> {
    if truncations.is_empty() || truncations.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "truncations must be nonempty and ascending".into(),
        ));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let densities = truncations
        .iter()
        .map(|&k| GibbsDensity::new(GibbsConfig { k_max: k, ..config }))
        .collect::<Result<Vec<_>>>()?;
    let top = *truncations.last().expect("nonempty");
    let pairs = truncations.len().saturating_sub(1);
    let acc = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let s = sample_free_field(top, seed.member(i));
            let rho: Vec<f64> = densities
                .iter()
                .map(|d| d.weight(s.coeffs.as_slice()))
                .collect();
            let mut m = vec![[Moments::default(); 2]; pairs];
            for (j, slot) in m.iter_mut().enumerate() {
                let d = (rho[j] - rho[j + 1]).abs();
                slot[0].push(d);
                slot[1].push(d * d);
            }
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(vec![[Moments::default(); 2]; pairs], |a, b| {
            a.into_iter()
                .zip(b)
                .map(|(x, y)| [x[0].merge(y[0]), x[1].merge(y[1])])
                .collect()
        });
    let differences: Vec<CauchyDifference> = acc
        .iter()
        .enumerate()
        .map(|(j, m)| CauchyDifference {
            k_low: truncations[j],
            k_high: truncations[j + 1],
            moments: [
                (m[0].mean(), m[0].standard_error()),
                (m[1].mean(), m[1].standard_error()),
            ],
        })
        .collect();
    let monotone_within_error = differences.windows(2).all(|w| {
        (0..2).all(|r| {
            let (a, sa) = w[0].moments[r];
            let (b, sb) = w[1].moments[r];
            b <= a + 3.0 * (sa * sa + sb * sb).sqrt()
        })
    });
    Ok(ConvergenceReport {
        config,
        truncations: truncations.to_vec(),
        n_samples: n,
        differences,
        monotone_within_error,
    })
}

/// Defaults used by the reports: the paper-style dyadic truncations.
pub fn default_truncations() -> Vec<usize> {
    vec![4, 8, 16, 32, 64]
}

/// Convenience wrapper taking the nonlinearity directly.
pub fn density_convergence_for(
    truncations: &[usize],
    p: f64,
    sign: Sign,
    n: usize,
    seed: RandomSeed,
) -> Result<ConvergenceReport> {
    let config = match sign {
        Sign::Defocusing => GibbsConfig::defocusing(p, truncations[0]),
        Sign::Focusing => GibbsConfig::focusing(p, truncations[0]),
    };
    density_convergence_diagnostic(truncations, config, n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_truncations_give_zero() {
        let r = density_convergence_for(&[8, 8], 3.0, Sign::Defocusing, 50, RandomSeed::new(1, 1))
            .unwrap();
        assert_eq!(r.differences[0].moments[0].0, 0.0);
        assert_eq!(r.differences[0].moments[1].0, 0.0);
    }

    #[test]
    fn rejects_descending_list() {
        assert!(
            density_convergence_for(&[8, 4], 3.0, Sign::Defocusing, 10, RandomSeed::new(0, 0))
                .is_err()
        );
    }
}
