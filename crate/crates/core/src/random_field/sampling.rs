//! Free-field samples `f = Σ (4k+2)^{-1/2} g_k e_k` and their Sobolev statistics.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::laguerre::eigenvalue;
use crate::quadrature::SpectralCoefficients;
use crate::stats::Moments;
use crate::{Error, Result};

/// Seed and stream of a ChaCha8 generator.
///
/// Every ensemble member draws from its own stream, so members can be produced
/// in any order (or in parallel) and still replay bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RandomSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// Seed for the `index`-th member of an ensemble rooted at `self`.
    pub fn member(&self, index: u64) -> RandomSeed {
        RandomSeed {
            seed: splitmix64(self.seed ^ splitmix64(self.stream)),
            stream: index,
        }
    }
}

pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Standard complex Gaussian: density `π^{-1} e^{-|z|²}`, so `E|g|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// One draw of the truncated free field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeFieldSample {
    pub coeffs: SpectralCoefficients,
    pub gaussians: Vec<Complex64>,
}

impl FreeFieldSample {
    /// Draw `g_0, …, g_K` from `rng`.
    pub fn draw<R: Rng + ?Sized>(k_max: usize, rng: &mut R) -> Self {
        let gaussians: Vec<Complex64> = (0..=k_max).map(|_| complex_gaussian(rng)).collect();
        Self::from_gaussians(gaussians).expect("gaussians are finite and nonempty")
    }

    /// Build from given `g_k`, setting `c_k = g_k / √(4k+2)`.
    pub fn from_gaussians(gaussians: Vec<Complex64>) -> Result<Self> {
        let c = gaussians
            .iter()
            .enumerate()
            .map(|(k, g)| g / eigenvalue(k).sqrt())
            .collect();
        Ok(Self {
            coeffs: SpectralCoefficients::new(c)?,
            gaussians,
        })
    }

    pub fn k_max(&self) -> usize {
        self.coeffs.k_max()
    }

    /// The same draw restricted to modes `0..=k_max`.
    pub fn truncated(&self, k_max: usize) -> Self {
        let k = k_max.min(self.k_max());
        Self {
            coeffs: self.coeffs.resized(k),
            gaussians: self.gaussians[..=k].to_vec(),
        }
    }
}

/// Draw a free field with `K + 1` modes from the given stream.
pub fn sample_free_field(k_max: usize, seed: RandomSeed) -> FreeFieldSample {
    FreeFieldSample::draw(k_max, &mut seed.rng())
}

/// `Σ_k (4k+2)^τ |c_k|²`.
pub fn sobolev_norm_sq(sample: &FreeFieldSample, tau: f64) -> f64 {
    sample
        .coeffs
        .as_slice()
        .iter()
        .enumerate()
        .map(|(k, c)| eigenvalue(k).powf(tau) * c.norm_sqr())
        .sum()
}

/// The same norm written through the Gaussians: `Σ_k (4k+2)^{τ-1} |g_k|²`.
pub fn sobolev_norm_sq_from_gaussians(sample: &FreeFieldSample, tau: f64) -> f64 {
    sample
        .gaussians
        .iter()
        .enumerate()
        .map(|(k, g)| eigenvalue(k).powf(tau - 1.0) * g.norm_sqr())
        .sum()
}

/// Expected squared `H^τ` norm of the field truncated at `K`: `Σ_{k ≤ K} (4k+2)^{τ-1}`.
pub fn expected_sobolev_norm_sq(k_max: usize, tau: f64) -> f64 {
    (0..=k_max).map(|k| eigenvalue(k).powf(tau - 1.0)).sum()
}

/// `α_K = Σ_{j ≤ K} 1/(4j+2)`, the expected mass of the truncated field.
pub fn alpha(k_max: usize) -> f64 {
    expected_sobolev_norm_sq(k_max, 0.0)
}

/// Monte Carlo mean of a sample statistic against its deterministic value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanCheck {
    pub k_max: usize,
    pub mean: f64,
    pub standard_error: f64,
    pub expected: f64,
    pub within_three_se: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    pub n_samples: usize,
    /// `‖f_K‖²_{H^{-1/2}}` at the largest `K`.
    pub negative_regularity: MeanCheck,
    /// `‖f_K‖²_{L²}` along dyadic `K`, from the same draws truncated consistently.
    pub mass_means: Vec<MeanCheck>,
    pub mass_strictly_increasing: bool,
}

/// Draw `n` fields at `K = 2^{max_exponent}` and compare the `H^{-1/2}` mean with
/// its finite limit, while the `L²` means along `K = 2^4 … 2^{max_exponent}` keep growing.
pub fn regularity_dichotomy(
    max_exponent: u32,
    n: usize,
    seed: RandomSeed,
) -> Result<RegularityReport> {
    if !(4..=20).contains(&max_exponent) {
        return Err(Error::InvalidParameter(format!(
            "max exponent must lie in 4..=20, got {max_exponent}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let k_top = 1usize << max_exponent;
    let cuts: Vec<usize> = (4..=max_exponent).map(|j| 1usize << j).collect();
    let weights: Vec<f64> = (0..=k_top).map(|k| eigenvalue(k).powf(-1.5)).collect();
    let (neg, mass) = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let s = sample_free_field(k_top, seed.member(i));
            let mut neg = Moments::default();
            neg.push(
                s.gaussians
                    .iter()
                    .zip(&weights)
                    .map(|(g, w)| w * g.norm_sqr())
                    .sum::<f64>(),
            );
            let mut acc = 0.0;
            let mut mass = vec![Moments::default(); cuts.len()];
            let mut next = 0;
            for (k, c) in s.coeffs.as_slice().iter().enumerate() {
                acc += c.norm_sqr();
                if next < cuts.len() && k == cuts[next] {
                    mass[next].push(acc);
                    next += 1;
                }
            }
            (neg, mass)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(
            (Moments::default(), vec![Moments::default(); cuts.len()]),
            |(a, ma), (b, mb)| {
                (
                    a.merge(b),
                    ma.into_iter().zip(mb).map(|(x, y)| x.merge(y)).collect(),
                )
            },
        );
    let check = |k_max: usize, m: &Moments, expected: f64| MeanCheck {
        k_max,
        mean: m.mean(),
        standard_error: m.standard_error(),
        expected,
        within_three_se: (m.mean() - expected).abs() <= 3.0 * m.standard_error(),
    };
    let negative_regularity = check(k_top, &neg, expected_sobolev_norm_sq(k_top, -0.5));
    let mass_means: Vec<MeanCheck> = cuts
        .iter()
        .zip(&mass)
        .map(|(&k, m)| check(k, m, alpha(k)))
        .collect();
    let mass_strictly_increasing = mass_means.windows(2).all(|w| w[1].mean > w[0].mean);
    Ok(RegularityReport {
        n_samples: n,
        negative_regularity,
        mass_means,
        mass_strictly_increasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_values() {
        assert_eq!(alpha(0), 0.5);
        assert!((alpha(1) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn same_seed_same_sample() {
        let s = RandomSeed::new(11, 3);
        assert_eq!(sample_free_field(20, s), sample_free_field(20, s));
        assert_ne!(
            sample_free_field(20, s),
            sample_free_field(20, RandomSeed::new(11, 4))
        );
        assert_ne!(s.member(0), s.member(1));
    }

    #[test]
    fn unit_gaussians_give_alpha() {
        let s = FreeFieldSample::from_gaussians(vec![Complex64::new(1.0, 0.0); 2]).unwrap();
        assert!((sobolev_norm_sq(&s, 0.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn truncation_keeps_leading_modes() {
        let s = sample_free_field(10, RandomSeed::new(1, 0));
        let t = s.truncated(4);
        assert_eq!(t.k_max(), 4);
        assert_eq!(t.coeffs.as_slice(), &s.coeffs.as_slice()[..5]);
    }
}
