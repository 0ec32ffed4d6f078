//! Importance-weighted ensembles over the free-field measure.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::{GibbsConfig, GibbsDensity};
use crate::quadrature::SpectralCoefficients;
use crate::random_field::{sample_free_field, FreeFieldSample, RandomSeed};
use crate::stats::mean_and_se;
use crate::{Error, Result};

/// Smallest effective sample size accepted by [`WeightedEnsemble::expectation`].
pub const MIN_EFFECTIVE_SAMPLE_SIZE: f64 = 100.0;

const MAGIC: &[u8; 4] = b"HGEN";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub seed: RandomSeed,
    pub sample: FreeFieldSample,
    pub weight: f64,
}

/// Free-field draws with Radon–Nikodym weights of the configured Gibbs density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEnsemble {
    pub config: GibbsConfig,
    pub seed: RandomSeed,
    pub members: Vec<EnsembleMember>,
}

/// Summary numbers reported with every ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub size: usize,
    /// `Ẑ`, the mean weight.
    pub normalization: f64,
    pub normalization_se: f64,
    pub effective_sample_size: f64,
}

/// Draw `n` members with streams `seed.member(0..n)` and weight them.
pub fn build_ensemble(n: usize, config: GibbsConfig, seed: RandomSeed) -> Result<WeightedEnsemble> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "ensemble size must be at least 1".into(),
        ));
    }
    let density = GibbsDensity::new(config)?;
    let members = (0..n as u64)
        .into_par_iter()
        .map_init(
            || density.scratch(),
            |scratch, i| {
                let s = seed.member(i);
                let sample = sample_free_field(config.k_max, s);
                let weight = density.weight_with(sample.coeffs.as_slice(), scratch);
                EnsembleMember {
                    seed: s,
                    sample,
                    weight,
                }
            },
        )
        .collect();
    Ok(WeightedEnsemble {
        config,
        seed,
        members,
    })
}

/// `(Σw)² / Σw²`.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 == 0.0 {
        0.0
    } else {
        s * s / s2
    }
}

/// Self-normalized estimate `Σ w f / Σ w` with its delta-method standard error.
pub fn self_normalized(weights: &[f64], values: &[f64]) -> Result<(f64, f64)> {
    assert_eq!(weights.len(), values.len());
    let sw: f64 = weights.iter().sum();
    if !(sw > 0.0) {
        return Err(Error::DegenerateWeights);
    }
    let est = weights.iter().zip(values).map(|(w, f)| w * f).sum::<f64>() / sw;
    let var = weights
        .iter()
        .zip(values)
        .map(|(w, f)| (w * (f - est)).powi(2))
        .sum::<f64>()
        / (sw * sw);
    Ok((est, var.sqrt()))
}

impl WeightedEnsemble {
    /// Reweight externally supplied members under `config`.
    pub fn from_members(
        config: GibbsConfig,
        seed: RandomSeed,
        samples: Vec<(RandomSeed, FreeFieldSample)>,
    ) -> Result<Self> {
        let density = GibbsDensity::new(config)?;
        let members = samples
            .into_iter()
            .map(|(s, sample)| EnsembleMember {
                weight: density.weight(sample.coeffs.as_slice()),
                seed: s,
                sample,
            })
            .collect();
        Ok(Self {
            config,
            seed,
            members,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.weight).collect()
    }

    pub fn effective_sample_size(&self) -> f64 {
        effective_sample_size(&self.weights())
    }

    pub fn summary(&self) -> EnsembleSummary {
        let w = self.weights();
        let (normalization, normalization_se) = mean_and_se(&w);
        EnsembleSummary {
            size: w.len(),
            normalization,
            normalization_se,
            effective_sample_size: effective_sample_size(&w),
        }
    }

    /// Self-normalized `∫F dν / ∫dν`; requires an effective sample size of at least 100.
    pub fn expectation(
        &self,
        observable: impl Fn(&SpectralCoefficients) -> f64,
    ) -> Result<(f64, f64)> {
        let w = self.weights();
        if w.iter().all(|&x| x == 0.0) {
            return Err(Error::DegenerateWeights);
        }
        let ess = effective_sample_size(&w);
        if ess < MIN_EFFECTIVE_SAMPLE_SIZE {
            return Err(Error::InsufficientSampleSize {
                ess,
                required: MIN_EFFECTIVE_SAMPLE_SIZE,
            });
        }
        let values: Vec<f64> = self
            .members
            .iter()
            .map(|m| observable(&m.sample.coeffs))
            .collect();
        self_normalized(&w, &values)
    }

    /// Versioned binary container: header (magic, version, config as JSON, root
    /// seed, `K`, member count), then per member its seed, weight, and the raw
    /// Gaussians `g_0 … g_K` as little-endian `f64` pairs.
    pub fn write_binary(&self, mut out: impl Write) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&FORMAT_VERSION.to_le_bytes())?;
        let cfg = serde_json::to_vec(&self.config)?;
        out.write_all(&(cfg.len() as u32).to_le_bytes())?;
        out.write_all(&cfg)?;
        for v in [
            self.seed.seed,
            self.seed.stream,
            self.config.k_max as u64,
            self.members.len() as u64,
        ] {
            out.write_all(&v.to_le_bytes())?;
        }
        for m in &self.members {
            out.write_all(&m.seed.seed.to_le_bytes())?;
            out.write_all(&m.seed.stream.to_le_bytes())?;
            out.write_all(&m.weight.to_le_bytes())?;
            for g in &m.sample.gaussians {
                out.write_all(&g.re.to_le_bytes())?;
                out.write_all(&g.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary(mut input: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not an ensemble file (bad magic)".into()));
        }
        let version = read_u32(&mut input)?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported ensemble format version {version}"
            )));
        }
        let cfg_len = read_u32(&mut input)? as usize;
        let mut cfg = vec![0u8; cfg_len];
        input.read_exact(&mut cfg)?;
        let config: GibbsConfig = serde_json::from_slice(&cfg)?;
        let seed = RandomSeed::new(read_u64(&mut input)?, read_u64(&mut input)?);
        let k_max = read_u64(&mut input)? as usize;
        if k_max != config.k_max {
            return Err(Error::Format(
                "header truncation disagrees with the config".into(),
            ));
        }
        let n = read_u64(&mut input)? as usize;
        let mut members = Vec::with_capacity(n.min(1 << 24));
        for _ in 0..n {
            let s = RandomSeed::new(read_u64(&mut input)?, read_u64(&mut input)?);
            let weight = read_f64(&mut input)?;
            let mut g = Vec::with_capacity(k_max + 1);
            for _ in 0..=k_max {
                g.push(Complex64::new(read_f64(&mut input)?, read_f64(&mut input)?));
            }
            members.push(EnsembleMember {
                seed: s,
                sample: FreeFieldSample::from_gaussians(g)?,
                weight,
            });
        }
        Ok(Self {
            config,
            seed,
            members,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_binary(f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// One CSV row per member: `seed, stream, K, weight, re_0, im_0, …`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let k_max = self.config.k_max;
        let mut header = vec![
            "seed".to_string(),
            "stream".into(),
            "k_max".into(),
            "weight".into(),
        ];
        for k in 0..=k_max {
            header.push(format!("re_{k}"));
            header.push(format!("im_{k}"));
        }
        w.write_record(&header)?;
        for m in &self.members {
            let mut row = vec![
                m.seed.seed.to_string(),
                m.seed.stream.to_string(),
                k_max.to_string(),
                format!("{:e}", m.weight),
            ];
            for c in m.sample.coeffs.as_slice() {
                row.push(format!("{:e}", c.re));
                row.push(format!("{:e}", c.im));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_fields_have_unit_weight() {
        let cfg = GibbsConfig::defocusing(3.0, 4);
        let zeros = (0..50)
            .map(|i| {
                (
                    RandomSeed::new(0, i),
                    FreeFieldSample::from_gaussians(vec![Complex64::new(0.0, 0.0); 5]).unwrap(),
                )
            })
            .collect();
        let e = WeightedEnsemble::from_members(cfg, RandomSeed::new(0, 0), zeros).unwrap();
        assert!(e.weights().iter().all(|&w| w == 1.0));
        assert_eq!(e.effective_sample_size(), 50.0);
    }

    #[test]
    fn degenerate_weights_are_rejected() {
        assert!(matches!(
            self_normalized(&[0.0, 0.0], &[1.0, 2.0]),
            Err(Error::DegenerateWeights)
        ));
    }

    #[test]
    fn small_ensembles_refuse_expectations() {
        let e = build_ensemble(20, GibbsConfig::defocusing(3.0, 4), RandomSeed::new(1, 0)).unwrap();
        assert!(matches!(
            e.expectation(|c| c.mass()),
            Err(Error::InsufficientSampleSize { .. })
        ));
    }

    #[test]
    fn binary_round_trip() {
        let e = build_ensemble(30, GibbsConfig::focusing(2.0, 6), RandomSeed::new(4, 2)).unwrap();
        let mut buf = Vec::new();
        e.write_binary(&mut buf).unwrap();
        let back = WeightedEnsemble::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back, e);
        buf[0] = b'X';
        assert!(matches!(
            WeightedEnsemble::read_binary(buf.as_slice()),
            Err(Error::Format(_))
        ));
    }
}
