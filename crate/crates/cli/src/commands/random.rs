use clap::Args;
use harmonic_gibbs::random_field::chaos::pairing_count_sweep;
use harmonic_gibbs::random_field::{
    chaos_sum_second_moment, regularity_dichotomy, tail_exceedance_curve, ChaosIndexSet, DeltaSpec,
    RandomSeed, TailSpec,
};
use harmonic_gibbs::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::app::{Context, Experiment};
use crate::error::CliError;
use crate::report::{Claim, Outcome, Table};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleStats {
    /// Largest truncation is `2^max_exponent`.
    #[arg(long, default_value_t = 12)]
    pub max_exponent: u32,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl Experiment for SampleStats {
    fn run(&self, _: &Context) -> Result<Outcome, CliError> {
        let r = regularity_dichotomy(self.max_exponent, self.n, RandomSeed::new(self.seed, 0))?;
        let neg = &r.negative_regularity;
        let claims = vec![
            Claim::fitted("negative_regularity_mean", neg.mean),
            Claim::at_most(
                "negative_regularity_z",
                (neg.mean - neg.expected).abs() / neg.standard_error,
                3.0,
            ),
            Claim::holds("mass_means_strictly_increasing", r.mass_strictly_increasing),
        ];
        let mut means = Table::new("mass_means", &["k", "mean", "standard_error", "expected"]);
        for m in &r.mass_means {
            means.push([m.k_max as f64, m.mean, m.standard_error, m.expected]);
        }
        Ok(Outcome {
            claims,
            details: serde_json::to_value(&r)?,
            tables: vec![means],
        })
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tails {
    #[arg(long = "K", visible_alias = "kmax", default_value_t = 256)]
    pub k_max: usize,
    #[arg(long, default_value_t = 6.0)]
    pub q: f64,
    /// Sobolev regularity of the norm.
    #[arg(long, default_value_t = 0.2)]
    pub regularity: f64,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.9)]
    pub r_squared_min: f64,
}

impl Experiment for Tails {
    fn run(&self, _: &Context) -> Result<Outcome, CliError> {
        let curve = tail_exceedance_curve(&TailSpec {
            k_max: self.k_max,
            q: self.q,
            regularity: self.regularity,
            thresholds: None,
            n_samples: self.n,
            seed: RandomSeed::new(self.seed, 0),
        })?;
        let claims = vec![
            Claim::below("log_tail_slope", curve.fit.slope, 0.0),
            Claim::above(
                "log_tail_r_squared",
                curve.fit.r_squared,
                self.r_squared_min,
            ),
            Claim::holds("exceedance_nonincreasing", curve.is_nonincreasing()),
        ];
        let mut points = Table::new(
            "exceedance",
            &["threshold", "exceedances", "probability", "standard_error"],
        );
        for p in &curve.points {
            points.push([
                p.threshold,
                p.exceedances as f64,
                p.probability,
                p.standard_error,
            ]);
        }
        Ok(Outcome {
            claims,
            details: serde_json::to_value(&curve)?,
            tables: vec![points],
        })
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chaos {
    /// Dyadic scales `N_1 ≥ N_2 ≥ …`.
    #[arg(long, value_delimiter = ',', default_values_t = [256u64, 8, 8])]
    pub scales: Vec<u64>,
    /// Conjugation pattern, one `±1` per factor.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = [1i8, -1, 1])]
    pub signs: Vec<i8>,
    /// Frequency `ϱ` of the Monte Carlo index set.
    #[arg(long, default_value_t = 65538, allow_negative_numbers = true)]
    pub rho: i64,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 11)]
    pub seed: u64,
    /// Seed of the unimodular coefficients `δ_n`.
    #[arg(long, default_value_t = 3)]
    pub delta_seed: u64,
    /// Frequencies of the pairing-count sweep.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = [10002i64, 65538, 262146, 600002])]
    pub pairing_rhos: Vec<i64>,
    /// Bound on `count / Π_{j≥2} N_j²`.
    #[arg(long, default_value_t = 10.0)]
    pub pairing_limit: f64,
}

impl Experiment for Chaos {
    fn run(&self, _: &Context) -> Result<Outcome, CliError> {
        let set = ChaosIndexSet::new(self.scales.clone(), self.signs.clone(), self.rho)?;
        let delta = DeltaSpec::RandomPhase {
            seed: self.delta_seed,
            scale: Complex64::new(1.0, 0.0),
        };
        let moment = chaos_sum_second_moment(&set, &delta, self.n, RandomSeed::new(self.seed, 0))?;
        let sweep = pairing_count_sweep(&self.scales, &self.signs, &self.pairing_rhos)?;
        let worst = sweep.iter().map(|b| b.ratio).fold(0.0, f64::max);
        let claims = vec![
            Claim::fitted("exact_second_moment", moment.exact),
            Claim::at_most(
                "monte_carlo_z",
                (moment.monte_carlo - moment.exact).abs() / moment.standard_error,
                3.0,
            ),
            Claim::fitted("pairing_ratio", worst),
            Claim::at_most("pairing_ratio_bound", worst, self.pairing_limit),
        ];
        let mut counts = Table::new("pairing", &["rho", "index_set_size", "count", "ratio"]);
        for b in &sweep {
            counts.push([
                b.rho as f64,
                b.index_set_size as f64,
                b.count as f64,
                b.ratio,
            ]);
        }
        Ok(Outcome {
            claims,
            details: json!({ "moment": moment, "pairing": sweep }),
            tables: vec![counts],
        })
    }
}
