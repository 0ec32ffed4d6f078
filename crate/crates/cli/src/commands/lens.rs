use clap::Args;
use harmonic_gibbs::gibbs::Sign;
use harmonic_gibbs::lens::{
    lens_flow_consistency_check, propagator_conjugation_check, scattering_cauchy_check,
    LensConsistencySpec, ScatteringSpec, DEFAULT_MARGIN,
};
use harmonic_gibbs::quadrature::SpectralCoefficients;
use harmonic_gibbs::random_field::{sample_free_field, RandomSeed};
use harmonic_gibbs::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::app::{Context, Experiment};
use crate::error::CliError;
use crate::report::{Claim, Outcome, Table};

fn initial_data(k_max: usize, seed: u64, amplitude: f64) -> SpectralCoefficients {
    sample_free_field(k_max, RandomSeed::new(seed, 0))
        .coeffs
        .scaled(Complex64::new(amplitude, 0.0))
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LensCheck {
    /// Conjugation is checked for every `e_k`, `k ≤ modes`.
    #[arg(long, default_value_t = 4)]
    pub modes: usize,
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        default_values_t = [-0.7, -0.3, -0.1, 0.1, 0.3, 0.7]
    )]
    pub t_values: Vec<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub conjugation_tolerance: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub round_trip_tolerance: f64,
    /// Odd power of the flow cross-check.
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    #[arg(long, default_value = "defocusing")]
    pub sign: Sign,
    #[arg(long = "K", visible_alias = "kmax", default_value_t = 8)]
    pub k_max: usize,
    #[arg(long, default_value_t = 0.5)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 5)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.3)]
    pub t_target: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub consistency_tolerance: f64,
}

impl Experiment for LensCheck {
    fn run(&self, _: &Context) -> Result<Outcome, CliError> {
        let mut table = Table::new(
            "conjugation",
            &["k", "t_compact", "discrepancy", "round_trip"],
        );
        let mut worst = 0.0f64;
        let mut worst_round_trip = 0.0f64;
        let mut reports = Vec::new();
        for k in 0..=self.modes {
            let r = propagator_conjugation_check(
                &SpectralCoefficients::unit(self.modes, k),
                &self.t_values,
            )?;
            for p in &r.points {
                table.push([k as f64, p.t_compact, p.discrepancy, p.round_trip]);
            }
            worst = worst.max(r.max_discrepancy);
            worst_round_trip = worst_round_trip.max(r.max_round_trip);
            reports.push(r);
        }
        let mut spec = LensConsistencySpec::new(
            self.p,
            self.sign,
            initial_data(self.k_max, self.seed, self.amplitude),
            self.t_target,
        );
        spec.dt = self.dt;
        let consistency = lens_flow_consistency_check(&spec)?;
        let claims = vec![
            Claim::below(
                "conjugation_max_discrepancy",
                worst,
                self.conjugation_tolerance,
            ),
            Claim::below(
                "lens_round_trip",
                worst_round_trip,
                self.round_trip_tolerance,
            ),
            Claim::below(
                "flow_cross_check_discrepancy",
                consistency.discrepancy,
                self.consistency_tolerance,
            ),
        ];
        Ok(Outcome {
            claims,
            details: json!({ "conjugation": reports, "consistency": consistency }),
            tables: vec![table],
        })
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scattering {
    #[arg(long = "K", visible_alias = "kmax", default_value_t = 8)]
    pub k_max: usize,
    #[arg(long, default_value_t = 0.5)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 5)]
    pub seed: u64,
    /// Weight `(4k+2)^σ` in the distances.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 8)]
    pub levels: usize,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    pub margin: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
}

impl Experiment for Scattering {
    fn run(&self, _: &Context) -> Result<Outcome, CliError> {
        let mut spec = ScatteringSpec::new(initial_data(self.k_max, self.seed, self.amplitude));
        spec.sigma = self.sigma;
        spec.levels = self.levels;
        spec.margin = self.margin;
        spec.dt = self.dt;
        let r = scattering_cauchy_check(&spec)?;
        // settling toward the endpoint, without asserting a rate or strict monotonicity
        let mut claims = Vec::new();
        for (name, diffs) in [
            ("difference", &r.differences),
            ("profile_difference", &r.profile_differences),
        ] {
            if let Some(&last) = diffs.last() {
                let largest = diffs.iter().cloned().fold(0.0, f64::max);
                claims.push(Claim::fitted(format!("last_{name}"), last));
                claims.push(Claim::below(
                    format!("last_to_largest_{name}"),
                    last / largest,
                    1.0,
                ));
            }
        }
        let mut table = Table::new(
            "cauchy",
            &["t_from", "t_to", "difference", "profile_difference"],
        );
        for (i, (d, p)) in r.differences.iter().zip(&r.profile_differences).enumerate() {
            table.push([r.times[i], r.times[i + 1], *d, *p]);
        }
        Ok(Outcome {
            claims,
            details: serde_json::to_value(&r)?,
            tables: vec![table],
        })
    }
}
