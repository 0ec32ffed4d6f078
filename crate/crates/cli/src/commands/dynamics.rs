use clap::Args;
use harmonic_gibbs::dynamics::{
    energy_monotonicity_check, gibbs_invariance_experiment, FlowConfig, Integrator, InvarianceSpec,
    MonotonicitySpec,
};
use harmonic_gibbs::gibbs::{
    build_ensemble, density_convergence_diagnostic, GibbsConfig, Sign, MIN_EFFECTIVE_SAMPLE_SIZE,
};
use harmonic_gibbs::random_field::RandomSeed;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::app::{Context, Experiment};
use crate::error::CliError;
use crate::report::{Claim, Outcome, Table};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GibbsBuild {
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    #[arg(long, default_value = "defocusing")]
    pub sign: Sign,
    #[arg(long = "K", visible_alias = "kmax", default_value_t = 16)]
    pub k_max: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Half-width of the focusing cutoff support.
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    /// Half-width of the region where the focusing cutoff is 1.
    #[arg(long, default_value_t = 1.0)]
    pub plateau: f64,
    /// Truncations of the density convergence diagnostic.
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 16, 32, 64])]
    pub truncations: Vec<usize>,
    /// Samples for the diagnostic; 0 skips it.
    #[arg(long, default_value_t = 2000)]
    pub convergence_n: usize,
}

impl GibbsBuild {
    fn gibbs(&self) -> GibbsConfig {
        GibbsConfig {
            p: self.p,
            sign: self.sign,
            k_max: self.k_max,
            beta: self.beta,
            plateau: self.plateau,
        }
    }
}

impl Experiment for GibbsBuild {
    fn run(&self, ctx: &Context) -> Result<Outcome, CliError> {
        let config = self.gibbs();
        let seed = RandomSeed::new(self.seed, 0);
        let ensemble = build_ensemble(self.n, config, seed)?;
        let summary = ensemble.summary();
        let file = format!("{}_ensemble.bin", ctx.name);
        std::fs::create_dir_all(ctx.out).map_err(|source| CliError::Write {
            path: ctx.out.to_path_buf(),
            source,
        })?;
        ensemble.save(ctx.out.join(&file))?;

        let mut claims = vec![
            Claim::fitted("normalization", summary.normalization),
            Claim::above(
                "effective_sample_size",
                summary.effective_sample_size,
                MIN_EFFECTIVE_SAMPLE_SIZE,
            ),
        ];
        let mut tables = Vec::new();
        let convergence = if self.convergence_n > 0 {
            let r = density_convergence_diagnostic(
                &self.truncations,
                config,
                self.convergence_n,
                RandomSeed::new(self.seed, 1),
            )?;
            claims.push(Claim::holds(
                "density_differences_settle",
                r.monotone_within_error,
            ));
            let mut t = Table::new(
                "convergence",
                &[
                    "k_low",
                    "k_high",
                    "mean_abs",
                    "mean_abs_se",
                    "mean_sq",
                    "mean_sq_se",
                ],
            );
            for d in &r.differences {
                t.push([
                    d.k_low as f64,
                    d.k_high as f64,
                    d.moments[0].0,
                    d.moments[0].1,
                    d.moments[1].0,
                    d.moments[1].1,
                ]);
            }
            tables.push(t);
            Some(r)
        } else {
            None
        };
        let mut weights = Table::new("weights", &["member", "weight"]);
        for (i, m) in ensemble.members.iter().enumerate() {
            weights.push([i as f64, m.weight]);
        }
        tables.push(weights);
        Ok(Outcome {
            claims,
            details: json!({ "summary": summary, "ensemble_file": file, "convergence": convergence }),
            tables,
        })
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Invariance {
    #[arg(long = "K", visible_alias = "kmax", default_value_t = 16)]
    pub k_max: usize,
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    #[arg(long, default_value = "defocusing")]
    pub sign: Sign,
    /// Evolution time.
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    #[arg(long, default_value_t = 200_000)]
    pub n: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value = "rk4_coeff")]
    pub integrator: Integrator,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub plateau: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub drift_tolerance: f64,
}

impl Experiment for Invariance {
    fn run(&self, _: &Context) -> Result<Outcome, CliError> {
        let flow = FlowConfig::new(self.p, self.sign, self.k_max)
            .with_dt(self.dt)
            .with_integrator(self.integrator);
        let mut spec = InvarianceSpec::new(flow, self.t, self.n, RandomSeed::new(self.seed, 0));
        spec.beta = self.beta;
        spec.plateau = self.plateau;
        spec.drift_tolerance = self.drift_tolerance;
        let r = gibbs_invariance_experiment(&spec)?;
        let mut claims = vec![
            Claim::above(
                "effective_sample_size",
                r.effective_sample_size,
                MIN_EFFECTIVE_SAMPLE_SIZE,
            ),
            Claim::at_most(
                "max_relative_energy_drift",
                r.max_relative_energy_drift,
                self.drift_tolerance,
            ),
        ];
        for o in &r.observables {
            claims.push(Claim::at_most(
                format!("{}_z", o.name),
                o.z_score.abs(),
                3.0,
            ));
        }
        for o in &r.negative_control {
            claims.push(Claim::fitted(format!("uniform_{}_z", o.name), o.z_score));
        }
        claims.push(Claim::holds("uniform_control_detected", r.control_detected));
        let mut table = Table::new(
            "observables",
            &[
                "weighting",
                "observable",
                "before",
                "before_se",
                "after",
                "after_se",
                "combined_se",
                "z_score",
            ],
        );
        for (weighting, list) in [("gibbs", &r.observables), ("uniform", &r.negative_control)] {
            for o in list {
                table.push([
                    weighting.to_string(),
                    o.name.clone(),
                    o.before.to_string(),
                    o.before_se.to_string(),
                    o.after.to_string(),
                    o.after_se.to_string(),
                    o.combined_se.to_string(),
                    o.z_score.to_string(),
                ]);
            }
        }
        Ok(Outcome {
            claims,
            details: serde_json::to_value(&r)?,
            tables: vec![table],
        })
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monotonicity {
    #[arg(long, default_value_t = 5.0)]
    pub p: f64,
    #[arg(long = "K", visible_alias = "kmax", default_value_t = 16)]
    pub k_max: usize,
    /// Number of random trajectories.
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 9)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// End of the time interval; at most π/4 - 0.1 by default.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4 - 0.1)]
    pub t_end: f64,
    /// Largest accepted energy increase per step.
    #[arg(long, default_value_t = 1e-7)]
    pub increase_tolerance: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub rate_tolerance: f64,
}

impl Experiment for Monotonicity {
    fn run(&self, _: &Context) -> Result<Outcome, CliError> {
        let mut spec =
            MonotonicitySpec::new(self.p, self.k_max, self.n, RandomSeed::new(self.seed, 0));
        spec.dt = self.dt;
        spec.t_end = self.t_end;
        let r = energy_monotonicity_check(&spec)?;
        let claims = vec![
            Claim::at_most(
                "max_energy_increase",
                r.max_increase,
                self.increase_tolerance,
            ),
            Claim::below("max_rate_error", r.max_rate_error, self.rate_tolerance),
        ];
        let mut table = Table::new(
            "trajectories",
            &[
                "index",
                "initial_energy",
                "final_energy",
                "max_increase",
                "max_rate_error",
            ],
        );
        for t in &r.trajectories {
            table.push([
                t.index as f64,
                t.initial_energy,
                t.final_energy,
                t.max_increase,
                t.max_rate_error,
            ]);
        }
        Ok(Outcome {
            claims,
            details: serde_json::to_value(&r)?,
            tables: vec![table],
        })
    }
}
