use std::f64::consts::PI;

use clap::Args;
use harmonic_gibbs::basis::norms::window_sup;
use harmonic_gibbs::basis::{
    divergence_report, eigenvalue, geometric_indices, l4_log_check, lq_scaling_fit,
    mehler_spectral_check, pointwise_envelope_check, sup_norm, AnnulusWindow,
};
use harmonic_gibbs::golden;
use harmonic_gibbs::quadrature::{kappa_decay_report, orthonormality_defect, KappaSampleSpec};
use harmonic_gibbs::stats::linear_fit;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::app::{Context, Experiment};
use crate::error::CliError;
use crate::report::{Claim, Outcome, Table};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisCheck {
    /// Largest index in the envelope sweep.
    #[arg(long = "kmax", visible_alias = "K", default_value_t = 1024)]
    pub k_max: usize,
    /// Sample points per envelope region.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Exterior decay rate of the envelope.
    #[arg(long, default_value_t = golden::ENVELOPE_DECAY_RATE)]
    pub decay_rate: f64,
    /// Recorded envelope constant to check against.
    #[arg(long, default_value_t = golden::ENVELOPE_CONSTANT)]
    pub envelope_constant: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [3.0, 6.0, 16.0])]
    pub q_values: Vec<f64>,
    /// Index range and point count of the L^q slope fits.
    #[arg(long, default_value_t = 64)]
    pub slope_lo: usize,
    #[arg(long, default_value_t = 1024)]
    pub slope_hi: usize,
    #[arg(long, default_value_t = 12)]
    pub slope_points: usize,
    #[arg(long, default_value_t = 0.05)]
    pub slope_tolerance: f64,
    #[arg(long, default_value_t = 8.0)]
    pub l4_ratio_limit: f64,
    /// Annulus `inner < |x| < outer` for the oscillatory-region maximum.
    #[arg(long, default_value_t = 1.0)]
    pub window_inner: f64,
    #[arg(long, default_value_t = 2.0)]
    pub window_outer: f64,
    #[arg(long, default_value_t = 256)]
    pub ortho_k: usize,
    #[arg(long, default_value_t = 300)]
    pub ortho_nodes: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub ortho_tolerance: f64,
    #[arg(long, default_value_t = 32)]
    pub mehler_k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub mehler_t: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub mehler_tolerance: f64,
}

impl Experiment for BasisCheck {
    fn run(&self, _: &Context) -> Result<Outcome, CliError> {
        let mut claims = Vec::new();

        let defect = orthonormality_defect(self.ortho_k, self.ortho_nodes)?;
        claims.push(Claim::below(
            "orthonormality_defect",
            defect,
            self.ortho_tolerance,
        ));

        let mehler = mehler_spectral_check(1.0, self.mehler_t, self.mehler_k)?;
        claims.push(Claim::below(
            "mehler_max_discrepancy",
            mehler.max_discrepancy,
            self.mehler_tolerance,
        ));

        let indices = geometric_indices(self.slope_lo, self.slope_hi, self.slope_points);
        let mut norms = Table::new("lq_norms", &["k", "nu", "q", "norm"]);
        let mut fits = Vec::new();
        for &q in &self.q_values {
            let fit = lq_scaling_fit(q, &indices)?;
            for (&k, &v) in fit.indices.iter().zip(&fit.norms) {
                norms.push([k as f64, eigenvalue(k), q, v]);
            }
            claims.push(Claim::within(
                format!("lq_slope_q{q}"),
                fit.fit.slope,
                fit.predicted_slope,
                self.slope_tolerance,
            ));
            fits.push(fit);
        }
        let l4 = l4_log_check(&indices)?;
        claims.push(Claim::at_most(
            "l4_log_ratio",
            l4.ratio,
            self.l4_ratio_limit,
        ));

        let sups = indices
            .iter()
            .map(|&k| sup_norm(k))
            .collect::<Result<Vec<_>, _>>()?;
        let sup_max = sups.iter().cloned().fold(0.0, f64::max);
        claims.push(Claim::at_most(
            "sup_norm_max",
            sup_max,
            PI.sqrt().recip() * (1.0 + 1e-12),
        ));

        let window = AnnulusWindow::new(self.window_inner, self.window_outer)?;
        let (z_lo, z_hi) = window.z_range();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for &k in &indices {
            x.push(eigenvalue(k).ln());
            y.push(window_sup(k, z_lo, z_hi, 4000)?.ln());
        }
        let window_fit = linear_fit(&x, &y);
        claims.push(Claim::within(
            "window_sup_slope",
            window_fit.slope,
            -0.25,
            self.slope_tolerance,
        ));

        let envelope = pointwise_envelope_check(
            self.k_max,
            self.samples,
            self.decay_rate,
            Some(self.envelope_constant),
        )?;
        claims.push(Claim::fitted("envelope_constant", envelope.fitted_constant));
        claims.push(Claim::at_most(
            "envelope_violations",
            envelope.violations as f64,
            0.0,
        ));
        let mut regions = Table::new("envelope", &["region", "max_ratio", "worst_k", "worst_z"]);
        for r in &envelope.regions {
            regions.push([
                format!("{:?}", r.region).to_lowercase(),
                r.max_ratio.to_string(),
                r.worst_index.to_string(),
                r.worst_point.to_string(),
            ]);
        }

        Ok(Outcome {
            claims,
            details: json!({
                "orthonormality_defect": defect,
                "mehler": mehler,
                "lq_fits": fits,
                "l4": l4,
                "sup_norms": sups,
                "window_fit": window_fit,
                "envelope": envelope,
            }),
            tables: vec![norms, regions],
        })
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaDecay {
    /// Number of factors besides `e_{n_0}`.
    #[arg(long, default_value_t = 4)]
    pub l: usize,
    #[arg(long, default_value_t = 200)]
    pub n_tuples: usize,
    #[arg(long, default_value_t = 256)]
    pub max_index: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = golden::KAPPA_LOG_CONSTANT)]
    pub log_constant: f64,
    #[arg(long, default_value_t = golden::KAPPA_SEPARATED_CONSTANT)]
    pub separated_constant: f64,
}

impl Experiment for KappaDecay {
    fn run(&self, _: &Context) -> Result<Outcome, CliError> {
        let spec = KappaSampleSpec {
            n_tuples: self.n_tuples,
            max_index: self.max_index,
            seed: self.seed,
            ..KappaSampleSpec::default()
        };
        let report = kappa_decay_report(self.l, &spec)?;
        let claims = vec![
            Claim::fitted("log_bound_constant", report.log_bound_constant),
            Claim::at_most(
                "log_bound_within_recorded",
                report.log_bound_constant,
                self.log_constant,
            ),
            Claim::fitted("separated_constant", report.separated_constant),
            Claim::at_most(
                "separated_within_recorded",
                report.separated_constant,
                self.separated_constant,
            ),
            Claim::holds(
                "separated_decay_confirmed",
                report.separated_decay_confirmed,
            ),
        ];
        let mut samples = Table::new("samples", &["indices", "kappa", "normalized"]);
        for s in &report.samples {
            samples.push([
                index_list(&s.indices),
                s.kappa.to_string(),
                s.normalized.to_string(),
            ]);
        }
        let mut separated = Table::new(
            "separated",
            &[
                "indices",
                "leading_eigenvalue",
                "ln_abs_kappa",
                "ln_normalized",
            ],
        );
        for s in &report.separated {
            separated.push([
                index_list(&s.indices),
                s.leading_eigenvalue.to_string(),
                s.ln_abs_kappa.to_string(),
                s.ln_normalized.to_string(),
            ]);
        }
        Ok(Outcome {
            claims,
            details: serde_json::to_value(&report)?,
            tables: vec![samples, separated],
        })
    }
}

fn index_list(indices: &[usize]) -> String {
    indices
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizedDivergence {
    /// Largest index; a power of two.
    #[arg(long = "kmax", visible_alias = "K", default_value_t = 8192)]
    pub k_max: usize,
    #[arg(long, default_value_t = 1.0)]
    pub window_inner: f64,
    #[arg(long, default_value_t = 2.0)]
    pub window_outer: f64,
    #[arg(long, default_value_t = 0.9)]
    pub r_squared_min: f64,
    /// Largest accepted relative tail of the σ = 1/4 sums.
    #[arg(long, default_value_t = 0.1)]
    pub tail_limit: f64,
    #[arg(long, default_value_t = -0.25, allow_negative_numbers = true)]
    pub l1_slope: f64,
    #[arg(long, default_value_t = 0.05)]
    pub l1_tolerance: f64,
}

impl Experiment for LocalizedDivergence {
    fn run(&self, _: &Context) -> Result<Outcome, CliError> {
        let window = AnnulusWindow::new(self.window_inner, self.window_outer)?;
        let r = divergence_report(self.k_max, &window)?;
        let min_increment = r
            .critical_increments
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let claims = vec![
            Claim::holds(
                "critical_strictly_increasing",
                r.critical_strictly_increasing,
            ),
            Claim::above("critical_min_dyadic_increment", min_increment, 0.0),
            Claim::above("critical_log_slope", r.critical_log_fit.slope, 0.0),
            Claim::above(
                "critical_log_r_squared",
                r.critical_log_fit.r_squared,
                self.r_squared_min,
            ),
            Claim::below(
                "subcritical_tail_ratio",
                r.subcritical_tail_ratio,
                self.tail_limit,
            ),
            Claim::within(
                "localized_l1_slope",
                r.l1_slope,
                self.l1_slope,
                self.l1_tolerance,
            ),
        ];
        let mut sums = Table::new("partial_sums", &["k", "critical_sum"]);
        for &(k, s) in &r.dyadic_sums {
            sums.push([k as f64, s]);
        }
        Ok(Outcome {
            claims,
            details: serde_json::to_value(&r)?,
            tables: vec![sums],
        })
    }
}
