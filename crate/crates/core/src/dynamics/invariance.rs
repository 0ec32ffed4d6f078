//! Monte Carlo test that the truncated flow preserves its weighted Gibbs measure.
//!
//! Each member is drawn from the free field, weighted by `ρ_K`, evolved to time
//! `t`, and the observables are recorded before and after. Expectations are
//! compared through per-member paired differences, which cancel most of the
//! sampling noise. The same run with uniform weights (the free-field measure,
//! which the nonlinear flow does not preserve) serves as a negative control.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flow::{Flow, FlowConfig, FlowState};
use crate::gibbs::{
    effective_sample_size, self_normalized, GibbsConfig, GibbsDensity, MIN_EFFECTIVE_SAMPLE_SIZE,
};
use crate::quadrature::PowerNorm;
use crate::random_field::{sample_free_field, RandomSeed};
use crate::{Error, Result};

/// Members re-run at `dt/2` to bound the discretization bias of each observable.
pub const PILOT_MEMBERS: usize = 64;

pub const OBSERVABLE_NAMES: [&str; 3] = ["mass", "l4_norm_pow4", "ground_mode_power"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceSpec {
    pub flow: FlowConfig,
    pub time: f64,
    pub n_samples: usize,
    pub seed: RandomSeed,
    /// Cutoff parameters for focusing densities.
    pub beta: f64,
    pub plateau: f64,
    /// Largest accepted relative energy drift of any member.
    pub drift_tolerance: f64,
}

impl InvarianceSpec {
    pub fn new(flow: FlowConfig, time: f64, n_samples: usize, seed: RandomSeed) -> Self {
        Self {
            flow,
            time,
            n_samples,
            seed,
            beta: 2.0,
            plateau: 1.0,
            drift_tolerance: 1e-6,
        }
    }

    pub fn gibbs(&self) -> GibbsConfig {
        GibbsConfig {
            p: self.flow.p,
            sign: self.flow.sign,
            k_max: self.flow.k_max,
            beta: self.beta,
            plateau: self.plateau,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableComparison {
    pub name: String,
    pub before: f64,
    pub before_se: f64,
    pub after: f64,
    pub after_se: f64,
    pub difference: f64,
    /// Standard error of the weighted mean of per-member differences.
    pub paired_se: f64,
    /// Bound on the discretization bias of the difference.
    pub bias_floor: f64,
    /// `√(paired_se² + bias_floor²)`.
    pub combined_se: f64,
    pub z_score: f64,
    pub within_three_se: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub spec: InvarianceSpec,
    pub effective_sample_size: f64,
    pub max_relative_energy_drift: f64,
    pub observables: Vec<ObservableComparison>,
    pub negative_control: Vec<ObservableComparison>,
    /// All weighted observables within three combined standard errors and the drift certified.
    pub passed: bool,
    /// Some uniform-weight observable moved by more than three combined standard errors.
    pub control_detected: bool,
}

struct MemberRecord {
    weight: f64,
    before: [f64; 3],
    after: [f64; 3],
    drift: f64,
}

struct Observer {
    l4: PowerNorm,
}

impl Observer {
    fn observe(&self, c: &[Complex64], scratch: &mut [Complex64]) -> [f64; 3] {
        [
            c.iter().map(|v| v.norm_sqr()).sum(),
            self.l4.powered_with(c, scratch),
            c[0].norm_sqr(),
        ]
    }
}

fn compare(
    name: &str,
    weights: &[f64],
    before: &[f64],
    after: &[f64],
    bias_floor: f64,
) -> Result<ObservableComparison> {
    let (b, bse) = self_normalized(weights, before)?;
    let (a, ase) = self_normalized(weights, after)?;
    let diffs: Vec<f64> = after.iter().zip(before).map(|(x, y)| x - y).collect();
    let (d, dse) = self_normalized(weights, &diffs)?;
    let combined_se = dse.hypot(bias_floor);
    let z_score = if combined_se > 0.0 {
        d / combined_se
    } else {
        0.0
    };
    Ok(ObservableComparison {
        name: name.to_string(),
        before: b,
        before_se: bse,
        after: a,
        after_se: ase,
        difference: d,
        paired_se: dse,
        bias_floor,
        combined_se,
        z_score,
        within_three_se: d.abs() <= 3.0 * combined_se,
    })
}

/// Run the experiment in parallel; results depend only on the spec, not on thread count.
pub fn gibbs_invariance_experiment(spec: &InvarianceSpec) -> Result<InvarianceReport> {
    if spec.n_samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let gibbs = spec.gibbs();
    let density = GibbsDensity::new(gibbs)?;
    let flow = Flow::new(spec.flow)?;
    let k_max = spec.flow.k_max;
    let observer = Observer {
        l4: PowerNorm::new(k_max, 4.0)?,
    };

    let run_member = |i: u64, flow: &Flow| -> Result<MemberRecord> {
        let sample = sample_free_field(k_max, spec.seed.member(i));
        let mut scratch = vec![Complex64::new(0.0, 0.0); observer.l4.grid().len()];
        let weight = density.weight(sample.coeffs.as_slice());
        let before = observer.observe(sample.coeffs.as_slice(), &mut scratch);
        let mut ws = flow.workspace();
        let mut state = FlowState::new(0.0, sample.coeffs);
        let (_, e0) = flow.mass_and_energy(0.0, state.coeffs.as_slice(), &mut ws)?;
        flow.advance(&mut state, spec.time, &mut ws)?;
        let (_, e1) = flow.mass_and_energy(state.t, state.coeffs.as_slice(), &mut ws)?;
        let after = observer.observe(state.coeffs.as_slice(), &mut scratch);
        Ok(MemberRecord {
            weight,
            before,
            after,
            drift: (e1 - e0).abs() / e0.abs().max(f64::MIN_POSITIVE),
        })
    };

    let records = (0..spec.n_samples as u64)
        .into_par_iter()
        .map(|i| run_member(i, &flow))
        .collect::<Result<Vec<_>>>()?;

    let fine = Flow::new(spec.flow.with_dt(spec.flow.dt / 2.0))?;
    let pilot = PILOT_MEMBERS.min(spec.n_samples);
    let fine_records = (0..pilot as u64)
        .into_par_iter()
        .map(|i| run_member(i, &fine))
        .collect::<Result<Vec<_>>>()?;
    // Richardson: the dt-run error is about `(2^q/(2^q - 1))·|x_dt - x_{dt/2}|`;
    // a factor 2 covers every order q ≥ 1.
    let mut floors = [0.0f64; 3];
    for (coarse, fine) in records.iter().zip(&fine_records) {
        for ((floor, a), b) in floors.iter_mut().zip(coarse.after).zip(fine.after) {
            *floor = floor.max(2.0 * (a - b).abs());
        }
    }

    let weights: Vec<f64> = records.iter().map(|r| r.weight).collect();
    let ess = effective_sample_size(&weights);
    if ess < MIN_EFFECTIVE_SAMPLE_SIZE {
        return Err(Error::InsufficientSampleSize {
            ess,
            required: MIN_EFFECTIVE_SAMPLE_SIZE,
        });
    }
    let uniform = vec![1.0; records.len()];
    let mut observables = Vec::new();
    let mut negative_control = Vec::new();
    for (j, name) in OBSERVABLE_NAMES.iter().enumerate() {
        let before: Vec<f64> = records.iter().map(|r| r.before[j]).collect();
        let after: Vec<f64> = records.iter().map(|r| r.after[j]).collect();
        observables.push(compare(name, &weights, &before, &after, floors[j])?);
        negative_control.push(compare(name, &uniform, &before, &after, floors[j])?);
    }
    let max_relative_energy_drift = records.iter().map(|r| r.drift).fold(0.0, f64::max);
    let passed = max_relative_energy_drift <= spec.drift_tolerance
        && observables.iter().all(|o| o.within_three_se);
    let control_detected = negative_control.iter().any(|o| !o.within_three_se);
    Ok(InvarianceReport {
        spec: *spec,
        effective_sample_size: ess,
        max_relative_energy_drift,
        observables,
        negative_control,
        passed,
        control_detected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::Sign;

    #[test]
    fn small_run_is_consistent() {
        let flow = FlowConfig::new(3.0, Sign::Defocusing, 4).with_dt(5e-3);
        let spec = InvarianceSpec::new(flow, 0.2, 400, RandomSeed::new(5, 0));
        let r = gibbs_invariance_experiment(&spec).unwrap();
        assert_eq!(r.observables.len(), 3);
        // mass is conserved member by member
        assert!(r.observables[0].difference.abs() < 1e-5);
        assert!(r.max_relative_energy_drift < 1e-6);
        assert!(r.passed, "{:?}", r.observables);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let flow = FlowConfig::new(3.0, Sign::Defocusing, 3).with_dt(1e-2);
        let spec = InvarianceSpec::new(flow, 0.1, 150, RandomSeed::new(9, 1));
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let two = rayon::ThreadPoolBuilder::new()
            .num_threads(2)
            .build()
            .unwrap();
        let a = one.install(|| gibbs_invariance_experiment(&spec)).unwrap();
        let b = two.install(|| gibbs_invariance_experiment(&spec)).unwrap();
        assert_eq!(a.observables[1].difference, b.observables[1].difference);
    }
}
