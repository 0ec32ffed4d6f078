//! Structural checks on the truncated flow: energy monotonicity of the
//! lens-transformed equation, volume preservation, gauge symmetry, reversibility.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flow::{Flow, FlowConfig, FlowState, Integrator, TimeFactor};
use crate::gibbs::Sign;
use crate::quadrature::SpectralCoefficients;
use crate::random_field::{sample_free_field, RandomSeed};
use crate::{Error, Result};

/// Closed-form `d𝓔/dt` for `m(t) = (cos 2t)^{p-3}`:
/// `-4(p-3)(cos 2t)^{p-4} sin 2t/(p+1) · ‖v‖^{p+1}_{L^{p+1}}` (defocusing sign).
pub fn energy_rate(p: f64, t: f64, lp1_powered: f64) -> f64 {
    let c = (2.0 * t).cos();
    -4.0 * (p - 3.0) * c.powf(p - 4.0) * (2.0 * t).sin() / (p + 1.0) * lp1_powered
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicitySpec {
    pub p: f64,
    pub k_max: usize,
    pub n_trajectories: usize,
    /// Trajectories run over `[-t_end, t_end]`, `t_end < π/4`.
    pub t_end: f64,
    pub dt: f64,
    pub seed: RandomSeed,
}

impl MonotonicitySpec {
    pub fn new(p: f64, k_max: usize, n_trajectories: usize, seed: RandomSeed) -> Self {
        Self {
            p,
            k_max,
            n_trajectories,
            t_end: std::f64::consts::FRAC_PI_4 - 0.1,
            dt: 1e-3,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityTrajectory {
    pub index: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// Largest increase of `𝓔` between consecutive steps moving away from `t = 0`.
    pub max_increase: f64,
    /// Largest relative gap between the finite-difference and closed-form rates,
    /// over points where the closed form is at least a tenth of its maximum.
    pub max_rate_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub spec: MonotonicitySpec,
    pub trajectories: Vec<MonotonicityTrajectory>,
    pub max_increase: f64,
    pub max_rate_error: f64,
}

/// Evolve free-field data under the defocusing lens-transformed flow in both
/// directions from `t = 0`, checking that `𝓔(t)` decreases in `|t|` at the
/// predicted rate.
pub fn energy_monotonicity_check(spec: &MonotonicitySpec) -> Result<MonotonicityReport> {
    if !(spec.p > 3.0) {
        return Err(Error::InvalidParameter(format!(
            "monotonicity holds for p > 3, got {}",
            spec.p
        )));
    }
    if !(spec.t_end > 0.0 && spec.t_end < std::f64::consts::FRAC_PI_4) {
        return Err(Error::LensDomain(spec.t_end));
    }
    let config = FlowConfig::new(spec.p, Sign::Defocusing, spec.k_max)
        .with_time_factor(TimeFactor::CosPower)
        .with_dt(spec.dt);
    let flow = Flow::new(config)?;
    let n_steps = super::evolve::step_count(spec.t_end, spec.dt)?;
    let h = spec.t_end / n_steps as f64;
    let trajectories = (0..spec.n_trajectories)
        .into_par_iter()
        .map(|i| -> Result<MonotonicityTrajectory> {
            let c0 = sample_free_field(spec.k_max, spec.seed.member(i as u64)).coeffs;
            let mut ws = flow.workspace();
            let (_, e0) = flow.mass_and_energy(0.0, c0.as_slice(), &mut ws)?;
            let mut out = MonotonicityTrajectory {
                index: i,
                initial_energy: e0,
                final_energy: e0,
                max_increase: f64::NEG_INFINITY,
                max_rate_error: 0.0,
            };
            for dir in [1.0, -1.0] {
                let mut state = FlowState::new(0.0, c0.clone());
                let mut energies = Vec::with_capacity(n_steps + 1);
                let mut rates = Vec::with_capacity(n_steps + 1);
                for j in 0..=n_steps {
                    if j > 0 {
                        flow.step_by(&mut state, dir * h, &mut ws)?;
                        state.t = dir * h * j as f64;
                        if !state.is_finite() {
                            return Err(Error::NonFinite { step: j as u64 });
                        }
                    }
                    let (_, e) = flow.mass_and_energy(state.t, state.coeffs.as_slice(), &mut ws)?;
                    let pot = flow.power_integral(state.coeffs.as_slice(), &mut ws);
                    energies.push(e);
                    rates.push(energy_rate(spec.p, state.t, pot));
                }
                for w in energies.windows(2) {
                    out.max_increase = out.max_increase.max(w[1] - w[0]);
                }
                let peak = rates.iter().fold(0.0f64, |a, r| a.max(r.abs()));
                for j in 2..n_steps.saturating_sub(1) {
                    if rates[j].abs() < 0.1 * peak {
                        continue;
                    }
                    // five-point stencil; energies are indexed by |t|, so the
                    // t-derivative carries `dir`
                    let e = &energies;
                    let fd =
                        dir * (8.0 * (e[j + 1] - e[j - 1]) - (e[j + 2] - e[j - 2])) / (12.0 * h);
                    out.max_rate_error = out
                        .max_rate_error
                        .max((fd - rates[j]).abs() / rates[j].abs());
                }
                if dir > 0.0 {
                    out.final_energy = *energies.last().expect("nonempty");
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let max_increase = trajectories
        .iter()
        .map(|t| t.max_increase)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_rate_error = trajectories
        .iter()
        .map(|t| t.max_rate_error)
        .fold(0.0, f64::max);
    Ok(MonotonicityReport {
        spec: *spec,
        trajectories,
        max_increase,
        max_rate_error,
    })
}

fn to_real(c: &[Complex64]) -> Vec<f64> {
    c.iter().flat_map(|v| [v.re, v.im]).collect()
}

fn from_real(x: &[f64]) -> SpectralCoefficients {
    SpectralCoefficients::new(
        x.chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect(),
    )
    .expect("nonempty")
}

/// Determinant by partial-pivot elimination.
pub fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty range");
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut() {
            let f = row[col] / pivot_row[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
        }
    }
    det
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleReport {
    pub k_max: usize,
    pub time: f64,
    pub determinant: f64,
    pub deviation: f64,
}

/// Jacobian determinant of the time-`time` map at `coeffs`, by central differences
/// with step `eps` in each real coordinate.
pub fn liouville_check(
    coeffs: &SpectralCoefficients,
    time: f64,
    config: FlowConfig,
    eps: f64,
) -> Result<LiouvilleReport> {
    let flow = Flow::new(config)?;
    let x0 = to_real(coeffs.as_slice());
    let dim = x0.len();
    let map = |x: &[f64]| -> Result<Vec<f64>> {
        let mut ws = flow.workspace();
        let mut s = FlowState::new(0.0, from_real(x));
        flow.advance(&mut s, time, &mut ws)?;
        Ok(to_real(s.coeffs.as_slice()))
    };
    let mut jac = vec![vec![0.0; dim]; dim];
    for j in 0..dim {
        let mut xp = x0.clone();
        let mut xm = x0.clone();
        xp[j] += eps;
        xm[j] -= eps;
        let (fp, fm) = (map(&xp)?, map(&xm)?);
        for i in 0..dim {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * eps);
        }
    }
    let d = determinant(jac);
    Ok(LiouvilleReport {
        k_max: config.k_max,
        time,
        determinant: d,
        deviation: (d - 1.0).abs(),
    })
}

/// `max_k |Φ_t(e^{iθ}c)_k - e^{iθ}Φ_t(c)_k|`.
pub fn gauge_deviation(
    coeffs: &SpectralCoefficients,
    theta: f64,
    time: f64,
    config: FlowConfig,
) -> Result<f64> {
    let flow = Flow::new(config)?;
    let mut ws = flow.workspace();
    let rot = Complex64::from_polar(1.0, theta);
    let mut a = FlowState::new(0.0, coeffs.scaled(rot));
    let mut b = FlowState::new(0.0, coeffs.clone());
    flow.advance(&mut a, time, &mut ws)?;
    flow.advance(&mut b, time, &mut ws)?;
    Ok(a.coeffs
        .as_slice()
        .iter()
        .zip(b.coeffs.as_slice())
        .map(|(x, y)| (x - y * rot).norm())
        .fold(0.0, f64::max))
}

/// `‖Φ_{-t}Φ_t c - c‖`.
pub fn reversal_deviation(
    coeffs: &SpectralCoefficients,
    time: f64,
    config: FlowConfig,
) -> Result<f64> {
    let flow = Flow::new(config)?;
    let mut ws = flow.workspace();
    let mut s = FlowState::new(0.0, coeffs.clone());
    flow.advance(&mut s, time, &mut ws)?;
    flow.advance(&mut s, -time, &mut ws)?;
    Ok(s.coeffs.distance(coeffs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorAgreement {
    pub dt: f64,
    pub distance: f64,
}

/// Distance between the Strang and RK4 endpoints at each `dt`.
pub fn integrator_agreement(
    coeffs: &SpectralCoefficients,
    time: f64,
    config: FlowConfig,
    dts: &[f64],
) -> Result<Vec<IntegratorAgreement>> {
    dts.iter()
        .map(|&dt| {
            let run = |i: Integrator| {
                super::evolve::evolve(coeffs, 0.0, time, config.with_integrator(i).with_dt(dt))
                    .map(|(s, _)| s.coeffs)
            };
            let a = run(Integrator::StrangGrid)?;
            let b = run(Integrator::Rk4Coeff)?;
            Ok(IntegratorAgreement {
                dt,
                distance: a.distance(&b),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_of_known_matrix() {
        let a = vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 4.0],
        ];
        assert!((determinant(a) - 18.0).abs() < 1e-12);
        assert_eq!(determinant(vec![vec![0.0, 1.0], vec![0.0, 2.0]]), 0.0);
        assert_eq!(determinant(vec![vec![0.0, 1.0], vec![1.0, 0.0]]), -1.0);
    }

    #[test]
    fn gauge_and_reversal() {
        let c = sample_free_field(6, RandomSeed::new(2, 0)).coeffs;
        let cfg = FlowConfig::new(3.0, Sign::Defocusing, 6).with_dt(1e-3);
        assert!(gauge_deviation(&c, 0.7, 0.3, cfg).unwrap() < 1e-13);
        assert!(reversal_deviation(&c, 0.3, cfg).unwrap() < 1e-9);
        let s = cfg.with_integrator(Integrator::StrangGrid);
        assert!(reversal_deviation(&c, 0.3, s).unwrap() < 1e-9);
    }

    #[test]
    fn energy_rate_sign() {
        assert!(energy_rate(5.0, 0.3, 1.0) < 0.0);
        assert!(energy_rate(5.0, -0.3, 1.0) > 0.0);
        assert_eq!(energy_rate(5.0, 0.0, 1.0), 0.0);
    }
}
