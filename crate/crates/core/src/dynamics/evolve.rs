//! Driving a [`Flow`] over an interval, with trajectories and conservation diagnostics.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::flow::{Flow, FlowConfig, FlowState, TimeFactor, Workspace, MAX_STEPS};
use crate::quadrature::SpectralCoefficients;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    /// `|c_k|²` for the recorded `modes`, one row per point.
    pub modes: Vec<usize>,
    pub mode_power: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["t".to_string(), "mass".into(), "energy".into()];
        header.extend(self.modes.iter().map(|k| format!("power_{k}")));
        w.write_record(&header)?;
        for (p, row) in self.points.iter().zip(&self.mode_power) {
            let mut r = vec![
                format!("{:e}", p.t),
                format!("{:e}", p.mass),
                format!("{:e}", p.energy),
            ];
            r.extend(row.iter().map(|v| format!("{v:e}")));
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Largest deviations of mass and energy from their initial values.
///
/// With [`TimeFactor::CosPower`] the energy is not conserved and its drift
/// only measures how far it moved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub steps: usize,
    pub initial_mass: f64,
    pub initial_energy: f64,
    pub mass_drift: f64,
    pub energy_drift: f64,
}

impl ConservationReport {
    pub fn relative_energy_drift(&self) -> f64 {
        self.energy_drift / self.initial_energy.abs().max(f64::MIN_POSITIVE)
    }

    pub fn relative_mass_drift(&self) -> f64 {
        self.mass_drift / self.initial_mass.max(f64::MIN_POSITIVE)
    }
}

/// Number of equal steps of size at most `dt` covering `[0, duration]`.
pub fn step_count(duration: f64, dt: f64) -> Result<usize> {
    let n = (duration.abs() / dt).ceil();
    if !n.is_finite() || n > MAX_STEPS {
        return Err(Error::InvalidParameter(format!(
            "{n} steps exceed the limit of {MAX_STEPS}"
        )));
    }
    Ok(n as usize)
}

impl Flow {
    /// Advance `state` by `duration` (negative runs backward) in equal steps of size
    /// at most `dt`, landing exactly on the end time.
    pub fn advance(&self, state: &mut FlowState, duration: f64, ws: &mut Workspace) -> Result<()> {
        let n = step_count(duration, self.config().dt)?;
        if n == 0 {
            return Ok(());
        }
        let t_end = state.t + duration;
        let h = duration / n as f64;
        for i in 0..n {
            self.step_by(state, h, ws)?;
            if !state.is_finite() {
                return Err(Error::NonFinite { step: i as u64 + 1 });
            }
        }
        state.t = t_end;
        Ok(())
    }

    /// [`Flow::advance`] while recording mass, energy, and `|c_k|²` of `modes`
    /// every `record_every` steps (and at both ends).
    pub fn evolve(
        &self,
        state: &mut FlowState,
        duration: f64,
        record_every: usize,
        modes: &[usize],
    ) -> Result<(Trajectory, ConservationReport)> {
        if let Some(&k) = modes.iter().find(|&&k| k > self.config().k_max) {
            return Err(Error::InvalidParameter(format!(
                "mode {k} exceeds K = {}",
                self.config().k_max
            )));
        }
        let every = record_every.max(1);
        let mut ws = self.workspace();
        let n = step_count(duration, self.config().dt)?;
        let h = if n == 0 { 0.0 } else { duration / n as f64 };
        let t_end = state.t + duration;
        let mut traj = Trajectory {
            points: Vec::new(),
            modes: modes.to_vec(),
            mode_power: Vec::new(),
        };
        let (m0, e0) = self.mass_and_energy(state.t, state.coeffs.as_slice(), &mut ws)?;
        let mut report = ConservationReport {
            steps: n,
            initial_mass: m0,
            initial_energy: e0,
            mass_drift: 0.0,
            energy_drift: 0.0,
        };
        let mut record = |s: &FlowState, ws: &mut Workspace, traj: &mut Trajectory| -> Result<()> {
            let (m, e) = self.mass_and_energy(s.t, s.coeffs.as_slice(), ws)?;
            report.mass_drift = report.mass_drift.max((m - m0).abs());
            report.energy_drift = report.energy_drift.max((e - e0).abs());
            traj.points.push(TrajectoryPoint {
                t: s.t,
                mass: m,
                energy: e,
            });
            traj.mode_power
                .push(modes.iter().map(|&k| s.coeffs[k].norm_sqr()).collect());
            Ok(())
        };
        record(state, &mut ws, &mut traj)?;
        for i in 0..n {
            self.step_by(state, h, &mut ws)?;
            if !state.is_finite() {
                return Err(Error::NonFinite { step: i as u64 + 1 });
            }
            if i + 1 == n {
                state.t = t_end;
            }
            if (i + 1) % every == 0 || i + 1 == n {
                record(state, &mut ws, &mut traj)?;
            }
        }
        Ok((traj, report))
    }
}

/// Evolve `coeffs` from `t0` by `duration` under `config`.
pub fn evolve(
    coeffs: &SpectralCoefficients,
    t0: f64,
    duration: f64,
    config: FlowConfig,
) -> Result<(FlowState, ConservationReport)> {
    let flow = Flow::new(config)?;
    let mut state = FlowState::new(t0, coeffs.clone());
    let (_, report) = flow.evolve(&mut state, duration, usize::MAX, &[])?;
    Ok((state, report))
}

/// Observed convergence order from step doubling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    pub dt: f64,
    /// `‖x_{dt} - x_{dt/2}‖`.
    pub coarse_gap: f64,
    /// `‖x_{dt/2} - x_{dt/4}‖`.
    pub fine_gap: f64,
    pub order: f64,
}

/// Run with `dt`, `dt/2`, `dt/4` and return `log2` of the ratio of successive gaps.
pub fn step_doubling_order(
    coeffs: &SpectralCoefficients,
    t0: f64,
    duration: f64,
    config: FlowConfig,
) -> Result<OrderEstimate> {
    let run = |dt: f64| evolve(coeffs, t0, duration, config.with_dt(dt)).map(|(s, _)| s.coeffs);
    let a = run(config.dt)?;
    let b = run(config.dt / 2.0)?;
    let c = run(config.dt / 4.0)?;
    let coarse_gap = a.distance(&b);
    let fine_gap = b.distance(&c);
    Ok(OrderEstimate {
        dt: config.dt,
        coarse_gap,
        fine_gap,
        order: (coarse_gap / fine_gap).log2(),
    })
}

/// Whether `config` conserves energy (autonomous time factor).
pub fn is_autonomous(config: &FlowConfig) -> bool {
    config.time_factor == TimeFactor::ConstantOne || config.p == 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::flow::Integrator;
    use crate::gibbs::Sign;
    use crate::random_field::{sample_free_field, RandomSeed};

    #[test]
    fn lands_on_end_time() {
        let flow = Flow::new(FlowConfig::new(3.0, Sign::Defocusing, 4).with_dt(0.03)).unwrap();
        let mut s = FlowState::new(0.1, sample_free_field(4, RandomSeed::new(1, 0)).coeffs);
        let (traj, rep) = flow.evolve(&mut s, 0.1, 1, &[0, 4]).unwrap();
        assert_eq!(rep.steps, 4);
        assert_eq!(s.t, 0.2);
        assert_eq!(traj.points.len(), 5);
        assert_eq!(traj.mode_power[0].len(), 2);
    }

    #[test]
    fn rk4_conserves_mass_and_energy() {
        let c = sample_free_field(8, RandomSeed::new(3, 0)).coeffs;
        let cfg = FlowConfig::new(3.0, Sign::Defocusing, 8).with_dt(1e-3);
        let (_, rep) = evolve(&c, 0.0, 0.5, cfg).unwrap();
        assert!(rep.relative_energy_drift() < 1e-8, "{rep:?}");
        assert!(rep.mass_drift < 1e-8, "{rep:?}");
    }

    #[test]
    fn integrators_agree() {
        let c = sample_free_field(8, RandomSeed::new(3, 0)).coeffs;
        let cfg = FlowConfig::new(3.0, Sign::Focusing, 8).with_dt(1e-3);
        let (a, _) = evolve(&c, 0.0, 0.3, cfg).unwrap();
        let (b, _) = evolve(&c, 0.0, 0.3, cfg.with_integrator(Integrator::StrangGrid)).unwrap();
        assert!(a.coeffs.distance(&b.coeffs) < 1e-4);
    }

    #[test]
    fn blowup_is_reported() {
        let mut c = SpectralCoefficients::zeros(2);
        c.as_mut_slice()[0] = num_complex::Complex64::new(1e100, 0.0);
        let cfg = FlowConfig::new(5.0, Sign::Focusing, 2).with_dt(1e-2);
        assert!(matches!(
            evolve(&c, 0.0, 1.0, cfg),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn too_many_steps_rejected() {
        let c = SpectralCoefficients::zeros(1);
        let cfg = FlowConfig::new(3.0, Sign::Defocusing, 1).with_dt(1e-9);
        assert!(evolve(&c, 0.0, 1.0, cfg).is_err());
    }
}
