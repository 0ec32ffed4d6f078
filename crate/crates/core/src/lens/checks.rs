//! Numerical cross-checks of the lens transform against exact and truncated dynamics.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::free::free_evolved;
use super::transform::{
    lens_forward_eval, lens_inverse_eval, LensTime, RadialProfile, DEFAULT_MARGIN,
};
use crate::basis::laguerre::eigenvalue;
use crate::dynamics::{step_count, Flow, FlowConfig, FlowState, Integrator, TimeFactor};
use crate::gibbs::Sign;
use crate::quadrature::{size_for_degree, RadialGrid, SpectralCoefficients, SpectralTransform};
use crate::{Error, Result};

/// `‖f‖_{L²(ℝ²)}` of a radial function on a decay-1 grid in `z = r²`, with the
/// variable rescaled by `dilation` so the grid follows the function.
fn grid_l2(grid: &RadialGrid, dilation: f64, f: impl Fn(f64) -> Result<Complex64>) -> Result<f64> {
    let mut acc = 0.0;
    for (z, w) in grid.nodes().iter().zip(grid.weights()) {
        acc += w * f(dilation * z.sqrt())?.norm_sqr();
    }
    Ok((PI * dilation * dilation * acc).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugationPoint {
    pub t_compact: f64,
    /// `‖𝓛(e^{isΔ}g) - e^{-itH}g‖_{L²}` at `s = tan(2t)/2`.
    pub discrepancy: f64,
    /// Pointwise maximum over the grid of `|𝓛^{-1}(𝓛u) - u|` for `u = e^{isΔ}g`.
    pub round_trip: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConjugationReport {
    pub k_max: usize,
    pub points: Vec<ConjugationPoint>,
    pub max_discrepancy: f64,
    pub max_round_trip: f64,
}

/// Compare the lens image of the exact free evolution of `g` with the
/// eigenphase evolution `Σ e^{-i(4k+2)t} g_k e_k`.
pub fn propagator_conjugation_check(
    g: &SpectralCoefficients,
    t_grid: &[f64],
) -> Result<ConjugationReport> {
    let k_max = g.k_max();
    if k_max > 32 {
        return Err(Error::InvalidParameter(format!(
            "conjugation check supports K ≤ 32, got {k_max}"
        )));
    }
    let grid = RadialGrid::with_size(2 * (k_max + 1) + 32, 1.0)?;
    let points = t_grid
        .par_iter()
        .map(|&t| -> Result<ConjugationPoint> {
            let lt = LensTime::from_compact(t)?;
            let c = lt.contraction();
            let phased = SpectralCoefficients::new(
                g.as_slice()
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * Complex64::from_polar(1.0, -eigenvalue(k) * t))
                    .collect(),
            )?;
            let discrepancy = grid_l2(&grid, 1.0, |r| {
                let lhs = free_evolved(g, lt.t_free, r / c) / c
                    * Complex64::from_polar(1.0, -r * r * lt.t_free);
                Ok(lhs - phased.eval_at_z(r * r)?)
            })?;
            let u = |s: f64, r: f64| free_evolved(g, s, r);
            let v = |t: f64, r: f64| {
                lens_forward_eval(u, t, r).unwrap_or(Complex64::new(f64::NAN, 0.0))
            };
            let mut round_trip = 0.0f64;
            for z in grid.nodes() {
                let r = z.sqrt();
                let back = lens_inverse_eval(v, lt.t_free, r)?;
                round_trip = round_trip.max((back - u(lt.t_free, r)).norm());
            }
            Ok(ConjugationPoint {
                t_compact: t,
                discrepancy,
                round_trip,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConjugationReport {
        k_max,
        max_discrepancy: points.iter().map(|p| p.discrepancy).fold(0.0, f64::max),
        max_round_trip: points.iter().map(|p| p.round_trip).fold(0.0, f64::max),
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LensConsistencySpec {
    pub p: f64,
    pub sign: Sign,
    pub initial: SpectralCoefficients,
    pub t_target: f64,
    pub dt: f64,
    pub margin: f64,
}

impl LensConsistencySpec {
    pub fn new(p: f64, sign: Sign, initial: SpectralCoefficients, t_target: f64) -> Self {
        Self {
            p,
            sign,
            initial,
            t_target,
            dt: 1e-4,
            margin: DEFAULT_MARGIN,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LensConsistencyReport {
    pub t_target: f64,
    pub s_target: f64,
    pub harmonic_steps: usize,
    pub free_steps: usize,
    /// `L²` distance at `s_target` between the lens image of the harmonic-side
    /// solution and the directly evolved free-side solution.
    pub discrepancy: f64,
    pub harmonic_side: RadialProfile,
    pub free_side: RadialProfile,
}

/// Free-side Galerkin system on the moving frame `φ_k(s) = 𝓛^{-1}(e_k)` at time `s`:
/// with `q = 1 + 4s²`, `φ_k(s, r) = q^{-1/2} e_k(r/√q) e^{i s r²/q}`. The frame solves
/// `i∂_sφ_k + Δφ_k = -(4k+2)/q · φ_k`, so `u = Σ b_k φ_k` satisfies
/// `i b_k' = (4k+2)/q · b_k ± ⟨|u|^{p-1}u, φ_k⟩`. The inner product is formed from
/// physical values of `u` at the dilated radii, chirp included.
struct MovingFrameSystem {
    p: f64,
    sign: f64,
    transform: SpectralTransform,
    eigenvalues: Vec<f64>,
}

impl MovingFrameSystem {
    fn new(p: f64, sign: Sign, k_max: usize) -> Result<Self> {
        let q = p + 1.0;
        let grid =
            RadialGrid::with_size(size_for_degree((q * k_max as f64).ceil() as usize), q / 2.0)?;
        Ok(Self {
            p,
            sign: sign.factor(),
            transform: SpectralTransform::new(Arc::new(grid), k_max)?,
            eigenvalues: (0..=k_max).map(eigenvalue).collect(),
        })
    }

    fn rhs(&self, s: f64, b: &[Complex64]) -> Vec<Complex64> {
        let q = 1.0 + 4.0 * s * s;
        let (amp, dil, chirp) = (q.powf(-0.5), q.sqrt(), s / q);
        let grid = self.transform.grid();
        let half = (self.p - 1.0) / 2.0;
        let mut out = vec![Complex64::new(0.0, 0.0); b.len()];
        for (i, (z, w)) in grid.nodes().iter().zip(grid.weights()).enumerate() {
            let r = dil * z.sqrt();
            let phase = Complex64::from_polar(1.0, chirp * r * r);
            let mut u = Complex64::new(0.0, 0.0);
            for (k, c) in b.iter().enumerate() {
                u += c * self.transform.basis_value(i, k);
            }
            let u = u * amp * phase;
            let nonlinear = u * u.norm_sqr().powf(half) * self.sign;
            // ∫ N conj(φ_k) dx, with dx = π dil² dz
            let common = nonlinear * phase.conj() * (amp * PI * w * dil * dil);
            for (k, o) in out.iter_mut().enumerate() {
                *o += common * self.transform.basis_value(i, k);
            }
        }
        for ((o, c), nu) in out.iter_mut().zip(b).zip(&self.eigenvalues) {
            let f = *o + c * (nu / q);
            *o = Complex64::new(f.im, -f.re);
        }
        out
    }

    fn rk4(&self, s: f64, b: &mut [Complex64], h: f64) {
        let axpy = |x: &[Complex64], k: &[Complex64], a: f64| -> Vec<Complex64> {
            x.iter().zip(k).map(|(x, k)| x + k * a).collect()
        };
        let k1 = self.rhs(s, b);
        let k2 = self.rhs(s + 0.5 * h, &axpy(b, &k1, 0.5 * h));
        let k3 = self.rhs(s + 0.5 * h, &axpy(b, &k2, 0.5 * h));
        let k4 = self.rhs(s + h, &axpy(b, &k3, h));
        for i in 0..b.len() {
            b[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
}

/// Evolve `initial` on the harmonic side to `t_target` and on the free side to
/// `s_target = tan(2 t_target)/2`, then compare the lens image of the former with the latter.
pub fn lens_flow_consistency_check(spec: &LensConsistencySpec) -> Result<LensConsistencyReport> {
    if !(spec.p.fract() == 0.0 && (spec.p as i64) % 2 == 1) {
        return Err(Error::UnsupportedExponent(spec.p));
    }
    if !(spec.t_target.abs() < FRAC_PI_4 - spec.margin) {
        return Err(Error::LensDomain(spec.t_target));
    }
    let k_max = spec.initial.k_max();
    let lt = LensTime::from_compact(spec.t_target)?;

    let config = FlowConfig::new(spec.p, spec.sign, k_max)
        .with_time_factor(TimeFactor::CosPower)
        .with_integrator(Integrator::Rk4Coeff)
        .with_dt(spec.dt);
    let flow = Flow::new(config)?;
    let mut state = FlowState::new(0.0, spec.initial.clone());
    let harmonic_steps = step_count(spec.t_target, spec.dt)?;
    flow.advance(&mut state, spec.t_target, &mut flow.workspace())?;
    let harmonic_side = RadialProfile::new(state.coeffs).lens_inverse(lt.t_free)?;

    let system = MovingFrameSystem::new(spec.p, spec.sign, k_max)?;
    let free_steps = step_count(lt.t_free, spec.dt)?;
    let mut b = spec.initial.as_slice().to_vec();
    if free_steps > 0 {
        let h = lt.t_free / free_steps as f64;
        for j in 0..free_steps {
            system.rk4(h * j as f64, &mut b, h);
        }
    }
    if b.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite {
            step: free_steps as u64,
        });
    }
    let free_side = RadialProfile::new(SpectralCoefficients::new(b)?).lens_inverse(lt.t_free)?;

    let grid = RadialGrid::with_size(2 * (k_max + 1) + 32, 1.0)?;
    let discrepancy = grid_l2(&grid, free_side.dilation, |r| {
        Ok(harmonic_side.eval(r)? - free_side.eval(r)?)
    })?;
    Ok(LensConsistencyReport {
        t_target: spec.t_target,
        s_target: lt.t_free,
        harmonic_steps,
        free_steps,
        discrepancy,
        harmonic_side,
        free_side,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSpec {
    pub initial: SpectralCoefficients,
    /// Weight `(4k+2)^σ` in the coefficient distance.
    pub sigma: f64,
    pub levels: usize,
    pub margin: f64,
    pub dt: f64,
}

impl ScatteringSpec {
    pub fn new(initial: SpectralCoefficients) -> Self {
        Self {
            initial,
            sigma: 0.0,
            levels: 8,
            margin: DEFAULT_MARGIN,
            dt: 1e-3,
        }
    }

    /// `t_i = (π/4 - margin)(1 - 2^{-i})`, `i = 1..=levels`.
    pub fn times(&self) -> Vec<f64> {
        (1..=self.levels)
            .map(|i| (FRAC_PI_4 - self.margin) * (1.0 - 0.5f64.powi(i as i32)))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatteringReport {
    pub spec: ScatteringSpec,
    pub times: Vec<f64>,
    /// `‖w(t_{i+1}) - w(t_i)‖_σ` with `w(t) = v(t) - e^{-itH} f_0`.
    pub differences: Vec<f64>,
    /// The same distances for the interaction-picture profile `e^{itH}v(t)`.
    pub profile_differences: Vec<f64>,
    pub decreasing: bool,
}

/// Follow the defocusing cubic harmonic-side flow toward `π/4` and measure how the
/// distance from linear evolution settles.
pub fn scattering_cauchy_check(spec: &ScatteringSpec) -> Result<ScatteringReport> {
    if spec.levels < 2 {
        return Err(Error::InvalidParameter(
            "need at least two grid times".into(),
        ));
    }
    if !(spec.margin > 0.0 && spec.margin < FRAC_PI_4) {
        return Err(Error::InvalidParameter(format!(
            "margin must lie in (0, π/4), got {}",
            spec.margin
        )));
    }
    let k_max = spec.initial.k_max();
    let config = FlowConfig::new(3.0, Sign::Defocusing, k_max)
        .with_time_factor(TimeFactor::CosPower)
        .with_dt(spec.dt);
    let flow = Flow::new(config)?;
    let mut ws = flow.workspace();
    let mut state = FlowState::new(0.0, spec.initial.clone());
    let nu: Vec<f64> = (0..=k_max).map(eigenvalue).collect();
    let times = spec.times();
    let mut gaps = Vec::with_capacity(times.len());
    let mut profiles = Vec::with_capacity(times.len());
    for &t in &times {
        let step = t - state.t;
        flow.advance(&mut state, step, &mut ws)?;
        let v = state.coeffs.as_slice();
        let f0 = spec.initial.as_slice();
        gaps.push(
            (0..=k_max)
                .map(|k| v[k] - f0[k] * Complex64::from_polar(1.0, -nu[k] * t))
                .collect::<Vec<_>>(),
        );
        profiles.push(
            (0..=k_max)
                .map(|k| v[k] * Complex64::from_polar(1.0, nu[k] * t))
                .collect::<Vec<_>>(),
        );
    }
    let distance = |a: &[Complex64], b: &[Complex64]| -> f64 {
        a.iter()
            .zip(b)
            .zip(&nu)
            .map(|((x, y), n)| n.powf(spec.sigma) * (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let differences: Vec<f64> = gaps.windows(2).map(|w| distance(&w[0], &w[1])).collect();
    let profile_differences: Vec<f64> = profiles
        .windows(2)
        .map(|w| distance(&w[0], &w[1]))
        .collect();
    let tol = 1e-12;
    let decreasing = differences.windows(2).all(|w| w[1] <= w[0] + tol);
    Ok(ScatteringReport {
        spec: spec.clone(),
        times,
        differences,
        profile_differences,
        decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugation_for_low_modes() {
        for k in 0..=2 {
            let g = SpectralCoefficients::unit(k, k);
            let r = propagator_conjugation_check(&g, &[0.0, 0.3, -0.7]).unwrap();
            assert!(r.max_discrepancy < 1e-10, "k={k}: {r:?}");
            assert!(r.max_round_trip < 1e-12);
            assert!(r.points[0].discrepancy < 1e-14);
        }
    }

    #[test]
    fn zero_data_consistency() {
        let spec =
            LensConsistencySpec::new(3.0, Sign::Defocusing, SpectralCoefficients::zeros(3), 0.2);
        let r = lens_flow_consistency_check(&spec).unwrap();
        assert_eq!(r.discrepancy, 0.0);
        let sc =
            scattering_cauchy_check(&ScatteringSpec::new(SpectralCoefficients::zeros(3))).unwrap();
        assert!(sc.differences.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn rejects_even_power_and_boundary() {
        let spec =
            LensConsistencySpec::new(2.0, Sign::Defocusing, SpectralCoefficients::zeros(1), 0.2);
        assert!(matches!(
            lens_flow_consistency_check(&spec),
            Err(Error::UnsupportedExponent(_))
        ));
        let spec =
            LensConsistencySpec::new(3.0, Sign::Defocusing, SpectralCoefficients::zeros(1), 0.75);
        assert!(matches!(
            lens_flow_consistency_check(&spec),
            Err(Error::LensDomain(_))
        ));
    }

    #[test]
    fn sigma_zero_is_plain_distance() {
        let mut c = SpectralCoefficients::zeros(2);
        c.as_mut_slice()[1] = Complex64::new(0.5, 0.0);
        let spec = ScatteringSpec {
            levels: 3,
            dt: 1e-2,
            ..ScatteringSpec::new(c)
        };
        let a = scattering_cauchy_check(&spec).unwrap();
        assert_eq!(a.differences.len(), 2);
        let b = scattering_cauchy_check(&ScatteringSpec { sigma: 1.0, ..spec }).unwrap();
        assert!(b.differences[0] > a.differences[0]);
    }

    #[test]
    fn linear_regime_matches_free_evolution() {
        let amp = 1e-6;
        let g = SpectralCoefficients::unit(4, 2).scaled(Complex64::new(amp, 0.0));
        let spec = LensConsistencySpec {
            dt: 1e-3,
            ..LensConsistencySpec::new(3.0, Sign::Defocusing, g.clone(), 0.3)
        };
        let r = lens_flow_consistency_check(&spec).unwrap();
        for x in [0.0, 0.6, 1.5, 3.0] {
            let exact = free_evolved(&g, r.s_target, x);
            assert!((r.harmonic_side.eval(x).unwrap() - exact).norm() < 1e-8 * amp);
        }
    }
}
