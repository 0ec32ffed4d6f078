//! The Galerkin-truncated flow `i c_k' = (4k+2) c_k ± m(t) P_K(|u|^{p-1}u)_k`.

use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::laguerre::eigenvalue;
use crate::gibbs::Sign;
use crate::quadrature::{size_for_degree, RadialGrid, SpectralCoefficients, SpectralTransform};
use crate::{Error, Result};

/// Largest number of steps a single evolution may take.
pub const MAX_STEPS: f64 = 1e8;

/// Time dependence `m(t)` of the nonlinear term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeFactor {
    /// `m ≡ 1`: the autonomous truncated equation.
    ConstantOne,
    /// `m(t) = (cos 2t)^{p-3}`, the lens-transformed equation on `|t| < π/4`.
    CosPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Exact linear half-steps around a pointwise phase rotation on the grid.
    StrangGrid,
    /// Fourth-order Runge–Kutta in the interaction picture: the linear phases
    /// `e^{-i(4k+2)t}` are applied exactly and RK4 integrates the nonlinear remainder.
    Rk4Coeff,
    /// Classical RK4 on the full coefficient ODE. Its stability polynomial damps
    /// the stiff phases by `1 - (νdt)^6/72` per step, so mass drifts at high `K`.
    Rk4Classical,
}

impl std::str::FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "strang_grid" | "strang" => Ok(Integrator::StrangGrid),
            "rk4_coeff" | "rk4" => Ok(Integrator::Rk4Coeff),
            "rk4_classical" => Ok(Integrator::Rk4Classical),
            _ => Err(Error::InvalidParameter(format!(
                "integrator must be one of strang_grid, rk4_coeff, rk4_classical; got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub p: f64,
    pub sign: Sign,
    pub k_max: usize,
    pub time_factor: TimeFactor,
    pub integrator: Integrator,
    pub dt: f64,
    /// Drop the nonlinear term (testing hook).
    #[serde(default)]
    pub linear_only: bool,
}

impl FlowConfig {
    pub fn new(p: f64, sign: Sign, k_max: usize) -> Self {
        Self {
            p,
            sign,
            k_max,
            time_factor: TimeFactor::ConstantOne,
            integrator: Integrator::Rk4Coeff,
            dt: 1e-3,
            linear_only: false,
        }
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }

    pub fn with_integrator(self, integrator: Integrator) -> Self {
        Self { integrator, ..self }
    }

    pub fn with_time_factor(self, time_factor: TimeFactor) -> Self {
        Self {
            time_factor,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "p must exceed 1, got {}",
                self.p
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        Ok(())
    }

    /// Whether `|u|^{p-1}u` is a polynomial in `u, ū` (odd integer `p`).
    pub fn is_polynomial(&self) -> bool {
        self.p.fract() == 0.0 && !(self.p as u64).is_multiple_of(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub coeffs: SpectralCoefficients,
}

impl FlowState {
    pub fn new(t: f64, coeffs: SpectralCoefficients) -> Self {
        Self { t, coeffs }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .as_slice()
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Buffers reused across steps.
#[derive(Debug, Clone)]
pub struct Workspace {
    grid_values: Vec<Complex64>,
    stages: [Vec<Complex64>; 5],
}

/// Precomputed operators for one configuration.
///
/// For odd integer `p` the nonlinearity `|u|^{p-1}u·e_k` is a polynomial of degree
/// `(p+1)K` times `e^{-(p+1)z/2}`, so a grid with that decay and `(p+1)K/2 + 1`
/// nodes projects it exactly. Other `p` use twice as many nodes.
#[derive(Debug, Clone)]
pub struct Flow {
    config: FlowConfig,
    transform: SpectralTransform,
    eigenvalues: Vec<f64>,
}

impl Flow {
    pub fn new(config: FlowConfig) -> Result<Self> {
        config.validate()?;
        let q = config.p + 1.0;
        let degree = (q * config.k_max as f64).ceil() as usize;
        let n = if config.is_polynomial() {
            size_for_degree(degree)
        } else {
            2 * size_for_degree(degree)
        };
        let grid = Arc::new(RadialGrid::with_size(n, q / 2.0)?);
        Ok(Self {
            config,
            transform: SpectralTransform::new(grid, config.k_max)?,
            eigenvalues: (0..=config.k_max).map(eigenvalue).collect(),
        })
    }

    pub fn config(&self) -> &FlowConfig {
        &self.config
    }

    pub fn transform(&self) -> &SpectralTransform {
        &self.transform
    }

    pub fn workspace(&self) -> Workspace {
        let zero = Complex64::new(0.0, 0.0);
        let m = self.config.k_max + 1;
        Workspace {
            grid_values: vec![zero; self.transform.grid().len()],
            stages: std::array::from_fn(|_| vec![zero; m]),
        }
    }

    /// `m(t)`.
    pub fn time_factor(&self, t: f64) -> Result<f64> {
        match self.config.time_factor {
            TimeFactor::ConstantOne => Ok(1.0),
            TimeFactor::CosPower => {
                if t.abs() >= FRAC_PI_4 {
                    return Err(Error::LensDomain(t));
                }
                Ok((2.0 * t).cos().powf(self.config.p - 3.0))
            }
        }
    }

    fn check_len(&self, c: &[Complex64]) -> Result<()> {
        if c.len() != self.config.k_max + 1 {
            return Err(Error::InvalidParameter(format!(
                "flow has K = {}, state has {} modes",
                self.config.k_max,
                c.len()
            )));
        }
        Ok(())
    }

    /// `P_K(±|u|^{p-1}u)` written into `out`.
    pub fn nonlinearity_into(
        &self,
        c: &[Complex64],
        out: &mut [Complex64],
        grid: &mut [Complex64],
    ) {
        self.transform.synthesize_into(c, grid);
        let half = (self.config.p - 1.0) / 2.0;
        let s = self.config.sign.factor();
        if self.config.p == 3.0 {
            for u in grid.iter_mut() {
                *u *= s * u.norm_sqr();
            }
        } else {
            for u in grid.iter_mut() {
                *u *= s * u.norm_sqr().powf(half);
            }
        }
        self.transform.analyze_into(grid, out);
    }

    /// `P_K(±|u|^{p-1}u)` for the configured sign and power.
    pub fn projected_nonlinearity(
        &self,
        coeffs: &SpectralCoefficients,
    ) -> Result<SpectralCoefficients> {
        self.check_len(coeffs.as_slice())?;
        let mut out = vec![Complex64::new(0.0, 0.0); coeffs.as_slice().len()];
        let mut grid = vec![Complex64::new(0.0, 0.0); self.transform.grid().len()];
        self.nonlinearity_into(coeffs.as_slice(), &mut out, &mut grid);
        SpectralCoefficients::new(out)
    }

    /// `c' = -i(ν c + m(t) N(c))`.
    fn rhs(
        &self,
        t: f64,
        c: &[Complex64],
        out: &mut [Complex64],
        grid: &mut [Complex64],
    ) -> Result<()> {
        if self.config.linear_only {
            out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        } else {
            let m = self.time_factor(t)?;
            self.nonlinearity_into(c, out, grid);
            if m != 1.0 {
                out.iter_mut().for_each(|o| *o *= m);
            }
        }
        for ((o, v), nu) in out.iter_mut().zip(c).zip(&self.eigenvalues) {
            let f = *o + v * nu;
            // -i·f
            *o = Complex64::new(f.im, -f.re);
        }
        Ok(())
    }

    /// Advance by the configured `dt`.
    pub fn step(&self, state: &mut FlowState, ws: &mut Workspace) -> Result<()> {
        self.step_by(state, self.config.dt, ws)
    }

    /// Advance by a signed step `h`.
    pub fn step_by(&self, state: &mut FlowState, h: f64, ws: &mut Workspace) -> Result<()> {
        self.check_len(state.coeffs.as_slice())?;
        match self.config.integrator {
            Integrator::Rk4Coeff => self.rk4_interaction(state, h, ws),
            Integrator::Rk4Classical => self.rk4(state, h, ws),
            Integrator::StrangGrid => self.strang(state, h, ws),
        }
    }

    fn rk4(&self, state: &mut FlowState, h: f64, ws: &mut Workspace) -> Result<()> {
        let t = state.t;
        let c = state.coeffs.as_mut_slice();
        let [k1, k2, k3, k4, tmp] = &mut ws.stages;
        let grid = &mut ws.grid_values;
        self.rhs(t, c, k1, grid)?;
        for ((x, a), b) in tmp.iter_mut().zip(c.iter()).zip(k1.iter()) {
            *x = a + b * (0.5 * h);
        }
        self.rhs(t + 0.5 * h, tmp, k2, grid)?;
        for ((x, a), b) in tmp.iter_mut().zip(c.iter()).zip(k2.iter()) {
            *x = a + b * (0.5 * h);
        }
        self.rhs(t + 0.5 * h, tmp, k3, grid)?;
        for ((x, a), b) in tmp.iter_mut().zip(c.iter()).zip(k3.iter()) {
            *x = a + b * h;
        }
        self.rhs(t + h, tmp, k4, grid)?;
        let w = h / 6.0;
        for i in 0..c.len() {
            c[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
        state.t = t + h;
        Ok(())
    }

    /// `-i m(t) N(c)`, the nonlinear part of the right-hand side.
    fn nonlinear_rhs(
        &self,
        t: f64,
        c: &[Complex64],
        out: &mut [Complex64],
        grid: &mut [Complex64],
    ) -> Result<()> {
        if self.config.linear_only {
            out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
            return Ok(());
        }
        let m = self.time_factor(t)?;
        self.nonlinearity_into(c, out, grid);
        for o in out.iter_mut() {
            *o = Complex64::new(m * o.im, -m * o.re);
        }
        Ok(())
    }

    /// Lawson's integrating-factor RK4 with `E(τ) = diag(e^{-iν_k τ})`.
    fn rk4_interaction(&self, state: &mut FlowState, h: f64, ws: &mut Workspace) -> Result<()> {
        let t = state.t;
        let c = state.coeffs.as_mut_slice();
        let [k1, k2, k3, k4, tmp] = &mut ws.stages;
        let grid = &mut ws.grid_values;
        let half: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|nu| Complex64::from_polar(1.0, -nu * 0.5 * h))
            .collect();
        self.nonlinear_rhs(t, c, k1, grid)?;
        for i in 0..c.len() {
            tmp[i] = half[i] * (c[i] + k1[i] * (0.5 * h));
        }
        self.nonlinear_rhs(t + 0.5 * h, tmp, k2, grid)?;
        for i in 0..c.len() {
            tmp[i] = half[i] * c[i] + k2[i] * (0.5 * h);
        }
        self.nonlinear_rhs(t + 0.5 * h, tmp, k3, grid)?;
        for i in 0..c.len() {
            tmp[i] = half[i] * (half[i] * c[i] + k3[i] * h);
        }
        self.nonlinear_rhs(t + h, tmp, k4, grid)?;
        let w = h / 6.0;
        for i in 0..c.len() {
            let e = half[i];
            c[i] = e * (e * (c[i] + k1[i] * w) + (k2[i] + k3[i]) * (2.0 * w)) + k4[i] * w;
        }
        state.t = t + h;
        Ok(())
    }

    fn strang(&self, state: &mut FlowState, h: f64, ws: &mut Workspace) -> Result<()> {
        let t = state.t;
        self.linear_phase(state.coeffs.as_mut_slice(), 0.5 * h);
        if !self.config.linear_only {
            let m = self.time_factor(t + 0.5 * h)?;
            self.phase_rotation(
                state.coeffs.as_mut_slice(),
                self.config.sign.factor() * m * h,
                ws,
            )?;
        }
        self.linear_phase(state.coeffs.as_mut_slice(), 0.5 * h);
        state.t = t + h;
        Ok(())
    }

    /// Symmetric projected version of `u ↦ e^{-iaV}u`, `V = |u|^{p-1}`.
    ///
    /// Pointwise, `u' - u = -2i tan(aV/2) (u + u')/2` holds exactly for the rotation.
    /// Imposing it on the projected midpoint gives an implicit rule that is odd in `a`,
    /// hence time-reversible, and it is solved by fixed-point iteration. Only the
    /// increment is projected, since it decays like `|u|^{p-1}u`.
    fn phase_rotation(&self, c: &mut [Complex64], a: f64, ws: &mut Workspace) -> Result<()> {
        const MAX_ITERATIONS: usize = 60;
        let half = (self.config.p - 1.0) / 2.0;
        let [start, next, mid, ..] = &mut ws.stages;
        let grid = &mut ws.grid_values;
        start.copy_from_slice(c);
        let scale = 1.0 + c.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        for _ in 0..MAX_ITERATIONS {
            for ((x, s), y) in mid.iter_mut().zip(start.iter()).zip(c.iter()) {
                *x = (s + y) * 0.5;
            }
            self.transform.synthesize_into(mid, grid);
            for u in grid.iter_mut() {
                let k = (0.5 * a * u.norm_sqr().powf(half)).tan();
                *u = Complex64::new(2.0 * k * u.im, -2.0 * k * u.re);
            }
            self.transform.analyze_into(grid, next);
            let mut change = 0.0f64;
            for ((y, s), d) in c.iter_mut().zip(start.iter()).zip(next.iter()) {
                let v = s + d;
                change = change.max((v - *y).norm());
                *y = v;
            }
            // non-finite values are reported by the caller with the step number
            if !change.is_finite() || change <= 4.0 * f64::EPSILON * scale {
                return Ok(());
            }
        }
        Ok(())
    }

    fn linear_phase(&self, c: &mut [Complex64], h: f64) {
        for (v, nu) in c.iter_mut().zip(&self.eigenvalues) {
            *v *= Complex64::from_polar(1.0, -nu * h);
        }
    }

    /// `(Σ|c_k|², Σν_k|c_k|² ± m(t)·(2/(p+1))‖u‖^{p+1}_{p+1})` at time `t`.
    pub fn mass_and_energy(
        &self,
        t: f64,
        coeffs: &[Complex64],
        ws: &mut Workspace,
    ) -> Result<(f64, f64)> {
        self.check_len(coeffs)?;
        let mass = coeffs.iter().map(|c| c.norm_sqr()).sum();
        let quadratic: f64 = coeffs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, nu)| nu * c.norm_sqr())
            .sum();
        if self.config.linear_only {
            return Ok((mass, quadratic));
        }
        let m = self.time_factor(t)?;
        let potential = self.power_integral(coeffs, ws);
        let q = self.config.p + 1.0;
        Ok((
            mass,
            quadratic + self.config.sign.factor() * m * 2.0 / q * potential,
        ))
    }

    /// `‖u‖_{L^{p+1}}^{p+1}`, exact for odd integer `p`.
    pub fn power_integral(&self, coeffs: &[Complex64], ws: &mut Workspace) -> f64 {
        let grid = &mut ws.grid_values;
        self.transform.synthesize_into(coeffs, grid);
        let half = (self.config.p + 1.0) / 2.0;
        grid.iter()
            .zip(self.transform.plane_weights())
            .map(|(u, w)| w * u.norm_sqr().powf(half))
            .sum()
    }
}

/// `P_K(±|u|^{p-1}u)` for a given flow configuration (builds the operators).
pub fn projected_nonlinearity(
    coeffs: &SpectralCoefficients,
    p: f64,
    sign: Sign,
) -> Result<SpectralCoefficients> {
    Flow::new(FlowConfig::new(p, sign, coeffs.k_max()))?.projected_nonlinearity(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(v: &[(f64, f64)]) -> SpectralCoefficients {
        SpectralCoefficients::new(v.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
    }

    #[test]
    fn zero_nonlinearity() {
        let n =
            projected_nonlinearity(&SpectralCoefficients::zeros(5), 3.0, Sign::Defocusing).unwrap();
        assert!(n.as_slice().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn ground_state_cubic_projection() {
        // P(|e_0|² e_0)_0 = ∫ e_0⁴ = 1/(2π)
        let a = Complex64::new(0.6, -0.2);
        let mut u = SpectralCoefficients::zeros(6);
        u.as_mut_slice()[0] = a;
        let n = projected_nonlinearity(&u, 3.0, Sign::Defocusing).unwrap();
        let expect = a * a.norm_sqr() / (2.0 * PI);
        assert!((n[0] - expect).norm() < 1e-15);
        // e_0³ = π^{-3/2} e^{-3z/2} has coefficients ∝ ∫ e^{-2z} L_k = 2^{-k-1}
        for k in 1..=6 {
            let ratio = n[k] / n[k - 1];
            assert!(
                (ratio.re - 0.5).abs() < 1e-13 && ratio.im.abs() < 1e-13,
                "k={k}"
            );
        }
    }

    #[test]
    fn cos_power_domain() {
        let flow = Flow::new(
            FlowConfig::new(5.0, Sign::Defocusing, 2).with_time_factor(TimeFactor::CosPower),
        )
        .unwrap();
        assert!(flow.time_factor(0.0).unwrap() == 1.0);
        assert!(matches!(
            flow.time_factor(FRAC_PI_4),
            Err(Error::LensDomain(_))
        ));
        let flow3 = Flow::new(
            FlowConfig::new(3.0, Sign::Defocusing, 2).with_time_factor(TimeFactor::CosPower),
        )
        .unwrap();
        assert_eq!(flow3.time_factor(0.7).unwrap(), 1.0);
    }

    #[test]
    fn linear_only_is_exact_phase() {
        for integ in [
            Integrator::StrangGrid,
            Integrator::Rk4Coeff,
            Integrator::Rk4Classical,
        ] {
            let cfg = FlowConfig {
                linear_only: true,
                ..FlowConfig::new(3.0, Sign::Defocusing, 3)
                    .with_integrator(integ)
                    .with_dt(1e-3)
            };
            let flow = Flow::new(cfg).unwrap();
            let mut ws = flow.workspace();
            let init = c(&[(1.0, 0.0), (0.0, 0.5), (0.3, 0.3), (-0.2, 0.1)]);
            let mut s = FlowState::new(0.0, init.clone());
            for _ in 0..100 {
                flow.step(&mut s, &mut ws).unwrap();
            }
            for k in 0..=3 {
                let exact = init[k] * Complex64::from_polar(1.0, -eigenvalue(k) * s.t);
                let tol = if integ == Integrator::Rk4Classical {
                    1e-9
                } else {
                    1e-13
                };
                assert!((s.coeffs[k] - exact).norm() < tol, "{integ:?} k={k}");
            }
        }
    }
}
