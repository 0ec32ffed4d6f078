//! Finite-dimensional structure of the truncated flow.

use harmonic_gibbs::dynamics::{
    energy_rate, integrator_agreement, liouville_check, step_doubling_order, Flow, FlowConfig,
    FlowState, Integrator, TimeFactor,
};
use harmonic_gibbs::gibbs::Sign;
use harmonic_gibbs::random_field::{sample_free_field, RandomSeed};

#[test]
fn volume_is_preserved_for_two_modes() {
    let c = sample_free_field(1, RandomSeed::new(41, 0)).coeffs;
    for (p, integrator) in [
        (3.0, Integrator::Rk4Coeff),
        (3.0, Integrator::StrangGrid),
        (5.0, Integrator::Rk4Coeff),
    ] {
        let cfg = FlowConfig::new(p, Sign::Defocusing, 1)
            .with_dt(1e-3)
            .with_integrator(integrator);
        let r = liouville_check(&c, 0.3, cfg, 1e-5).unwrap();
        assert!(
            r.deviation < 1e-4,
            "p={p} {integrator:?}: det {}",
            r.determinant
        );
    }
}

#[test]
fn integrators_converge_to_each_other() {
    let c = sample_free_field(8, RandomSeed::new(43, 0)).coeffs;
    let cfg = FlowConfig::new(3.0, Sign::Defocusing, 8);
    let rows = integrator_agreement(&c, 0.5, cfg, &[4e-3, 2e-3, 1e-3]).unwrap();
    for w in rows.windows(2) {
        // Strang is the slower scheme: halving dt should cut the gap by about 4
        let ratio = w[0].distance / w[1].distance;
        assert!((3.2..4.8).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn orders_from_step_doubling() {
    let c = sample_free_field(16, RandomSeed::new(47, 0)).coeffs;
    let rk = step_doubling_order(
        &c,
        0.0,
        0.5,
        FlowConfig::new(3.0, Sign::Defocusing, 16).with_dt(4e-3),
    )
    .unwrap();
    assert!((rk.order - 4.0).abs() < 0.3, "{rk:?}");
    let strang = FlowConfig::new(3.0, Sign::Defocusing, 16)
        .with_dt(4e-3)
        .with_integrator(Integrator::StrangGrid);
    let st = step_doubling_order(&c, 0.0, 0.5, strang).unwrap();
    assert!((st.order - 2.0).abs() < 0.2, "{st:?}");
}

#[test]
fn energy_rate_matches_finite_differences() {
    // quintic flow with the time-dependent factor; compare the closed-form
    // derivative of the energy with a five-point stencil along one trajectory
    let p = 5.0;
    let cfg = FlowConfig::new(p, Sign::Defocusing, 8)
        .with_dt(1e-3)
        .with_time_factor(TimeFactor::CosPower);
    let flow = Flow::new(cfg).unwrap();
    let mut ws = flow.workspace();
    let mut state = FlowState::new(0.0, sample_free_field(8, RandomSeed::new(53, 0)).coeffs);
    flow.advance(&mut state, 0.4, &mut ws).unwrap();
    let h = 1e-3;
    let mut energies = Vec::new();
    let mut probe = state.clone();
    flow.advance(&mut probe, -2.0 * h, &mut ws).unwrap();
    for _ in 0..5 {
        energies.push(
            flow.mass_and_energy(probe.t, probe.coeffs.as_slice(), &mut ws)
                .unwrap()
                .1,
        );
        flow.step_by(&mut probe, h, &mut ws).unwrap();
    }
    let numeric = (energies[0] - 8.0 * energies[1] + 8.0 * energies[3] - energies[4]) / (12.0 * h);
    let powered = flow.power_integral(state.coeffs.as_slice(), &mut ws);
    let closed = energy_rate(p, state.t, powered);
    assert!(closed < 0.0);
    assert!(
        ((numeric - closed) / closed).abs() < 1e-4,
        "{numeric} vs {closed}"
    );
}
