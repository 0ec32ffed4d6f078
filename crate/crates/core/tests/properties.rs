//! Property tests for the structural identities of the toolkit.

use std::sync::Arc;

use harmonic_gibbs::basis::cutoff::littlewood_paley_total;
use harmonic_gibbs::basis::SmoothStep;
use harmonic_gibbs::dynamics::{
    gauge_deviation, projected_nonlinearity, FlowConfig, Integrator, TimeFactor,
};
use harmonic_gibbs::gibbs::{
    defocusing_weight, focusing_weight, self_normalized, GibbsConfig, GibbsDensity, Sign,
};
use harmonic_gibbs::lens::RadialProfile;
use harmonic_gibbs::quadrature::kappa::KappaEvaluator;
use harmonic_gibbs::quadrature::{
    build_rule, PowerNorm, RadialGrid, SpectralCoefficients, SpectralTransform,
};
use harmonic_gibbs::random_field::chaos::chaos_exact_second_moment;
use harmonic_gibbs::random_field::sampling::sobolev_norm_sq_from_gaussians;
use harmonic_gibbs::random_field::{
    alpha, complex_gaussian, sample_free_field, sobolev_norm_sq, ChaosIndexSet, DeltaSpec,
    RandomSeed,
};
use harmonic_gibbs::Complex64;
use proptest::prelude::*;

fn coeffs_strategy(max_k: usize, amp: f64) -> impl Strategy<Value = SpectralCoefficients> {
    (0..=max_k).prop_flat_map(move |k| {
        prop::collection::vec((-amp..amp, -amp..amp), k + 1).prop_map(|v| {
            SpectralCoefficients::new(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
                .unwrap()
        })
    })
}

fn transform(k_max: usize, nodes: usize) -> SpectralTransform {
    SpectralTransform::new(Arc::new(RadialGrid::with_size(nodes, 1.0).unwrap()), k_max).unwrap()
}

fn ln_factorial(m: u32) -> f64 {
    // compensated, so the oracle itself stays below 1e-13
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for j in 1..=m {
        let y = (j as f64).ln() - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

#[test]
fn rules_integrate_moments_exactly() {
    for n in [4usize, 16, 64, 256] {
        let rule = build_rule(n).unwrap();
        for m in 0..=(2 * n - 1) as u32 {
            // an absolute error in ln m! is a relative error in m!
            let exact = ln_factorial(m);
            let got = rule.ln_moment(m);
            assert!((got - exact).abs() < 1e-12, "n={n} m={m}: {got} vs {exact}");
        }
    }
}

#[test]
fn round_trip_at_largest_truncation() {
    let t = transform(256, 257);
    let mut rng = RandomSeed::new(5, 0).rng();
    let c =
        SpectralCoefficients::new((0..=256).map(|_| complex_gaussian(&mut rng)).collect()).unwrap();
    let back = t.analyze(&t.synthesize(&c).unwrap()).unwrap();
    let err = c
        .as_slice()
        .iter()
        .zip(back.as_slice())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-11, "{err}");
}

#[test]
fn gaussian_law_has_half_variance_per_component() {
    let mut rng = RandomSeed::new(19, 3).rng();
    let n = 100_000;
    let (mut sr, mut si, mut srr, mut sii, mut sri) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let g = complex_gaussian(&mut rng);
        sr += g.re;
        si += g.im;
        srr += g.re * g.re;
        sii += g.im * g.im;
        sri += g.re * g.im;
    }
    let n = n as f64;
    let (mr, mi) = (sr / n, si / n);
    assert!((srr / n - mr * mr - 0.5).abs() < 0.01);
    assert!((sii / n - mi * mi - 0.5).abs() < 0.01);
    assert!((sri / n - mr * mi).abs() < 0.01);
}

#[test]
fn self_normalized_constant_is_one() {
    let weights = [0.3, 1e-9, 7.0, 0.0, 2.5];
    let (mean, se) = self_normalized(&weights, &[1.0; 5]).unwrap();
    assert_eq!(mean, 1.0);
    assert_eq!(se, 0.0);
}

#[test]
fn cubic_flow_ignores_time_factor() {
    let mut rng = RandomSeed::new(23, 0).rng();
    let c = SpectralCoefficients::new((0..=8).map(|_| complex_gaussian(&mut rng) * 0.3).collect())
        .unwrap();
    let base = FlowConfig::new(3.0, Sign::Defocusing, 8).with_dt(1e-3);
    let (a, _) = harmonic_gibbs::dynamics::evolve(&c, 0.0, 0.5, base).unwrap();
    let (b, _) =
        harmonic_gibbs::dynamics::evolve(&c, 0.0, 0.5, base.with_time_factor(TimeFactor::CosPower))
            .unwrap();
    assert_eq!(a.coeffs, b.coeffs);
}

#[test]
fn gauge_equivariance_at_k16() {
    let mut rng = RandomSeed::new(29, 0).rng();
    let c = SpectralCoefficients::new(
        (0..=16)
            .map(|_| complex_gaussian(&mut rng) * 0.25)
            .collect(),
    )
    .unwrap();
    for integrator in [Integrator::Rk4Coeff, Integrator::StrangGrid] {
        let cfg = FlowConfig::new(3.0, Sign::Defocusing, 16)
            .with_dt(1e-3)
            .with_integrator(integrator);
        let dev = gauge_deviation(&c, 1.1, 0.3, cfg).unwrap();
        assert!(dev < 1e-10, "{integrator:?}: {dev}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn littlewood_paley_pieces_sum_to_one(k in 0usize..=4096) {
        prop_assert!((littlewood_paley_total(k, &SmoothStep) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn transform_round_trip(c in coeffs_strategy(64, 1.0)) {
        let t = transform(c.k_max(), c.k_max() + 1);
        let back = t.analyze(&t.synthesize(&c).unwrap()).unwrap();
        prop_assert!(back.distance(&c) < 1e-11);
    }

    #[test]
    fn parseval(c in coeffs_strategy(48, 1.0)) {
        let t = transform(c.k_max(), c.k_max() + 3);
        let field = t.synthesize(&c).unwrap();
        let mass = c.mass();
        prop_assert!((field.l2_norm_sq() - mass).abs() < 1e-10 * mass.max(1.0));
    }

    #[test]
    fn kappa_is_symmetric(
        idx in prop::collection::vec(0usize..40, 3..=5),
        rot in 0usize..5,
        swap in (0usize..5, 0usize..5),
    ) {
        let eval = KappaEvaluator::new();
        let base = eval.kappa(&idx).unwrap().value;
        let mut perm = idx.clone();
        perm.rotate_left(rot % idx.len());
        perm.swap(swap.0 % idx.len(), swap.1 % idx.len());
        let other = eval.kappa(&perm).unwrap().value;
        prop_assert!((base - other).abs() <= 1e-12 * base.abs().max(1e-300));
    }

    #[test]
    fn sobolev_norm_forms_agree(seed in any::<u64>(), k in 0usize..200, tau in -1.0f64..1.0) {
        let s = sample_free_field(k, RandomSeed::new(seed, 0));
        let a = sobolev_norm_sq(&s, tau);
        let b = sobolev_norm_sq_from_gaussians(&s, tau);
        prop_assert!((a - b).abs() <= 1e-13 * a.max(b));
    }

    #[test]
    fn chaos_moment_is_phase_invariant(theta in 0.0f64..std::f64::consts::TAU, seed in any::<u64>()) {
        let set = ChaosIndexSet::new(vec![8, 4], vec![1, -1], 40).unwrap();
        let scale = Complex64::new(0.7, 0.2);
        let a = chaos_exact_second_moment(&set, &DeltaSpec::RandomPhase { seed, scale }).unwrap();
        let turned = scale * Complex64::from_polar(1.0, theta);
        let b = chaos_exact_second_moment(&set, &DeltaSpec::RandomPhase { seed, scale: turned }).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn defocusing_weights_in_unit_interval(c in coeffs_strategy(12, 2.0)) {
        let ev = PowerNorm::new(c.k_max(), 4.0).unwrap();
        let w = defocusing_weight(&c, &ev).unwrap();
        prop_assert!(w > 0.0 && w <= 1.0);
    }

    #[test]
    fn focusing_weights_vanish_outside_window(c in coeffs_strategy(12, 1.5)) {
        let cfg = GibbsConfig::focusing(2.0, c.k_max());
        let ev = PowerNorm::new(c.k_max(), 3.0).unwrap();
        let w = focusing_weight(&c, &cfg, &ev).unwrap();
        let offset = (c.mass() - alpha(c.k_max())).abs();
        if offset >= cfg.beta {
            prop_assert_eq!(w, 0.0);
        } else {
            prop_assert!(w >= 0.0);
        }
    }

    #[test]
    fn weights_ignore_modes_above_truncation(c in coeffs_strategy(24, 1.0), k in 0usize..8) {
        let k = k.min(c.k_max());
        let density = GibbsDensity::new(GibbsConfig::defocusing(3.0, k)).unwrap();
        let mut padded = c.as_slice().to_vec();
        padded.truncate(k + 1);
        let mut noisy = c.as_slice()[..=k].to_vec();
        noisy.extend(std::iter::repeat_n(Complex64::new(9.0, -9.0), 5));
        prop_assert_eq!(density.weight(&padded), density.weight(&noisy));
    }

    #[test]
    fn projection_commutes_with_truncation(c in coeffs_strategy(6, 0.8), extra in 1usize..12, odd in 0usize..2) {
        let p = [3.0, 5.0][odd];
        let small = projected_nonlinearity(&c, p, Sign::Defocusing).unwrap();
        let big = projected_nonlinearity(&c.resized(c.k_max() + extra), p, Sign::Defocusing).unwrap();
        let cut = big.resized(c.k_max());
        prop_assert!(cut.distance(&small) < 1e-12 * small.mass().sqrt().max(1.0));
    }

    #[test]
    fn lens_maps_invert_and_keep_mass(
        c in coeffs_strategy(6, 1.0),
        t in -0.7f64..0.7,
        chirp in -1.0f64..1.0,
        dilation in 0.5f64..2.0,
    ) {
        let profile = RadialProfile { coeffs: c, amplitude: 1.0 / dilation, dilation, chirp };
        let s = (2.0 * t).tan() / 2.0;
        let there = profile.lens_forward(t).unwrap();
        let back = there.lens_inverse(s).unwrap();
        let other = profile.lens_inverse(s).unwrap().lens_forward(t).unwrap();
        for r in [0.0, 0.4, 1.3, 2.7] {
            let v = profile.eval(r).unwrap();
            prop_assert!((back.eval(r).unwrap() - v).norm() < 1e-10);
            prop_assert!((other.eval(r).unwrap() - v).norm() < 1e-10);
        }
        prop_assert!((there.l2_norm() - profile.l2_norm()).abs() < 1e-12 * profile.l2_norm().max(1.0));
    }
}
