//! Closed-form free Schrödinger evolution `e^{isΔ}` of the radial eigenfunctions.
//!
//! Gaussians evolve explicitly in the plane:
//! `e^{isΔ} e^{-a r²} = (1 + 4ias)^{-1} exp(-a r²/(1 + 4ias))` for `Re a > 0`.
//! The eigenfunctions have the Gaussian generating function
//! `Σ_k e_k(r) w^k = π^{-1/2} (1-w)^{-1} exp(-a(w) r²)`, `a(w) = (1+w)/(2(1-w))`,
//! so `e^{isΔ} e_k` is the `k`-th Taylor coefficient of the evolved family,
//! extracted with the trapezoidal rule on a circle `|w| = ρ < 1`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::quadrature::SpectralCoefficients;

/// `e^{isΔ} e^{-a r²}` in the plane.
pub fn free_gaussian(a: Complex64, s: f64, r: f64) -> Complex64 {
    let d = Complex64::new(1.0, 0.0) + Complex64::i() * a * (4.0 * s);
    (-(a * r * r) / d).exp() / d
}

/// Radius and node count of the extraction circle for order `k`: the aliasing
/// error is about `ρ^M ≈ 2^{-70}` and the roundoff gain `ρ^{-k} ≤ 2^8`.
fn contour(k: usize) -> (f64, usize) {
    let rho = 2f64.powf(-8.0 / k.max(8) as f64);
    let m = 64.max((70 * k).div_ceil(8) + k + 1);
    (rho, m)
}

fn evolved_family(w: Complex64, s: f64, r: f64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let a = (one + w) / ((one - w) * 2.0);
    free_gaussian(a, s, r) / (one - w) / PI.sqrt()
}

/// `(e^{isΔ} e_k)(r)`.
pub fn free_evolved_eigenfunction(k: usize, s: f64, r: f64) -> Complex64 {
    let (rho, m) = contour(k);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..m {
        let theta = TAU * j as f64 / m as f64;
        let w = Complex64::from_polar(rho, theta);
        acc += evolved_family(w, s, r)
            * Complex64::from_polar(rho.powi(-(k as i32)), -(k as f64) * theta);
    }
    acc / m as f64
}

/// `(e^{isΔ} Σ g_k e_k)(r)`.
///
/// All orders share one circle (the one for the largest order with a nonzero
/// coefficient), so the family is evaluated once per node.
pub fn free_evolved(g: &SpectralCoefficients, s: f64, r: f64) -> Complex64 {
    let top = match g.as_slice().iter().rposition(|c| c.norm() != 0.0) {
        Some(k) => k,
        None => return Complex64::new(0.0, 0.0),
    };
    let (rho, m) = contour(top);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..m {
        let theta = TAU * j as f64 / m as f64;
        let f = evolved_family(Complex64::from_polar(rho, theta), s, r);
        let mut weight = Complex64::new(0.0, 0.0);
        for (k, c) in g.as_slice()[..=top].iter().enumerate() {
            weight += c * Complex64::from_polar(rho.powi(-(k as i32)), -(k as f64) * theta);
        }
        acc += f * weight;
    }
    acc / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::laguerre::eigenfunction;

    #[test]
    fn zero_time_reproduces_eigenfunctions() {
        for k in [0usize, 1, 5, 12, 32] {
            for r in [0.0, 0.7, 2.0, 4.5] {
                let got = free_evolved_eigenfunction(k, 0.0, r);
                let want = eigenfunction(k, r).unwrap();
                assert!((got - want).norm() < 1e-12, "k={k} r={r}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn ground_state_closed_form() {
        // e^{isΔ} e^{-r²/2} = (1+2is)^{-1} e^{-r²/(2(1+2is))}
        for s in [0.3, -1.2] {
            for r in [0.0, 1.0, 2.5] {
                let d = Complex64::new(1.0, 2.0 * s);
                let want = (-(r * r) / (d * 2.0)).exp() / d / PI.sqrt();
                assert!((free_evolved_eigenfunction(0, s, r) - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn first_mode_by_parameter_derivative() {
        // (1-z)e^{-z/2} = (1 + ∂_a) e^{-az} at a = 1/2
        let s = 0.45;
        for r in [0.0, 0.8, 1.9] {
            let a = Complex64::new(0.5, 0.0);
            let d = Complex64::new(1.0, 0.0) + Complex64::i() * a * (4.0 * s);
            let g = free_gaussian(a, s, r);
            let dg = g * (-(Complex64::i() * 4.0 * s) / d - r * r / (d * d));
            let want = (g + dg) / PI.sqrt();
            assert!((free_evolved_eigenfunction(1, s, r) - want).norm() < 1e-14);
        }
    }

    #[test]
    fn combination_matches_sum() {
        let g = SpectralCoefficients::new(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, -0.3),
            Complex64::new(0.2, 0.2),
        ])
        .unwrap();
        let s = 0.7;
        let r = 1.3;
        let want: Complex64 = (0..3)
            .map(|k| g[k] * free_evolved_eigenfunction(k, s, r))
            .sum();
        assert!((free_evolved(&g, s, r) - want).norm() < 1e-14);
    }
}
