//! Gauss–Legendre rules on `[-1, 1]` and composite panels.

use super::tridiagonal::symmetric_tridiagonal_eigenvalues;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "Gauss-Legendre rule needs n >= 1".into(),
            ));
        }
        let off: Vec<f64> = (1..n)
            .map(|i| {
                let i = i as f64;
                i / (4.0 * i * i - 1.0).sqrt()
            })
            .collect();
        let mut nodes = symmetric_tridiagonal_eigenvalues(&vec![0.0; n], &off)?;
        let mut weights = Vec::with_capacity(n);
        for x in nodes.iter_mut() {
            for _ in 0..2 {
                let (p, dp) = legendre_with_derivative(n, *x);
                *x -= p / dp;
            }
            let (_, dp) = legendre_with_derivative(n, *x);
            weights.push(2.0 / ((1.0 - *x * *x) * dp * dp));
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f` with this rule mapped onto `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let h = 0.5 * (b - a);
        let m = 0.5 * (b + a);
        h * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(m + h * x))
            .sum::<f64>()
    }

    /// Points and weights of the rule mapped onto `[a, b]`, appended to the outputs.
    pub fn push_panel(&self, a: f64, b: f64, points: &mut Vec<f64>, weights: &mut Vec<f64>) {
        let h = 0.5 * (b - a);
        let m = 0.5 * (b + a);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            points.push(m + h * x);
            weights.push(h * w);
        }
    }
}

/// `(P_n(x), P_n'(x))`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(6).unwrap();
        for m in 0..12 {
            let exact = if m % 2 == 0 {
                2.0 / (m as f64 + 1.0)
            } else {
                0.0
            };
            let q = gl.integrate(-1.0, 1.0, |x| x.powi(m));
            assert!((q - exact).abs() < 1e-14, "m={m}");
        }
        let q = gl.integrate(0.0, std::f64::consts::PI, f64::sin);
        assert!((q - 2.0).abs() < 1e-6);
    }

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 20, 64] {
            let gl = GaussLegendre::new(n).unwrap();
            let s: f64 = gl.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13);
        }
    }
}
