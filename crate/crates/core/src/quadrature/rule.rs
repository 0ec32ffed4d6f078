//! Gauss–Laguerre rules and their rescaled radial grids.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::tridiagonal::symmetric_tridiagonal_eigenvalues;
use crate::basis::laguerre::{weighted_laguerre_with_difference, LaguerreSweep};
use crate::{Error, Result};

/// Largest supported rule size.
pub const MAX_RULE_SIZE: usize = 1 << 14;

/// Gauss rule for `∫_0^∞ f(z) e^{-z} dz`.
///
/// Weights are kept in scaled form `ŵ_i = w_i e^{z_i}` since the plain weights
/// underflow for the outer nodes of large rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    scaled_weights: Vec<f64>,
}

impl QuadratureRule {
    /// `n`-point Gauss–Laguerre rule, exact for polynomials of degree `2n - 1`.
    ///
    /// Nodes are the eigenvalues of the Jacobi matrix (diagonal `2i + 1`,
    /// off-diagonal `i`), polished by two Newton steps on `L_n`. Weights come
    /// from the Christoffel function `1/Σ_{k<n} L_k(z)²`, a sum of squares that
    /// avoids the cancellation of `L_{n-1}` near the neighbouring zeros.
    pub fn gauss_laguerre(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_RULE_SIZE {
            return Err(Error::InvalidParameter(format!(
                "rule size must lie in 1..={MAX_RULE_SIZE}, got {n}"
            )));
        }
        let diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + 1.0).collect();
        let off: Vec<f64> = (1..n).map(|i| i as f64).collect();
        let mut nodes = symmetric_tridiagonal_eigenvalues(&diag, &off)?;
        let nf = n as f64;
        let mut scaled_weights = Vec::with_capacity(n);
        for z in nodes.iter_mut() {
            for _ in 0..2 {
                let (diff, cur) = weighted_laguerre_with_difference(n, *z)?;
                // L_n / L_n' = z L_n / (n (L_n - L_{n-1})); the e^{-z/2} factors cancel
                let denom = nf * diff;
                if denom != 0.0 {
                    let step = *z * cur / denom;
                    if step.is_finite() && step.abs() < 0.1 * z.abs().max(1e-300) {
                        *z -= step;
                    }
                }
            }
            scaled_weights.push(christoffel_weight(n, *z)?);
        }
        Ok(Self {
            nodes,
            scaled_weights,
        })
    }

    /// Smallest rule exact for polynomial degree `degree`.
    pub fn for_degree(degree: usize) -> Result<Self> {
        Self::gauss_laguerre(size_for_degree(degree))
    }

    /// Assemble a rule from nodes and plain weights (as read from CSV).
    pub fn from_nodes_and_weights(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::Format(
                "rule needs matching, nonempty node and weight lists".into(),
            ));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) || nodes[0] <= 0.0 {
            return Err(Error::Format(
                "rule nodes must be positive and strictly increasing".into(),
            ));
        }
        let scaled_weights = nodes
            .iter()
            .zip(&weights)
            .map(|(z, w)| w * z.exp())
            .collect();
        Ok(Self {
            nodes,
            scaled_weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly against `e^{-z}`.
    pub fn exact_degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `ŵ_i = w_i e^{z_i}`.
    pub fn scaled_weights(&self) -> &[f64] {
        &self.scaled_weights
    }

    /// Plain weights `w_i`; the outermost ones may underflow to zero.
    pub fn weights(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.scaled_weights)
            .map(|(z, w)| w * (-z).exp())
            .collect()
    }

    /// `Σ w_i f(z_i) ≈ ∫_0^∞ f(z) e^{-z} dz`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.scaled_weights)
            .map(|(&z, &w)| w * (-z).exp() * f(z))
            .sum()
    }

    /// `ln Σ w_i z_i^m`, evaluated in log space so high moments stay finite.
    pub fn ln_moment(&self, m: u32) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.scaled_weights)
            .map(|(&z, &w)| w.ln() - z + m as f64 * z.ln())
            .collect();
        let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
    }

    /// Write `node,weight` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["node", "weight"])?;
        for (z, wt) in self.nodes.iter().zip(self.weights()) {
            w.write_record([format!("{z:.17e}"), format!("{wt:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read `node,weight` rows written by [`QuadratureRule::write_csv`].
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Format("short row in rule CSV".into()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("bad number in rule CSV: {e}")))
            };
            nodes.push(parse(0)?);
            weights.push(parse(1)?);
        }
        Self::from_nodes_and_weights(nodes, weights)
    }
}

/// `ŵ = e^{z} / Σ_{k<n} L_k(z)² = 1 / Σ_{k<n} 𝓛_k(z)²`.
fn christoffel_weight(n: usize, z: f64) -> Result<f64> {
    let mut sweep = LaguerreSweep::new(z)?;
    let mut total = 0.0;
    for k in 0..n {
        if k > 0 {
            sweep.advance();
        }
        let v = sweep.value();
        total += v * v;
    }
    Ok(1.0 / total)
}

/// Number of nodes needed for exactness up to `degree`.
pub fn size_for_degree(degree: usize) -> usize {
    degree / 2 + 1
}

/// `build_rule(n)`: the `n`-point Gauss–Laguerre rule.
pub fn build_rule(n: usize) -> Result<QuadratureRule> {
    QuadratureRule::gauss_laguerre(n)
}

/// A rule transported to the weight `e^{-λz}` by `z = s/λ`.
///
/// `Σ_i weights[i]·F(nodes[i])` approximates `∫_0^∞ F(z) dz` and is exact when
/// `F(z) e^{λz}` is a polynomial of degree at most `2n - 1`.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    rule: Arc<QuadratureRule>,
    decay: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(rule: Arc<QuadratureRule>, decay: f64) -> Result<Self> {
        if !(decay > 0.0) || !decay.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "decay rate must be positive, got {decay}"
            )));
        }
        let nodes = rule.nodes().iter().map(|s| s / decay).collect();
        let weights = rule.scaled_weights().iter().map(|w| w / decay).collect();
        Ok(Self {
            rule,
            decay,
            nodes,
            weights,
        })
    }

    /// Grid with `n` nodes and decay `λ`.
    pub fn with_size(n: usize, decay: f64) -> Result<Self> {
        Self::new(Arc::new(QuadratureRule::gauss_laguerre(n)?), decay)
    }

    pub fn rule(&self) -> &Arc<QuadratureRule> {
        &self.rule
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Points `z_i` (squared radii).
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights for `∫_0^∞ F(z) dz`, including the exponential factor.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_0^∞ F(z) dz`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }

    /// `∫_{ℝ²} G(|x|²) dx = π ∫_0^∞ G(z) dz`.
    pub fn plane_integral(&self, f: impl Fn(f64) -> f64) -> f64 {
        std::f64::consts::PI * self.integrate(f)
    }
}

/// `π ∫_0^∞ g(z) dz` for an integrand decaying like `e^{-λz}`.
pub fn radial_integral(g: impl Fn(f64) -> f64, decay: f64, rule: &QuadratureRule) -> Result<f64> {
    if !(decay > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "decay rate must be positive, got {decay}"
        )));
    }
    let s: f64 = rule
        .nodes()
        .iter()
        .zip(rule.scaled_weights())
        .map(|(&x, &w)| w * g(x / decay))
        .sum();
    Ok(std::f64::consts::PI * s / decay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn one_and_two_point_rules() {
        let r1 = build_rule(1).unwrap();
        assert_relative_eq!(r1.nodes()[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(r1.weights()[0], 1.0, epsilon = 1e-15);
        let r2 = build_rule(2).unwrap();
        assert_relative_eq!(r2.nodes()[0], 2.0 - SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(r2.nodes()[1], 2.0 + SQRT_2, epsilon = 1e-14);
        let w = r2.weights();
        assert_relative_eq!(w[0], (2.0 + SQRT_2) / 4.0, epsilon = 1e-15);
        assert_relative_eq!(w[1], (2.0 - SQRT_2) / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_size_is_rejected() {
        assert!(build_rule(0).is_err());
        assert!(build_rule(MAX_RULE_SIZE + 1).is_err());
    }

    #[test]
    fn zeroth_moment_is_one() {
        for n in [1, 3, 10, 64, 300, 1000] {
            let r = build_rule(n).unwrap();
            let total: f64 = r.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-14, "n={n}: {total}");
            assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(r.scaled_weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn radial_integrals() {
        let rule = build_rule(8).unwrap();
        assert_relative_eq!(
            radial_integral(|z| (-z).exp(), 1.0, &rule).unwrap(),
            PI,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            radial_integral(|z| (-2.0 * z).exp(), 2.0, &rule).unwrap(),
            PI / 2.0,
            max_relative = 1e-14
        );
        let e0sq = radial_integral(|z| (-z).exp() / PI, 1.0, &rule).unwrap();
        assert_relative_eq!(e0sq, 1.0, max_relative = 1e-14);
        assert!(radial_integral(|z| z, 0.0, &rule).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rule.csv");
        let r = build_rule(12).unwrap();
        r.write_csv(&path).unwrap();
        let back = QuadratureRule::read_csv(&path).unwrap();
        for i in 0..r.len() {
            assert_relative_eq!(back.nodes()[i], r.nodes()[i], max_relative = 1e-16);
            assert_relative_eq!(
                back.scaled_weights()[i],
                r.scaled_weights()[i],
                max_relative = 1e-13
            );
        }
    }
}
