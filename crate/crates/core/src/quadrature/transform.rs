//! Spectral coefficients, grid fields, and the transforms between them.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rule::RadialGrid;
use crate::basis::laguerre::eigenfunctions_of_z;
use crate::{Error, Result};

/// Coefficients `c_0, …, c_K` of a function in `span{e_0, …, e_K}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCoefficients {
    c: Vec<Complex64>,
}

impl SpectralCoefficients {
    /// Wrap a coefficient vector; it must be nonempty and finite.
    pub fn new(c: Vec<Complex64>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::InvalidParameter(
                "coefficient vector is empty".into(),
            ));
        }
        if c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "coefficients must be finite".into(),
            ));
        }
        Ok(Self { c })
    }

    pub fn zeros(k_max: usize) -> Self {
        Self {
            c: vec![Complex64::new(0.0, 0.0); k_max + 1],
        }
    }

    /// `e_k` itself, as a coefficient vector of length `k_max + 1`.
    pub fn unit(k_max: usize, k: usize) -> Self {
        let mut s = Self::zeros(k_max);
        s.c[k] = Complex64::new(1.0, 0.0);
        s
    }

    /// Truncation index `K`.
    pub fn k_max(&self) -> usize {
        self.c.len() - 1
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.c
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.c
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.c
    }

    /// `Σ |c_k|²`.
    pub fn mass(&self) -> f64 {
        self.c.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Keep modes `0..=k_max`, padding with zeros if needed.
    pub fn resized(&self, k_max: usize) -> Self {
        let mut c = self.c.clone();
        c.resize(k_max + 1, Complex64::new(0.0, 0.0));
        Self { c }
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        Self {
            c: self.c.iter().map(|v| v * a).collect(),
        }
    }

    /// Euclidean distance between coefficient vectors of equal length.
    pub fn distance(&self, other: &Self) -> f64 {
        self.c
            .iter()
            .zip(&other.c)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Point value `Σ c_k e_k` at squared radius `z`.
    pub fn eval_at_z(&self, z: f64) -> Result<Complex64> {
        let basis = eigenfunctions_of_z(self.k_max(), z)?;
        Ok(self.c.iter().zip(&basis).map(|(c, b)| c * b).sum())
    }
}

impl std::ops::Index<usize> for SpectralCoefficients {
    type Output = Complex64;
    fn index(&self, k: usize) -> &Complex64 {
        &self.c[k]
    }
}

/// Field values at the nodes of a radial grid.
#[derive(Debug, Clone)]
pub struct GridField {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
}

impl GridField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "grid has {} nodes but {} values were supplied",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Sample `f(z)` at every node.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&z| f(z)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Pointwise product with another field on the same grid.
    pub fn mul(&self, other: &GridField) -> Result<GridField> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.nodes() != other.grid.nodes() {
            return Err(Error::InvalidParameter(
                "fields live on different grids".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(GridField {
            grid: self.grid.clone(),
            values,
        })
    }

    /// `∫_{ℝ²} |u|² dx` by the grid quadrature.
    pub fn l2_norm_sq(&self) -> f64 {
        PI * self
            .values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| w * v.norm_sqr())
            .sum::<f64>()
    }
}

/// Cached basis matrix `e_k(z_i)` for repeated transforms on one grid.
#[derive(Debug, Clone)]
pub struct SpectralTransform {
    grid: Arc<RadialGrid>,
    k_max: usize,
    // row-major: node i, mode k
    basis: Vec<f64>,
    // row-major: mode k, node i
    basis_by_mode: Vec<f64>,
    // π·W_i
    plane_weights: Vec<f64>,
}

impl SpectralTransform {
    /// Requires the underlying rule to be exact to degree `2K`.
    pub fn new(grid: Arc<RadialGrid>, k_max: usize) -> Result<Self> {
        let available = grid.rule().exact_degree();
        if available < 2 * k_max {
            return Err(Error::InsufficientDegree {
                required: 2 * k_max,
                available,
            });
        }
        Ok(Self::new_unchecked(grid, k_max))
    }

    /// Build without the degree check (for deliberately under-resolved grids).
    pub fn new_unchecked(grid: Arc<RadialGrid>, k_max: usize) -> Self {
        let n = grid.len();
        let mut basis = Vec::with_capacity(n * (k_max + 1));
        for &z in grid.nodes() {
            basis.extend(eigenfunctions_of_z(k_max, z).expect("grid nodes are nonnegative"));
        }
        let mut basis_by_mode = vec![0.0; basis.len()];
        for i in 0..n {
            for k in 0..=k_max {
                basis_by_mode[k * n + i] = basis[i * (k_max + 1) + k];
            }
        }
        let plane_weights = grid.weights().iter().map(|w| PI * w).collect();
        Self {
            grid,
            k_max,
            basis,
            basis_by_mode,
            plane_weights,
        }
    }

    /// `π·W_i`, the weights for `∫_{ℝ²} F(|x|²) dx`.
    pub fn plane_weights(&self) -> &[f64] {
        &self.plane_weights
    }

    /// Node values of `Σ c_k e_k` written into `out`, without allocation.
    pub fn synthesize_into(&self, coeffs: &[Complex64], out: &mut [Complex64]) {
        let n = self.grid.len();
        assert_eq!(coeffs.len(), self.k_max + 1);
        assert_eq!(out.len(), n);
        out.fill(Complex64::new(0.0, 0.0));
        for (c, col) in coeffs.iter().zip(self.basis_by_mode.chunks_exact(n)) {
            for (o, b) in out.iter_mut().zip(col) {
                o.re += c.re * b;
                o.im += c.im * b;
            }
        }
    }

    /// Coefficients `c_k = Σ_i πW_i e_k(z_i) v_i` written into `out`.
    pub fn analyze_into(&self, values: &[Complex64], out: &mut [Complex64]) {
        let stride = self.k_max + 1;
        assert_eq!(values.len(), self.grid.len());
        assert_eq!(out.len(), stride);
        out.fill(Complex64::new(0.0, 0.0));
        for ((row, v), w) in self
            .basis
            .chunks_exact(stride)
            .zip(values)
            .zip(&self.plane_weights)
        {
            let (re, im) = (v.re * w, v.im * w);
            for (o, b) in out.iter_mut().zip(row) {
                o.re += re * b;
                o.im += im * b;
            }
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `e_k(z_i)`.
    pub fn basis_value(&self, node: usize, k: usize) -> f64 {
        self.basis[node * (self.k_max + 1) + k]
    }

    pub fn synthesize(&self, coeffs: &SpectralCoefficients) -> Result<GridField> {
        if coeffs.k_max() != self.k_max {
            return Err(Error::InvalidParameter(format!(
                "transform has K = {}, coefficients have K = {}",
                self.k_max,
                coeffs.k_max()
            )));
        }
        let mut values = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        self.synthesize_into(coeffs.as_slice(), &mut values);
        Ok(GridField {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn analyze(&self, field: &GridField) -> Result<SpectralCoefficients> {
        if field.values.len() != self.grid.len() {
            return Err(Error::InvalidParameter(
                "field does not match the transform grid".into(),
            ));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); self.k_max + 1];
        self.analyze_into(&field.values, &mut c);
        Ok(SpectralCoefficients { c })
    }
}

impl SpectralTransform {
    /// `max_{j,k} |Σ_i πW_i e_j(z_i) e_k(z_i) − δ_{jk}|` on this grid.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.grid.len();
        let cols: Vec<&[f64]> = self.basis_by_mode.chunks_exact(n).collect();
        (0..=self.k_max)
            .into_par_iter()
            .map(|j| {
                let mut worst: f64 = 0.0;
                for k in j..=self.k_max {
                    let g: f64 = cols[j]
                        .iter()
                        .zip(cols[k])
                        .zip(&self.plane_weights)
                        .map(|((a, b), w)| a * b * w)
                        .sum();
                    let target = if j == k { 1.0 } else { 0.0 };
                    worst = worst.max((g - target).abs());
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Orthonormality defect of `e_0 … e_K` under an `n`-node rule with decay 1.
pub fn orthonormality_defect(k_max: usize, n_nodes: usize) -> Result<f64> {
    let grid = Arc::new(RadialGrid::with_size(n_nodes, 1.0)?);
    Ok(SpectralTransform::new(grid, k_max)?.orthonormality_defect())
}

/// Values `Σ_k c_k e_k(√z_i)` at the nodes of `grid`.
pub fn synthesize(coeffs: &SpectralCoefficients, grid: &Arc<RadialGrid>) -> Result<GridField> {
    SpectralTransform::new(grid.clone(), coeffs.k_max())?.synthesize(coeffs)
}

/// Coefficients `c_k = ∫ u e_k dx` for `k ≤ K` by the field's grid quadrature.
///
/// Exact when `u(z)·e_k(z)·e^{λz}` is a polynomial of degree at most the rule's
/// exact degree, `λ` being the grid decay (for `λ = 1`, band-limited fields).
pub fn analyze(field: &GridField, k_max: usize) -> Result<SpectralCoefficients> {
    SpectralTransform::new(field.grid.clone(), k_max)?.analyze(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, decay: f64) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::with_size(n, decay).unwrap())
    }

    #[test]
    fn ground_state_synthesis() {
        let g = grid(10, 1.0);
        let f = synthesize(&SpectralCoefficients::unit(3, 0), &g).unwrap();
        for (v, z) in f.values().iter().zip(g.nodes()) {
            assert!((v.re - (-z / 2.0).exp() / PI.sqrt()).abs() < 1e-15);
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn unit_vector_analysis() {
        let g = grid(12, 1.0);
        let f = GridField::from_fn(g.clone(), |z| {
            Complex64::new(
                crate::basis::laguerre::eigenfunction_of_z(3, z).unwrap(),
                0.0,
            )
        });
        let c = analyze(&f, 8).unwrap();
        for k in 0..=8 {
            let expect = if k == 3 { 1.0 } else { 0.0 };
            assert!((c[k].re - expect).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn degree_shortfall_names_required_degree() {
        let g = grid(4, 1.0);
        let err = synthesize(&SpectralCoefficients::zeros(5), &g).unwrap_err();
        match err {
            Error::InsufficientDegree {
                required,
                available,
            } => {
                assert_eq!(required, 10);
                assert_eq!(available, 7);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_finite_coefficients() {
        assert!(SpectralCoefficients::new(vec![Complex64::new(f64::NAN, 0.0)]).is_err());
        assert!(SpectralCoefficients::new(vec![]).is_err());
    }
}
