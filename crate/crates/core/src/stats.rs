//! Small statistics helpers shared by the experiments.

use serde::{Deserialize, Serialize};

/// Least-squares line `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let w = vec![1.0; x.len()];
    weighted_linear_fit(x, y, &w)
}

/// Weighted least squares; `r_squared` is the weighted coefficient of determination.
pub fn weighted_linear_fit(x: &[f64], y: &[f64], w: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    assert_eq!(x.len(), w.len());
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Sample mean and its standard error.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Streaming accumulator for mean and variance (Welford), mergeable across workers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(mut self, other: Moments) -> Moments {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.mean += d * other.count as f64 / n;
        self.count += other.count;
        self
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        self.m2 / (self.count - 1) as f64
    }

    pub fn standard_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let fit = linear_fit(&x, &y);
        assert!((fit.slope - 2.0).abs() < 1e-14);
        assert!((fit.intercept + 1.0).abs() < 1e-14);
        assert!((fit.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 7.25, 0.5];
        let mut a = Moments::default();
        let mut b = Moments::default();
        for (i, &x) in xs.iter().enumerate() {
            if i < 2 {
                a.push(x)
            } else {
                b.push(x)
            }
        }
        let m = a.merge(b);
        let (mean, se) = mean_and_se(&xs);
        assert!((m.mean() - mean).abs() < 1e-14);
        assert!((m.standard_error() - se).abs() < 1e-14);
    }
}
