//! Eigenvalues of a real symmetric tridiagonal matrix by implicit QL iteration.

use crate::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off[i]` couples rows `i` and `i + 1`).
///
/// Eigenvalues only, so the cost is `O(n²)`.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::InvalidParameter(format!(
            "off-diagonal must have length {}, got {}",
            n - 1,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::InvalidParameter(
                    "tridiagonal QL iteration failed to converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = (g * g + 1.0).sqrt();
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3
        let ev = symmetric_tridiagonal_eigenvalues(&[2.0, 2.0], &[1.0]).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14);
        assert!((ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        // tridiag(-1, 2, -1) of size n: 2 - 2cos(jπ/(n+1))
        let n = 50;
        let ev = symmetric_tridiagonal_eigenvalues(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        for (j, v) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "{j}: {v} vs {exact}");
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(symmetric_tridiagonal_eigenvalues(&[1.0, 2.0], &[]).is_err());
    }
}
