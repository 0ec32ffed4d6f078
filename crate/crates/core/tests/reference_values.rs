//! Weighted Laguerre values against a 60-digit reference table, plus exact
//! rational evaluation of the low orders.

use std::path::PathBuf;

use harmonic_gibbs::basis::laguerre::{weighted_laguerre, weighted_laguerre_ln};
use harmonic_gibbs::quadrature::kappa::laguerre_coefficients;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
struct Row {
    k: usize,
    z: f64,
    value: f64,
    ln_abs: String,
    sign: i32,
}

fn table() -> Vec<Row> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("golden/weighted_laguerre.csv");
    csv::Reader::from_path(path)
        .expect("reference table present")
        .deserialize()
        .collect::<Result<_, _>>()
        .expect("reference table parses")
}

#[test]
fn log_magnitudes_match_reference() {
    let rows = table();
    assert!(rows.len() > 300);
    for row in rows.iter().filter(|r| r.sign != 0) {
        let want: f64 = row.ln_abs.parse().unwrap();
        let got = weighted_laguerre_ln(row.k, row.z).unwrap();
        assert_eq!(got.sign, row.sign as f64, "sign at k={} z={}", row.k, row.z);
        // absolute error in ln|·| is relative error in the value; the recurrence
        // loses about one ulp per order, so allow growth with k
        let tol = 1e-13 * (1.0 + row.k as f64) * want.abs().max(1.0);
        assert!(
            (got.ln_abs - want).abs() < tol,
            "k={} z={}: {} vs {}",
            row.k,
            row.z,
            got.ln_abs,
            want
        );
    }
}

#[test]
fn representable_values_match_reference() {
    for row in table().iter().filter(|r| r.value.abs() > 1e-280) {
        let got = weighted_laguerre(row.k, row.z).unwrap();
        let scale = (-row.z / 2.0).exp().max(row.value.abs());
        assert!(
            (got - row.value).abs() <= 1e-12 * (1.0 + row.k as f64) * scale,
            "k={} z={}: {got} vs {}",
            row.k,
            row.z,
            row.value
        );
    }
}

#[test]
fn low_orders_match_exact_polynomials() {
    // exact rational coefficients of L_k, evaluated at the binary value of z
    for k in 0..=8 {
        let coeffs = laguerre_coefficients(k);
        for i in 0..=200 {
            let z = i as f64 * 0.25;
            let zq = BigRational::from_float(z).unwrap();
            let mut acc = BigRational::from_integer(0.into());
            for c in coeffs.iter().rev() {
                acc = acc * &zq + c;
            }
            let poly = acc.to_f64().unwrap();
            let want = (-z / 2.0).exp() * poly;
            let got = weighted_laguerre(k, z).unwrap();
            let scale = (-z / 2.0).exp()
                * coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c.to_f64().unwrap().abs() * z.powi(j as i32))
                    .sum::<f64>();
            assert!(
                (got - want).abs() <= 1e-12 * scale.max(want.abs()),
                "k={k} z={z}: {got} vs {want}"
            );
        }
    }
}
