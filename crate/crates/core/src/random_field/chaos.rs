//! Multilinear Gaussian sums `S = Σ_{n ∈ Ξ} δ_n w_{n_1}^{±} ⋯ w_{n_l}^{±}` over
//! resonant index sets, their exact second moments, and the pairing count.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{complex_gaussian, splitmix64, RandomSeed};
use crate::stats::Moments;
use crate::{Error, Result};

/// Longest product supported by the enumerations.
pub const MAX_ORDER: usize = 5;
/// Largest leading scale supported by the enumerations.
pub const MAX_LEADING_SCALE: u64 = 1 << 9;
/// Default cap on the number of candidate tuples scanned while enumerating `Ξ`.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 50_000_000;

/// `Ξ = {(n_1, …, n_l) : 1/10 ≤ (4n_j+2)/N_j² ≤ 10, Σ ε_j (4n_j+2) = ϱ}`.
///
/// Factor `j` enters the product as `w_{n_j}` when `ε_j = +1` and as its
/// conjugate when `ε_j = -1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChaosIndexSet {
    scales: Vec<u64>,
    signs: Vec<i8>,
    rho: i64,
}

impl ChaosIndexSet {
    pub fn new(scales: Vec<u64>, signs: Vec<i8>, rho: i64) -> Result<Self> {
        if scales.is_empty() || scales.len() > MAX_ORDER {
            return Err(Error::InvalidParameter(format!(
                "need between 1 and {MAX_ORDER} factors, got {}",
                scales.len()
            )));
        }
        if signs.len() != scales.len() {
            return Err(Error::InvalidParameter(
                "one sign per scale is required".into(),
            ));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidParameter("signs must be ±1".into()));
        }
        for &n in &scales {
            if n < 2 || !n.is_power_of_two() {
                return Err(Error::NotDyadic(n as f64));
            }
        }
        if scales.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "scales must be nonincreasing".into(),
            ));
        }
        if scales[0] > MAX_LEADING_SCALE {
            return Err(Error::InvalidParameter(format!(
                "leading scale {} exceeds {MAX_LEADING_SCALE}",
                scales[0]
            )));
        }
        Ok(Self { scales, signs, rho })
    }

    pub fn order(&self) -> usize {
        self.scales.len()
    }

    pub fn scales(&self) -> &[u64] {
        &self.scales
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn rho(&self) -> i64 {
        self.rho
    }

    /// `Π_{j ≥ 2} N_j²`, the size the pairing count is compared against.
    pub fn secondary_volume(&self) -> f64 {
        self.scales[1..].iter().map(|&n| (n * n) as f64).product()
    }

    /// Indices `n` with `1/10 ≤ (4n+2)/N² ≤ 10`.
    pub fn index_range(scale: u64) -> (usize, usize) {
        let sq = (scale * scale) as i64;
        // 10(4n + 2) ≥ N²  and  4n + 2 ≤ 10 N²
        let lo = ((sq - 20).max(0) + 39) / 40;
        let hi = (10 * sq - 2) / 4;
        (lo as usize, hi as usize)
    }

    pub fn contains(&self, n: &[usize]) -> bool {
        if n.len() != self.order() {
            return false;
        }
        let mut total = 0i64;
        for ((&k, &scale), &e) in n.iter().zip(&self.scales).zip(&self.signs) {
            let (lo, hi) = Self::index_range(scale);
            if k < lo || k > hi {
                return false;
            }
            total += e as i64 * (4 * k as i64 + 2);
        }
        total == self.rho
    }

    /// Number of candidate tuples the enumeration scans: `Π_{j ≥ 2}` range sizes.
    pub fn enumeration_estimate(&self) -> u128 {
        self.scales[1..]
            .iter()
            .map(|&s| {
                let (lo, hi) = Self::index_range(s);
                (hi - lo + 1) as u128
            })
            .product()
    }

    /// All members of `Ξ`, flattened with stride `l`.
    pub fn enumerate(&self, limit: u128) -> Result<Vec<usize>> {
        let estimate = self.enumeration_estimate();
        if estimate > limit {
            return Err(Error::EnumerationTooLarge { estimate, limit });
        }
        let l = self.order();
        let ranges: Vec<(usize, usize)> =
            self.scales.iter().map(|&s| Self::index_range(s)).collect();
        let mut out = Vec::new();
        let mut tail: Vec<usize> = ranges[1..].iter().map(|r| r.0).collect();
        loop {
            let rest: i64 = tail
                .iter()
                .zip(&self.signs[1..])
                .map(|(&k, &e)| e as i64 * (4 * k as i64 + 2))
                .sum();
            // ε_1 (4 n_1 + 2) = ϱ - rest
            let lead = self.signs[0] as i64 * (self.rho - rest);
            if lead >= 2 && (lead - 2) % 4 == 0 {
                let n1 = ((lead - 2) / 4) as usize;
                if n1 >= ranges[0].0 && n1 <= ranges[0].1 {
                    out.push(n1);
                    out.extend_from_slice(&tail);
                }
            }
            // odometer over the tail indices
            let mut j = 0;
            loop {
                if j == tail.len() {
                    debug_assert_eq!(out.len() % l, 0);
                    return Ok(out);
                }
                if tail[j] < ranges[j + 1].1 {
                    tail[j] += 1;
                    break;
                }
                tail[j] = ranges[j + 1].0;
                j += 1;
            }
        }
    }
}

/// The coefficients `δ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DeltaSpec {
    Constant(Complex64),
    /// `scale · e^{iθ_n}` with `θ_n` a hash of `(seed, n)`.
    RandomPhase {
        seed: u64,
        scale: Complex64,
    },
}

impl DeltaSpec {
    pub fn value(&self, n: &[usize]) -> Complex64 {
        match *self {
            DeltaSpec::Constant(c) => c,
            DeltaSpec::RandomPhase { seed, scale } => {
                let mut h = splitmix64(seed);
                for &k in n {
                    h = splitmix64(h ^ k as u64);
                }
                let theta = 2.0 * PI * (h >> 11) as f64 / (1u64 << 53) as f64;
                scale * Complex64::from_polar(1.0, theta)
            }
        }
    }
}

/// Members of `Ξ` together with a lookup from index value to the members using it.
struct Enumerated {
    l: usize,
    tuples: Vec<usize>,
    by_value: HashMap<usize, Vec<u32>>,
}

impl Enumerated {
    fn new(set: &ChaosIndexSet, limit: u128) -> Result<Self> {
        let l = set.order();
        let tuples = set.enumerate(limit)?;
        let mut by_value: HashMap<usize, Vec<u32>> = HashMap::new();
        for (i, t) in tuples.chunks_exact(l).enumerate() {
            for (j, &v) in t.iter().enumerate() {
                // record each member once per distinct value
                if !t[..j].contains(&v) {
                    by_value.entry(v).or_default().push(i as u32);
                }
            }
        }
        Ok(Self {
            l,
            tuples,
            by_value,
        })
    }

    fn len(&self) -> usize {
        self.tuples.len() / self.l
    }

    fn tuple(&self, i: usize) -> &[usize] {
        &self.tuples[i * self.l..(i + 1) * self.l]
    }

    /// Calls `f(m)` for every `m` that could pair with `n`: some value used exactly
    /// once in `n` must reappear in `m`, so only members containing it are visited.
    fn for_each_candidate(&self, n: &[usize], mut f: impl FnMut(usize)) {
        let single = n
            .iter()
            .find(|&&v| n.iter().filter(|&&u| u == v).count() == 1);
        match single {
            Some(v) => {
                if let Some(list) = self.by_value.get(v) {
                    for &m in list {
                        f(m as usize);
                    }
                }
            }
            None => (0..self.len()).for_each(f),
        }
    }
}

fn every_value_repeated(n: &[usize], m: &[usize]) -> bool {
    let all = || n.iter().chain(m);
    all().all(|&v| all().filter(|&&u| u == v).count() >= 2)
}

/// `E[Π_j w_{n_j}^{ε_j} · conj(Π_j w_{m_j}^{ε_j})]` for independent standard complex Gaussians.
fn pairing_moment(n: &[usize], m: &[usize], signs: &[i8]) -> f64 {
    // per value: (# plain factors, # conjugated factors)
    let mut counts: Vec<(usize, u32, u32)> = Vec::with_capacity(2 * n.len());
    let mut bump = |v: usize, plain: bool| {
        let slot = match counts.iter().position(|c| c.0 == v) {
            Some(i) => i,
            None => {
                counts.push((v, 0, 0));
                counts.len() - 1
            }
        };
        if plain {
            counts[slot].1 += 1;
        } else {
            counts[slot].2 += 1;
        }
    };
    for (j, &e) in signs.iter().enumerate() {
        bump(n[j], e > 0);
        bump(m[j], e < 0);
    }
    let mut value = 1.0;
    for (_, a, b) in counts {
        if a != b {
            return 0.0;
        }
        // E|w|^{2a} = a!
        value *= (1..=a).product::<u32>() as f64;
    }
    value
}

/// `#{(n, m) ∈ Ξ × Ξ : every index value in (n, m) occurs at least twice}`.
///
/// This is the support of `E[Π w_{n_j}^{±} Π conj(w_{m_j}^{±})]` over all
/// conjugation patterns, so it bounds the number of nonzero terms in `E|S|²`.
pub fn chaos_pairing_count(set: &ChaosIndexSet) -> Result<u64> {
    chaos_pairing_count_with_limit(set, DEFAULT_ENUMERATION_LIMIT)
}

pub fn chaos_pairing_count_with_limit(set: &ChaosIndexSet, limit: u128) -> Result<u64> {
    let xi = Enumerated::new(set, limit)?;
    Ok((0..xi.len())
        .into_par_iter()
        .map(|i| {
            let n = xi.tuple(i);
            let mut count = 0u64;
            xi.for_each_candidate(n, |j| {
                if every_value_repeated(n, xi.tuple(j)) {
                    count += 1;
                }
            });
            count
        })
        .sum())
}

/// Size of `Ξ`.
pub fn index_set_size(set: &ChaosIndexSet) -> Result<usize> {
    Ok(set.enumerate(DEFAULT_ENUMERATION_LIMIT)?.len() / set.order())
}

/// `E|S|²` by the pairing expansion.
pub fn chaos_exact_second_moment(set: &ChaosIndexSet, delta: &DeltaSpec) -> Result<f64> {
    let xi = Enumerated::new(set, DEFAULT_ENUMERATION_LIMIT)?;
    let deltas: Vec<Complex64> = (0..xi.len()).map(|i| delta.value(xi.tuple(i))).collect();
    let total: Complex64 = (0..xi.len())
        .into_par_iter()
        .map(|i| {
            let n = xi.tuple(i);
            let mut acc = Complex64::new(0.0, 0.0);
            xi.for_each_candidate(n, |j| {
                let d = pairing_moment(n, xi.tuple(j), set.signs());
                if d != 0.0 {
                    acc += deltas[i] * deltas[j].conj() * d;
                }
            });
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(total.re)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChaosMomentReport {
    pub set: ChaosIndexSet,
    pub index_set_size: usize,
    pub exact: f64,
    pub monte_carlo: f64,
    pub standard_error: f64,
    pub n_samples: usize,
    pub within_three_se: bool,
    /// `E|S|² / Π_{j ≥ 2} N_j²`.
    pub normalized_exact: f64,
}

/// Exact `E|S|²` and a Monte Carlo estimate from `n_samples` draws of the `w_n`.
pub fn chaos_sum_second_moment(
    set: &ChaosIndexSet,
    delta: &DeltaSpec,
    n_samples: usize,
    seed: RandomSeed,
) -> Result<ChaosMomentReport> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let exact = chaos_exact_second_moment(set, delta)?;
    let l = set.order();
    let tuples = set.enumerate(DEFAULT_ENUMERATION_LIMIT)?;
    let size = tuples.len() / l;
    // draw only the Gaussians that occur, in a fixed order
    let mut distinct: Vec<usize> = tuples.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let slot: HashMap<usize, usize> = distinct.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let positions: Vec<usize> = tuples.iter().map(|v| slot[v]).collect();
    let deltas: Vec<Complex64> = tuples.chunks_exact(l).map(|t| delta.value(t)).collect();
    let signs = set.signs().to_vec();
    // per-sample values are collected in order so the accumulation does not
    // depend on how the work was split across threads
    let values: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(distinct.len()),
            |w, i| {
                let mut rng = seed.member(i).rng();
                w.clear();
                w.extend((0..distinct.len()).map(|_| complex_gaussian(&mut rng)));
                let mut s = Complex64::new(0.0, 0.0);
                for (pos, d) in positions.chunks_exact(l).zip(&deltas) {
                    let mut prod = *d;
                    for (&p, &e) in pos.iter().zip(&signs) {
                        prod *= if e > 0 { w[p] } else { w[p].conj() };
                    }
                    s += prod;
                }
                s.norm_sqr()
            },
        )
        .collect();
    let mut moments = Moments::default();
    values.iter().for_each(|&v| moments.push(v));
    let monte_carlo = moments.mean();
    let standard_error = moments.standard_error();
    Ok(ChaosMomentReport {
        set: set.clone(),
        index_set_size: size,
        exact,
        monte_carlo,
        standard_error,
        n_samples,
        within_three_se: (exact - monte_carlo).abs() <= 3.0 * standard_error,
        normalized_exact: exact / set.secondary_volume(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairingBound {
    pub rho: i64,
    pub index_set_size: usize,
    pub count: u64,
    /// `count / Π_{j ≥ 2} N_j²`.
    pub ratio: f64,
}

/// Pairing counts over several `ϱ` with fixed scales and signs.
pub fn pairing_count_sweep(
    scales: &[u64],
    signs: &[i8],
    rhos: &[i64],
) -> Result<Vec<PairingBound>> {
    rhos.iter()
        .map(|&rho| {
            let set = ChaosIndexSet::new(scales.to_vec(), signs.to_vec(), rho)?;
            let count = chaos_pairing_count(&set)?;
            Ok(PairingBound {
                rho,
                index_set_size: index_set_size(&set)?,
                count,
                ratio: count as f64 / set.secondary_volume(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_ranges() {
        // N = 8: 6.4 ≤ 4n + 2 ≤ 640
        assert_eq!(ChaosIndexSet::index_range(8), (2, 159));
        // N = 2: 0.4 ≤ 4n + 2 ≤ 40
        assert_eq!(ChaosIndexSet::index_range(2), (0, 9));
    }

    #[test]
    fn construction_checks() {
        assert!(ChaosIndexSet::new(vec![8, 16], vec![1, 1], 0).is_err());
        assert!(ChaosIndexSet::new(vec![12], vec![1], 0).is_err());
        assert!(ChaosIndexSet::new(vec![1024], vec![1], 0).is_err());
        assert!(ChaosIndexSet::new(vec![8; 6], vec![1; 6], 0).is_err());
        assert!(ChaosIndexSet::new(vec![8], vec![2], 0).is_err());
    }

    #[test]
    fn enumeration_matches_membership() {
        let set = ChaosIndexSet::new(vec![8, 4], vec![1, -1], 40).unwrap();
        let xi = set.enumerate(u128::MAX).unwrap();
        assert!(!xi.is_empty());
        for t in xi.chunks_exact(2) {
            assert!(set.contains(t));
        }
        let (lo0, hi0) = ChaosIndexSet::index_range(8);
        let (lo1, hi1) = ChaosIndexSet::index_range(4);
        let brute = (lo0..=hi0)
            .flat_map(|a| (lo1..=hi1).map(move |b| [a, b]))
            .filter(|t| set.contains(t))
            .count();
        assert_eq!(brute, xi.len() / 2);
    }

    #[test]
    fn pairing_count_matches_all_pairs() {
        let set = ChaosIndexSet::new(vec![8, 4, 2], vec![1, -1, 1], 98).unwrap();
        let xi = set.enumerate(u128::MAX).unwrap();
        let tuples: Vec<&[usize]> = xi.chunks_exact(3).collect();
        let brute = tuples
            .iter()
            .flat_map(|n| tuples.iter().map(move |m| (*n, *m)))
            .filter(|(n, m)| every_value_repeated(n, m))
            .count() as u64;
        assert!(brute > tuples.len() as u64);
        assert_eq!(chaos_pairing_count(&set).unwrap(), brute);
    }

    #[test]
    fn oversized_enumeration_reports_estimate() {
        let set = ChaosIndexSet::new(vec![512, 512, 512], vec![1, 1, -1], 2).unwrap();
        match set.enumerate(1000) {
            Err(Error::EnumerationTooLarge { estimate, limit }) => {
                assert!(estimate > 1000);
                assert_eq!(limit, 1000);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn moment_of_repeated_index() {
        // E|w|⁴ = 2
        assert_eq!(pairing_moment(&[3, 3], &[3, 3], &[1, 1]), 2.0);
        assert_eq!(pairing_moment(&[3, 4], &[4, 3], &[1, 1]), 1.0);
        assert_eq!(pairing_moment(&[3, 4], &[3, 5], &[1, 1]), 0.0);
        // w_3 conj(w_3) paired against itself: E|w|⁴ = 2
        assert_eq!(pairing_moment(&[3, 3], &[3, 3], &[1, -1]), 2.0);
    }

    #[test]
    fn zero_coefficients_give_zero() {
        let set = ChaosIndexSet::new(vec![8, 8], vec![1, -1], 0).unwrap();
        let v = chaos_exact_second_moment(&set, &DeltaSpec::Constant(Complex64::new(0.0, 0.0)))
            .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn single_factor_is_sum_of_squares() {
        let set = ChaosIndexSet::new(vec![8], vec![1], 42).unwrap();
        let d = DeltaSpec::RandomPhase {
            seed: 3,
            scale: Complex64::new(0.5, 0.0),
        };
        let v = chaos_exact_second_moment(&set, &d).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }
}
