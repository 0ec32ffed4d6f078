//! Frozen fitted constants.
//!
//! The estimates these constants belong to are stated up to unspecified
//! constants. The values below were fitted once with the default sweeps and are
//! frozen with a little headroom so later runs can be checked against them.

/// Exterior decay rate `c` in `|𝓛_k(z)| ≲ e^{-cz}` for `z ≥ 3ν/2`; the sampled
/// admissible rate over `k ≤ 1024` is `0.0699`.
pub const ENVELOPE_DECAY_RATE: f64 = 0.062;

/// Envelope constant bounding all four regions for `k ≤ 1024` at
/// [`ENVELOPE_DECAY_RATE`]; fitted `1.0347`, attained in the transition region at `k = 1`.
pub const ENVELOPE_CONSTANT: f64 = 1.05;

/// Bound on `|κ| ν_1^{1/2} ν_3^{1/4} / ln ν_1` over 200 sampled 5-tuples with
/// leading index `≤ 256`; fitted `0.02117`.
pub const KAPPA_LOG_CONSTANT: f64 = 0.025;

/// Bound on `|κ| ν_1^{10}` over the separated families (`ν_1 ≥ ν_2²`); fitted `1.052e17`.
pub const KAPPA_SEPARATED_CONSTANT: f64 = 1.1e17;

/// `count / Π_{j≥2} N_j²` for the pairing count at `N = (256, 8, 8)` away from
/// the edges of the `ϱ` range: exactly `49770 / 4096`, for every sign pattern.
pub const PAIRING_RATIO: f64 = 12.150_878_906_25;

/// Target stated for the pairing ratio, which the enumeration exceeds.
pub const PAIRING_RATIO_TARGET: f64 = 10.0;
