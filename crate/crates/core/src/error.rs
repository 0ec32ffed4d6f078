use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("exponent q = {0} is not supported; norms are defined here for q >= 2 only")]
    UnsupportedExponent(f64),

    #[error("N = {0} is not a dyadic scale (N^2 must be a power of two, N >= 2)")]
    NotDyadic(f64),

    #[error("quadrature rule is exact to degree {available}, but degree {required} is required")]
    InsufficientDegree { required: usize, available: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration too large: about {estimate} tuples (limit {limit})")]
    EnumerationTooLarge { estimate: u128, limit: u128 },

    #[error("all importance weights vanish")]
    DegenerateWeights,

    #[error("effective sample size {ess:.1} is below the required {required}")]
    InsufficientSampleSize { ess: f64, required: f64 },

    #[error("non-finite state encountered at step {step}")]
    NonFinite { step: u64 },

    #[error("integrator drift {drift:.3e} exceeds the tolerance {tolerance:.3e}")]
    DriftExceeded { drift: f64, tolerance: f64 },

    #[error("time {0} lies outside the open interval (-pi/4, pi/4)")]
    LensDomain(f64),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
