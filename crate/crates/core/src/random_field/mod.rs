//! Gaussian free-field data, its Sobolev statistics, large-deviation tails, and
//! second moments of Gaussian chaos sums.

pub mod chaos;
pub mod sampling;
pub mod tails;

pub use chaos::{chaos_pairing_count, chaos_sum_second_moment, ChaosIndexSet, DeltaSpec};
pub use sampling::{
    alpha, complex_gaussian, regularity_dichotomy, sample_free_field, sobolev_norm_sq,
    FreeFieldSample, RandomSeed,
};
pub use tails::{tail_exceedance_curve, TailCurve, TailSpec};
