//! Radial Hermite eigenfunctions, their estimates, and related kernels.

pub mod asymptotic;
pub mod cutoff;
pub mod envelope;
pub mod laguerre;
pub mod mehler;
pub mod norms;

pub use asymptotic::{
    divergence_partial_sums, divergence_report, localized_l1_norm, oscillatory_asymptotic_error,
    zero_phase_offsets, AnnulusWindow,
};
pub use cutoff::{littlewood_paley_weight, CutoffProfile, DyadicScale, SmoothStep};
pub use envelope::{pointwise_envelope_check, EnvelopeReport};
pub use laguerre::{
    eigenfunction, eigenvalue, weighted_laguerre, weighted_laguerre_all, BasisIndex, LaguerreSweep,
};
pub use mehler::{mehler_kernel, mehler_spectral_check};
pub use norms::{
    geometric_indices, l4_log_check, lp_norm, lq_decay_exponent, lq_scaling_fit, sup_norm,
    LqScalingFit,
};
