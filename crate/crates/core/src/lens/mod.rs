//! Lens transform, exact free evolution, and cross-checks against the truncated flow.

pub mod checks;
pub mod free;
pub mod transform;

pub use checks::{
    lens_flow_consistency_check, propagator_conjugation_check, scattering_cauchy_check,
    ConjugationPoint, ConjugationReport, LensConsistencyReport, LensConsistencySpec,
    ScatteringReport, ScatteringSpec,
};
pub use free::{free_evolved, free_evolved_eigenfunction, free_gaussian};
pub use transform::{
    lens_forward_eval, lens_inverse_eval, LensTime, RadialProfile, DEFAULT_MARGIN,
};
