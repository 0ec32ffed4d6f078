//! Gibbs measures as importance weights over the free field: densities,
//! weighted ensembles, and convergence of the truncated densities.

pub mod density;
pub mod diagnostic;
pub mod ensemble;

pub use density::{
    defocusing_weight, focusing_weight, lp1_norm_powered, GibbsConfig, GibbsDensity, Sign,
    Trapezoid,
};
pub use diagnostic::{density_convergence_diagnostic, density_convergence_for, ConvergenceReport};
pub use ensemble::{
    build_ensemble, effective_sample_size, self_normalized, EnsembleMember, EnsembleSummary,
    WeightedEnsemble, MIN_EFFECTIVE_SAMPLE_SIZE,
};
