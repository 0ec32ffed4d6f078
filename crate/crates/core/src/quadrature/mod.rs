//! Radial Gauss rules, spectral transforms, and multilinear eigenfunction integrals.

pub mod kappa;
pub mod legendre;
pub mod power;
pub mod rule;
pub mod transform;
pub mod tridiagonal;

pub use kappa::{
    kappa_decay_report, kappa_exact, multilinear_kappa, KappaEvaluator, KappaSampleSpec,
};
pub use legendre::GaussLegendre;
pub use power::PowerNorm;
pub use rule::{build_rule, radial_integral, size_for_degree, QuadratureRule, RadialGrid};
pub use transform::{
    analyze, orthonormality_defect, synthesize, GridField, SpectralCoefficients, SpectralTransform,
};
