//! Galerkin-truncated flows, their integrators, and statistical checks on them.

pub mod checks;
pub mod evolve;
pub mod flow;
pub mod invariance;

pub use checks::*;
pub use evolve::{
    evolve, step_count, step_doubling_order, ConservationReport, OrderEstimate, Trajectory,
    TrajectoryPoint,
};
pub use flow::{
    projected_nonlinearity, Flow, FlowConfig, FlowState, Integrator, TimeFactor, Workspace,
};
pub use invariance::*;
