//! One parameter record per subcommand, each with its experiment.

mod basis;
mod dynamics;
mod lens;
mod random;

pub use basis::{BasisCheck, KappaDecay, LocalizedDivergence};
pub use dynamics::{GibbsBuild, Invariance, Monotonicity};
pub use lens::{LensCheck, Scattering};
pub use random::{Chaos, SampleStats, Tails};
