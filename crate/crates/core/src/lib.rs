//! Finite-dimensional phase space for a single qudit: clock and shift
//! operators, the Harper operator and its Perron eigenvector, minimum
//! uncertainty states, quasi-probability distributions, completeness of
//! the induced coherent states, and large-d asymptotics.

pub mod asymptotics;
pub mod completeness;
mod error;
pub mod harper;
pub mod linalg;
pub mod quasiprob;
pub mod qudit;
pub mod sampling;
pub mod uncertainty;

pub use error::{Error, Result};
pub use harper::{build_harper, ground_pair_dense, ground_pair_power, harper_ground_pair, GroundPair};
pub use quasiprob::{PhasePointKind, QuasiDistribution};
pub use qudit::{build_context, dft, periodic_index, Basis, DensityMatrix, QuditContext, StateVector};
pub use uncertainty::{certainty, certainty_mixed, maximize_certainty, OptimizerConfig};
