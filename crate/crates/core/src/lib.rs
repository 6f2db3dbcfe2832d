//! Simulation engine for pulsed single-photon sources: master-equation
//! dynamics, two-time correlation grids, pulse-wise interferometric
//! observables and a quantum-jump Monte Carlo cross-check.

pub mod coherence;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod trajectories;

pub use dynamics::{CorrelationGrid, CorrelationKind, StateTrajectory, TimeGrid};
pub use error::{Error, Result};
pub use linalg::{CMatrix, Operator, C64};
pub use model::{CollapseChannel, Liouvillian, PulseEnvelope, Rate, SourceSystem};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
