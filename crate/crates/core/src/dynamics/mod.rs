//! Master-equation propagation and two-time correlation grids.

mod calibrate;
mod correlation;
mod evolve;
mod grid;
pub mod io;
mod moments;
mod propagate;

pub use calibrate::{calibrate_amplitude, calibrate_to_target, mean_photons_at, Calibration, CALIBRATION_TOL};
pub use correlation::{
    g1_grid, g1_grid_from, g2_grid, g2_grid_from, two_time_grid, two_time_grid_from, CorrelationGrid, CorrelationKind,
};
pub use evolve::{
    emission_flux, evolve, evolve_with, expectation, mean_photon_number, recommended_grid, recommended_grid_until,
    MAX_RECOMMENDED_POINTS,
};
pub use grid::{Hygiene, StateTrajectory, TimeGrid};
pub use moments::{exact_moments, ExactMoments};
pub use propagate::{PropagationOptions, Propagator, Workspace};
