use super::grid::{StateTrajectory, TimeGrid};
use super::propagate::{PropagationOptions, Propagator};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::model::SourceSystem;

/// Largest grid the recommended-grid helper will produce.
pub const MAX_RECOMMENDED_POINTS: usize = 4001;

/// Uniform grid over `[0, default_window_end]` whose spacing resolves the
/// decay rates, the detuning and the pulse envelopes (a quarter of the
/// pulse width), capped at [`MAX_RECOMMENDED_POINTS`].
pub fn recommended_grid(s: &SourceSystem) -> Result<TimeGrid> {
    recommended_grid_until(s, s.default_window_end())
}

pub fn recommended_grid_until(s: &SourceSystem, t_end: f64) -> Result<TimeGrid> {
    let gamma_total: f64 = s.channels().iter().filter_map(|c| c.rate.constant_value()).sum();
    let delta = s.h_static().matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut dt = 0.05 / gamma_total.max(1.0);
    if delta > 0.0 {
        dt = dt.min(0.1 / delta);
    }
    for (_, _, step) in s.active_windows() {
        dt = dt.min(step);
    }
    let n = ((t_end / dt).ceil() as usize + 1).clamp(TimeGrid::MIN_POINTS, MAX_RECOMMENDED_POINTS);
    TimeGrid::new(0.0, t_end, n)
}

/// Solves the master equation from `rho0` and samples `ρ(t_k)` on the grid.
pub fn evolve(s: &SourceSystem, g: &TimeGrid) -> Result<StateTrajectory> {
    evolve_with(s, g, PropagationOptions::default())
}

pub fn evolve_with(s: &SourceSystem, g: &TimeGrid, opts: PropagationOptions) -> Result<StateTrajectory> {
    let prop = Propagator::new(s, opts).with_step(g.dt());
    let mut ws = prop.workspace();
    let d = s.dim();
    let mut y = linalg::vectorize(s.rho0());
    let mut states = Vec::with_capacity(g.len());
    states.push(s.rho0().clone());
    for k in 1..g.len() {
        prop.advance(&mut ws, g.time(k - 1), g.time(k), &mut y)?;
        states.push(linalg::unvectorize(&y, d));
    }
    let traj = StateTrajectory { grid: *g, states };
    let h = traj.hygiene();
    if !h.is_clean() {
        return Err(Error::IntegrationFailure(format!(
            "state invariants violated: trace error {:e}, hermiticity {:e}, min eigenvalue {:e}",
            h.max_trace_error, h.max_hermiticity_error, h.min_eigenvalue
        )));
    }
    Ok(traj)
}

/// `Tr(op·ρ)`.
pub fn expectation(op: &CMatrix, rho: &CMatrix) -> Result<C64> {
    if op.nrows() != rho.nrows() || op.ncols() != rho.ncols() || op.nrows() != op.ncols() {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), found: op.nrows() });
    }
    Ok(linalg::trace(&(op * rho)))
}

/// Emitted photon flux `γ(t)⟨a†a⟩(t)` of the monitored channel on the grid.
pub fn emission_flux(s: &SourceSystem, traj: &StateTrajectory) -> Vec<f64> {
    let a = s.emission().operator.matrix();
    let n_op = a.adjoint() * a;
    traj.states
        .iter()
        .enumerate()
        .map(|(k, rho)| s.emission_rate_at(traj.grid.time(k)) * linalg::trace(&(&n_op * rho)).re)
        .collect()
}

/// `⟨M̂(T)⟩`, the trapezoidal integral of the emitted flux.
pub fn mean_photon_number(s: &SourceSystem, traj: &StateTrajectory) -> f64 {
    traj.grid.trapezoid(&emission_flux(s, traj))
}
