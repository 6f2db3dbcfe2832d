use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Uniform time grid `t_k = t_start + k·dt`, `k = 0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n: usize,
}

impl TimeGrid {
    pub const MIN_POINTS: usize = 16;

    pub fn new(t_start: f64, t_end: f64, n: usize) -> Result<Self> {
        if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidGrid(format!("need t_end > t_start, got [{t_start}, {t_end}]")));
        }
        if n < Self::MIN_POINTS {
            return Err(Error::InvalidGrid(format!("need at least {} points, got {n}", Self::MIN_POINTS)));
        }
        Ok(Self { t_start, t_end, n })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }
    pub fn t_end(&self) -> f64 {
        self.t_end
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n - 1) as f64
    }
    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.n {
            self.t_end
        } else {
            self.t_start + k as f64 * self.dt()
        }
    }
    pub fn times(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.time(k)).collect()
    }

    /// Same spacing with twice the resolution (`2n − 1` points).
    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n - 1, ..*self }
    }

    /// True when both grids share start, spacing and length.
    pub fn matches(&self, other: &Self) -> bool {
        self.n == other.n
            && (self.t_start - other.t_start).abs() <= 1e-12 * self.dt()
            && (self.dt() - other.dt()).abs() <= 1e-12 * self.dt()
    }

    /// Trapezoidal weights.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.dt();
        (0..self.n).map(|k| if k == 0 || k + 1 == self.n { 0.5 * h } else { h }).collect()
    }

    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.n);
        self.weights().iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Density matrices sampled on a grid.
#[derive(Clone, Debug)]
pub struct StateTrajectory {
    pub grid: TimeGrid,
    pub states: Vec<CMatrix>,
}

/// Worst deviations found in a trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Hygiene {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl Hygiene {
    pub const TRACE_TOL: f64 = 1e-8;
    pub const HERMITICITY_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-8;

    pub fn is_clean(&self) -> bool {
        self.max_trace_error <= Self::TRACE_TOL
            && self.max_hermiticity_error <= Self::HERMITICITY_TOL
            && self.min_eigenvalue >= -Self::POSITIVITY_TOL
    }
}

impl StateTrajectory {
    pub fn hygiene(&self) -> Hygiene {
        let mut h = Hygiene { min_eigenvalue: f64::INFINITY, ..Default::default() };
        for rho in &self.states {
            h.max_trace_error = h.max_trace_error.max((linalg::trace(rho) - 1.0).norm());
            h.max_hermiticity_error = h.max_hermiticity_error.max(linalg::max_abs(&(rho - rho.adjoint())));
            h.min_eigenvalue = h.min_eigenvalue.min(linalg::min_eigenvalue(rho));
        }
        h
    }

    /// `⟨op⟩(t_k)` for every grid point.
    pub fn expectations(&self, op: &CMatrix) -> Vec<f64> {
        self.states.iter().map(|rho| linalg::trace(&(op * rho)).re).collect()
    }

    pub fn population(&self, level: usize) -> Vec<f64> {
        self.states.iter().map(|rho| rho[(level, level)].re).collect()
    }
}
