use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evolve::evolve;
use super::grid::{StateTrajectory, TimeGrid};
use super::propagate::{PropagationOptions, Propagator};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64, ZERO};
use crate::model::SourceSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelationKind {
    G1,
    G2,
}

impl CorrelationKind {
    pub fn code(self) -> u32 {
        match self {
            CorrelationKind::G1 => 1,
            CorrelationKind::G2 => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(CorrelationKind::G1),
            2 => Some(CorrelationKind::G2),
            _ => None,
        }
    }
}

/// Samples of a two-time correlation function, entry `(i, j)` at `(t_i, t_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationGrid {
    grid: TimeGrid,
    values: CMatrix,
    kind: CorrelationKind,
}

impl CorrelationGrid {
    pub fn new(grid: TimeGrid, values: CMatrix, kind: CorrelationKind) -> Result<Self> {
        if values.nrows() != grid.len() || values.ncols() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.nrows() });
        }
        Ok(Self { grid, values, kind })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }
    pub fn values(&self) -> &CMatrix {
        &self.values
    }
    pub fn kind(&self) -> CorrelationKind {
        self.kind
    }
    pub fn len(&self) -> usize {
        self.grid.len()
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.values[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.len()).map(|i| self.values[(i, i)]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.values)
    }

    /// Largest violation of the symmetry declared by the kind.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let partner = match self.kind {
                    CorrelationKind::G1 => self.values[(j, i)].conj(),
                    CorrelationKind::G2 => self.values[(j, i)],
                };
                worst = worst.max((self.values[(i, j)] - partner).norm());
            }
        }
        worst
    }

    /// Re-verifies the stored grid: symmetry to 1e-8, and for G2 imaginary
    /// parts and negative real parts below 1e-8 of the largest entry.
    pub fn check_invariants(&self) -> Result<()> {
        let scale = self.max_abs();
        let sym = self.symmetry_error();
        if sym > 1e-8 {
            return Err(Error::IntegrationFailure(format!("{:?} symmetry violated by {sym:e}", self.kind)));
        }
        if self.kind == CorrelationKind::G2 {
            let tol = 1e-8 * scale;
            for z in self.values.iter() {
                if z.im.abs() > tol || z.re < -tol {
                    return Err(Error::IntegrationFailure(format!("G2 entry {z} is not a non-negative real")));
                }
            }
        }
        Ok(())
    }

    /// Trapezoidal `∫∫ f(G(t,t′)) dt dt′`, reduced row by row in order.
    fn integrate<F: Fn(C64) -> C64>(&self, f: F) -> C64 {
        let w = self.grid.weights();
        let n = self.len();
        let mut total = ZERO;
        for i in 0..n {
            let mut row = ZERO;
            for j in 0..n {
                row += f(self.values[(i, j)]) * w[j];
            }
            total += row * w[i];
        }
        total
    }

    pub fn double_integral(&self) -> C64 {
        self.integrate(|z| z)
    }

    pub fn abs_sq_integral(&self) -> f64 {
        self.integrate(|z| C64::new(z.norm_sqr(), 0.0)).re
    }

    /// `Re ∫∫ conj(G_self)·G_other`.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        self.require_same_grid(other)?;
        let w = self.grid.weights();
        let n = self.len();
        let mut total = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += (self.values[(i, j)].conj() * other.values[(i, j)]).re * w[j];
            }
            total += row * w[i];
        }
        Ok(total)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { values: self.values.scale(factor), ..self.clone() }
    }

    pub fn require_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.matches(&other.grid) {
            Ok(())
        } else {
            Err(Error::IncompatibleGrids(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }

    pub fn require_kind(&self, kind: CorrelationKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::WrongKind { expected: kind })
        }
    }
}

/// `Tr{B·Λ(t_i, t_j)}` with `Λ(t_i, t_i) = C ρ(t_i) A` propagated forward,
/// for `j ≥ i`. The remaining entries follow from the symmetry of `kind`.
pub fn two_time_grid(
    s: &SourceSystem,
    g: &TimeGrid,
    a: &CMatrix,
    b: &CMatrix,
    c: &CMatrix,
    kind: CorrelationKind,
) -> Result<CorrelationGrid> {
    let traj = evolve(s, g)?;
    two_time_grid_from(s, &traj, a, b, c, kind)
}

/// Same as [`two_time_grid`] but reuses an existing trajectory.
pub fn two_time_grid_from(
    s: &SourceSystem,
    traj: &StateTrajectory,
    a: &CMatrix,
    b: &CMatrix,
    c: &CMatrix,
    kind: CorrelationKind,
) -> Result<CorrelationGrid> {
    let d = s.dim();
    for m in [a, b, c] {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.nrows() });
        }
    }
    let g = traj.grid;
    let n = g.len();
    let prop = Propagator::new(s, PropagationOptions::default()).with_step(g.dt());
    let weights = linalg::trace_weights(b);
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map_init(
            || prop.workspace(),
            |ws, i| -> Result<Vec<C64>> {
                ws.reset();
                let mut y = linalg::vectorize(&(c * &traj.states[i] * a));
                let mut row = Vec::with_capacity(n - i);
                row.push(linalg::dot(&weights, &y));
                for j in i + 1..n {
                    prop.advance(ws, g.time(j - 1), g.time(j), &mut y)?;
                    row.push(linalg::dot(&weights, &y));
                }
                Ok(row)
            },
        )
        .collect::<Result<_>>()?;
    let mut values = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (k, &z) in row.iter().enumerate() {
            let j = i + k;
            values[(i, j)] = z;
            values[(j, i)] = match kind {
                CorrelationKind::G1 => z.conj(),
                CorrelationKind::G2 => z,
            };
        }
        if kind == CorrelationKind::G1 {
            values[(i, i)] = C64::new(row[0].re, 0.0);
        }
    }
    CorrelationGrid::new(g, values, kind)
}

/// Flux-normalized first-order coherence `G¹(t,t′) = √(γ(t)γ(t′))⟨a†(t)a(t′)⟩`.
pub fn g1_grid(s: &SourceSystem, g: &TimeGrid) -> Result<CorrelationGrid> {
    g1_grid_from(s, &evolve(s, g)?)
}

pub fn g1_grid_from(s: &SourceSystem, traj: &StateTrajectory) -> Result<CorrelationGrid> {
    let a = s.emission().operator.matrix();
    let id = CMatrix::identity(s.dim(), s.dim());
    let raw = two_time_grid_from(s, traj, &a.adjoint(), a, &id, CorrelationKind::G1)?;
    Ok(rescale(s, raw, 0.5))
}

/// Second-order coherence `G²(t,t′) = γ(t)γ(t′)⟨a†(t)a†a(t′)a(t)⟩`.
pub fn g2_grid(s: &SourceSystem, g: &TimeGrid) -> Result<CorrelationGrid> {
    g2_grid_from(s, &evolve(s, g)?)
}

pub fn g2_grid_from(s: &SourceSystem, traj: &StateTrajectory) -> Result<CorrelationGrid> {
    let a = s.emission().operator.matrix();
    let ad = a.adjoint();
    let raw = two_time_grid_from(s, traj, &ad, &(&ad * a), a, CorrelationKind::G2)?;
    Ok(rescale(s, raw, 1.0))
}

/// Multiplies entry `(i, j)` by `(γ(t_i)γ(t_j))^power`.
fn rescale(s: &SourceSystem, mut raw: CorrelationGrid, power: f64) -> CorrelationGrid {
    let f: Vec<f64> = raw.grid.times().iter().map(|&t| s.emission_rate_at(t).powf(power)).collect();
    let n = raw.len();
    for j in 0..n {
        for i in 0..n {
            raw.values[(i, j)] *= f[i] * f[j];
        }
    }
    raw
}
