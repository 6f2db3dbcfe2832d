//! Pulse-wise interferometric observables reduced from correlation grids.

mod interference;
mod splitter;

pub use interference::{
    adjacent_period_correlations, delay_shift, hom_cross_auto_reference, hom_cross_general,
    hom_normalization_reference, hom_short_time_intensity, hom_single_photon_overlap, normalized_to_unit_flux,
    NORMALIZATION_TOL,
};
pub use splitter::{mz_five_peaks, FivePeakPattern, SplitterSpec};

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    evolve, g1_grid_from, g2_grid_from, mean_photon_number, CorrelationGrid, CorrelationKind, TimeGrid,
};
use crate::error::{Error, Result};
use crate::model::SourceSystem;

/// Integrated, normalized pulse-wise coherences of one source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSummary {
    pub mean_photons: f64,
    pub g2_zero: f64,
    pub g1sq_zero: f64,
    pub g2_hom: f64,
    pub g2_mz: f64,
}

impl CoherenceSummary {
    /// Derives the HOM and MZ values of identical copies of one source.
    pub fn from_source(mean_photons: f64, g2_zero: f64, g1sq_zero: f64) -> Self {
        Self {
            mean_photons,
            g2_zero,
            g1sq_zero,
            g2_hom: hom_identical(g2_zero, g1sq_zero),
            g2_mz: mz_identical(g2_zero, g1sq_zero),
        }
    }

    /// Largest mismatch between the stored HOM/MZ columns and the values
    /// re-derived from `g2_zero` and `g1sq_zero`.
    pub fn consistency_error(&self) -> f64 {
        let hom = (self.g2_hom - hom_identical(self.g2_zero, self.g1sq_zero)).abs();
        let mz = (self.g2_mz - mz_identical(self.g2_zero, self.g1sq_zero)).abs();
        hom.max(mz)
    }

    pub fn is_finite(&self) -> bool {
        [self.mean_photons, self.g2_zero, self.g1sq_zero, self.g2_hom, self.g2_mz].iter().all(|x| x.is_finite())
    }
}

fn guard_mean(mean_photons: f64) -> Result<()> {
    if mean_photons > 0.0 && mean_photons.is_finite() {
        Ok(())
    } else {
        Err(Error::DivisionGuard(format!("mean photon number {mean_photons} must be positive")))
    }
}

/// `g²[0] = ∫∫G²(t,t′) / ⟨M̂⟩²`.
pub fn integrated_g2_zero(g2: &CorrelationGrid, mean_photons: f64) -> Result<f64> {
    g2.require_kind(CorrelationKind::G2)?;
    guard_mean(mean_photons)?;
    Ok(g2.double_integral().re / (mean_photons * mean_photons))
}

/// `|g¹[0]|² = ∫∫|G¹(t,t′)|² / ⟨M̂⟩²`.
pub fn integrated_g1sq_zero(g1: &CorrelationGrid, mean_photons: f64) -> Result<f64> {
    g1.require_kind(CorrelationKind::G1)?;
    guard_mean(mean_photons)?;
    Ok(g1.abs_sq_integral() / (mean_photons * mean_photons))
}

/// HOM coincidence of two identical independent sources,
/// `½(g² + 1 − |g¹|²)`.
pub fn hom_identical(g2_zero: f64, g1sq_zero: f64) -> f64 {
    0.5 * (g2_zero + 1.0 - g1sq_zero)
}

/// Unbalanced Mach–Zehnder coincidence of a doubly excited source,
/// `(2/3)g² + (1/3)(1 − |g¹|²)`.
pub fn mz_identical(g2_zero: f64, g1sq_zero: f64) -> f64 {
    2.0 / 3.0 * g2_zero + (1.0 - g1sq_zero) / 3.0
}

/// Everything the interferometric observables need from one source.
#[derive(Clone, Debug)]
pub struct SourceAnalysis {
    pub g1: CorrelationGrid,
    pub g2: CorrelationGrid,
    pub summary: CoherenceSummary,
}

/// Evolves `s` on `g`, builds both correlation grids and reduces them.
pub fn analyze_source(s: &SourceSystem, g: &TimeGrid) -> Result<SourceAnalysis> {
    let traj = evolve(s, g)?;
    let mean = mean_photon_number(s, &traj);
    let g1 = g1_grid_from(s, &traj)?;
    let g2 = g2_grid_from(s, &traj)?;
    let summary = CoherenceSummary::from_source(mean, integrated_g2_zero(&g2, mean)?, integrated_g1sq_zero(&g1, mean)?);
    Ok(SourceAnalysis { g1, g2, summary })
}
