#![allow(dead_code)]

use sps_core::coherence::{analyze_source, SourceAnalysis};
use sps_core::dynamics::{calibrate_to_target, recommended_grid, Calibration, TimeGrid};
use sps_core::model::{build_ladder, build_lambda, build_two_level, PulseEnvelope, SourceSystem};

pub const SWEEP: [f64; 10] = [0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14, 0.16, 0.18, 0.2];

pub fn two_level(fwhm: f64) -> SourceSystem {
    build_two_level(0.0, 1.0, PulseEnvelope::centered_gaussian(1.0, fwhm).unwrap()).unwrap()
}

pub fn ladder(fwhm: f64) -> SourceSystem {
    build_ladder(1.0, PulseEnvelope::centered_gaussian(1.0, fwhm).unwrap()).unwrap()
}

pub fn lambda(fwhm: f64) -> SourceSystem {
    build_lambda(0.0, 0.0, 1.0, PulseEnvelope::centered_gaussian(1.0, fwhm).unwrap()).unwrap()
}

pub struct Calibrated {
    pub system: SourceSystem,
    pub grid: TimeGrid,
    pub calibration: Calibration,
}

/// Drives `s` to ⟨M̂⟩ = 1 on its recommended grid.
pub fn calibrated(s: &SourceSystem) -> Calibrated {
    let grid = recommended_grid(s).unwrap();
    let calibration = calibrate_to_target(s, &grid, 1.0).unwrap();
    let system = s.with_amplitude(calibration.amplitude).unwrap();
    let grid = recommended_grid(&system).unwrap();
    Calibrated { system, grid, calibration }
}

pub fn calibrated_analysis(s: &SourceSystem) -> (Calibrated, SourceAnalysis) {
    let c = calibrated(s);
    let a = analyze_source(&c.system, &c.grid).unwrap();
    (c, a)
}

/// Least-squares slope of `y = k·x`.
pub fn slope_through_origin(x: &[f64], y: &[f64]) -> f64 {
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    sxy / sxx
}

/// Least-squares `(slope, intercept)` of `y = k·x + c`.
pub fn affine_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let k = sxy / sxx;
    (k, my - k * mx)
}
