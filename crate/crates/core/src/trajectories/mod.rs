//! Quantum-jump Monte Carlo unraveling and photon-counting statistics.

mod counting;
mod hbt;
mod jump;

pub use counting::{g2_from_photocounts, g2_with_error, photocount_distribution, PhotocountDistribution, M_MAX};
pub use hbt::{
    hbt_histogram, period_outcomes, ratio_estimate_g2, route_clicks, DetectionModel, Histogram, HistogramMode,
};
pub use jump::{run_trajectories, trial_rng, Click, ClickRecord, Detector, JUMP_TOL};

use std::io::Write;

use crate::error::{Error, Result};

fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

/// CSV with header `trial,time,detector`; unrouted clicks leave the detector
/// column empty.
pub fn write_clicks_csv<W: Write>(records: &[ClickRecord], mut out: W) -> Result<()> {
    writeln!(out, "trial,time,detector").map_err(io_err)?;
    for r in records {
        for c in &r.clicks {
            let det = c.detector.map(|d| d.label()).unwrap_or("");
            writeln!(out, "{},{:e},{det}", r.trial, c.time).map_err(io_err)?;
        }
    }
    Ok(())
}

/// CSV with header `k,count`.
pub fn write_histogram_csv<W: Write>(h: &Histogram, mut out: W) -> Result<()> {
    writeln!(out, "k,count").map_err(io_err)?;
    for (k, c) in &h.bins {
        writeln!(out, "{k},{c}").map_err(io_err)?;
    }
    Ok(())
}
