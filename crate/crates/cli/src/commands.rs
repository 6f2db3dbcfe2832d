//! The four subcommands. Each returns its table rows and fills in the
//! manifest; writing happens in `main`.

use serde::Serialize;
use sps_core::coherence::{analyze_source, delay_shift, hom_cross_general, mz_five_peaks, SourceAnalysis};
use sps_core::dynamics::{calibrate_to_target, TimeGrid};
use sps_core::model::SourceSystem;
use sps_core::trajectories::{g2_with_error, photocount_distribution, run_trajectories, ClickRecord};

use crate::config::{RunConfig, SweepAxis};
use crate::error::CliError;
use crate::output::{CalibrationRecord, Manifest, RowError};

const THINNING_SALT: u64 = 0xa5a5_a5a5_a5a5_a5a5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub sweep: f64,
    pub amplitude: f64,
    pub mean_photons: f64,
    pub g2_zero: f64,
    pub g1sq_zero: f64,
    pub g2_hom: f64,
    pub g2_mz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DelayRow {
    pub delay: f64,
    pub steps: i64,
    pub applied_delay: f64,
    pub g2_hom: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeakRow {
    pub sweep: f64,
    pub n: i32,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationRow {
    pub sweep: f64,
    pub mean_photons: f64,
    pub mean_clicks: f64,
    pub mean_clicks_sigma: f64,
    pub g2_qrt: f64,
    pub g2_mc: f64,
    pub g2_mc_sigma: f64,
    pub verdict: &'static str,
}

/// One configured source, driven and analysed on its grid.
pub struct Prepared {
    pub system: SourceSystem,
    pub grid: TimeGrid,
}

fn sweep_points(c: &RunConfig) -> (Option<SweepAxis>, Vec<f64>) {
    match c.sweep {
        Some(s) if s.axis != SweepAxis::Delay => (Some(s.axis), s.values()),
        _ => (None, vec![c.pulse.fwhm]),
    }
}

/// Builds the source at a sweep point and calibrates it when requested.
fn prepare(c: &RunConfig, axis: Option<SweepAxis>, value: f64, m: &mut Manifest) -> Result<Prepared, CliError> {
    let base = c.system_at(axis, value)?;
    let grid = c.grid_for(&base)?;
    if !c.pulse.calibrate {
        return Ok(Prepared { system: base, grid });
    }
    let cal = calibrate_to_target(&base, &grid, c.pulse.target)?;
    m.calibrations.push(CalibrationRecord {
        sweep: value,
        amplitude: cal.amplitude,
        mean_photons: cal.mean_photons,
        asymptotic: cal.asymptotic,
        non_monotonic: cal.non_monotonic,
    });
    Ok(Prepared { system: base.with_amplitude(cal.amplitude)?, grid })
}

/// Runs `f` for every sweep point. Numerical failures become error entries
/// and the sweep continues; configuration errors abort.
fn for_each_point<T>(
    c: &RunConfig,
    m: &mut Manifest,
    mut f: impl FnMut(f64, Prepared, &mut Manifest) -> Result<Vec<T>, CliError>,
) -> Result<Vec<T>, CliError> {
    let (axis, values) = sweep_points(c);
    let mut rows = Vec::new();
    for value in values {
        let out = prepare(c, axis, value, m).and_then(|p| f(value, p, m));
        match out {
            Ok(r) => rows.extend(r),
            Err(CliError::Numerical(msg)) => {
                eprintln!("warning: sweep point {value}: {msg}");
                m.errors.push(RowError { sweep: value, message: msg });
            }
            Err(e) => return Err(e),
        }
    }
    m.rows = rows.len();
    Ok(rows)
}

fn finite(values: &[f64]) -> Result<(), CliError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("non-finite result in {values:?}")))
    }
}

pub fn cmd_coherence(c: &RunConfig, m: &mut Manifest) -> Result<Vec<ResultRow>, CliError> {
    for_each_point(c, m, |value, p, _| {
        let s = analyze_source(&p.system, &p.grid)?.summary;
        finite(&[s.mean_photons, s.g2_zero, s.g1sq_zero])?;
        Ok(vec![ResultRow {
            sweep: value,
            amplitude: p.system.pulse().amplitude(),
            mean_photons: s.mean_photons,
            g2_zero: s.g2_zero,
            g1sq_zero: s.g1sq_zero,
            g2_hom: s.g2_hom,
            g2_mz: s.g2_mz,
        }])
    })
}

pub fn cmd_mz(c: &RunConfig, m: &mut Manifest) -> Result<Vec<PeakRow>, CliError> {
    let splitter = c.splitter_spec()?;
    let mut summaries = Vec::new();
    let rows = for_each_point(c, m, |value, p, _| {
        let s = analyze_source(&p.system, &p.grid)?.summary;
        finite(&[s.g2_zero, s.g1sq_zero])?;
        summaries.push(serde_json::json!({ "sweep": value, "summary": s }));
        let pattern = mz_five_peaks(s.g2_zero, s.g1sq_zero, &splitter);
        Ok((-2..=2).map(|n| PeakRow { sweep: value, n, value: pattern.at(n) }).collect())
    })?;
    m.extra = serde_json::json!({ "splitter": splitter, "sources": summaries });
    Ok(rows)
}

pub fn cmd_mc_validate(
    c: &RunConfig,
    m: &mut Manifest,
    mut clicks: Option<&mut Vec<ClickRecord>>,
) -> Result<Vec<ValidationRow>, CliError> {
    let eta = c.mc.eta;
    let rows = for_each_point(c, m, |value, p, _| {
        let s = analyze_source(&p.system, &p.grid)?.summary;
        let records = run_trajectories(&p.system, &p.grid, c.mc.trials, c.mc.seed)?;
        let dist = photocount_distribution(&records, eta, c.mc.seed ^ THINNING_SALT)?;
        let (g2_mc, g2_sigma) = g2_with_error(&dist)?;
        // The sample error vanishes when every trial clicks alike, so it is
        // floored by the spread the deterministic pipeline predicts.
        let m1 = s.mean_photons;
        let predicted_var = eta * eta * s.g2_zero * m1 * m1 + eta * m1 - eta * eta * m1 * m1;
        let predicted = (predicted_var.max(0.0) / c.mc.trials as f64).sqrt();
        let mean_clicks = dist.mean() / eta;
        let mean_sigma = dist.mean_std_error().max(predicted) / eta;
        finite(&[s.mean_photons, s.g2_zero, g2_mc, g2_sigma, mean_clicks, mean_sigma])?;
        let pass = (g2_mc - s.g2_zero).abs() <= 3.0 * g2_sigma + 1e-8
            && (mean_clicks - s.mean_photons).abs() <= 3.0 * mean_sigma + 1e-8;
        if let Some(out) = clicks.as_deref_mut() {
            out.extend(records);
        }
        Ok(vec![ValidationRow {
            sweep: value,
            mean_photons: s.mean_photons,
            mean_clicks,
            mean_clicks_sigma: mean_sigma,
            g2_qrt: s.g2_zero,
            g2_mc,
            g2_mc_sigma: g2_sigma,
            verdict: if pass { "PASS" } else { "FAIL" },
        }])
    })?;
    Ok(rows)
}

/// Grid shared by both sources of a delay scan, long enough to hold either
/// pulse shifted by the largest delay.
fn common_grid(
    a: &RunConfig,
    b: &RunConfig,
    sa: &SourceSystem,
    sb: &SourceSystem,
    max_delay: f64,
) -> Result<TimeGrid, CliError> {
    let explicit =
        |c: &RunConfig, s: &SourceSystem| (c.grid.t_end.is_some() || c.grid.n.is_some()).then(|| c.grid_for(s));
    match (explicit(a, sa), explicit(b, sb)) {
        (Some(ga), Some(gb)) => {
            let (ga, gb) = (ga?, gb?);
            if !ga.matches(&gb) {
                return Err(CliError::Config(format!(
                    "grid mismatch: source a has dt {} over [0, {}], source b dt {} over [0, {}]",
                    ga.dt(),
                    ga.t_end(),
                    gb.dt(),
                    gb.t_end()
                )));
            }
            Ok(ga)
        }
        (Some(g), None) | (None, Some(g)) => g,
        (None, None) => {
            let t_end = sa.default_window_end().max(sb.default_window_end()) + max_delay;
            let ga = sps_core::dynamics::recommended_grid_until(sa, t_end)?;
            let gb = sps_core::dynamics::recommended_grid_until(sb, t_end)?;
            Ok(if ga.len() >= gb.len() { ga } else { gb })
        }
    }
}

pub fn cmd_hom_delay(a: &RunConfig, b: &RunConfig, m: &mut Manifest) -> Result<Vec<DelayRow>, CliError> {
    let sweep = match a.sweep {
        Some(s) if s.axis == SweepAxis::Delay => s,
        Some(s) => {
            return Err(CliError::Config(format!("hom-delay sweeps the delay axis, not {}", s.axis.name())));
        }
        None => crate::config::Sweep { axis: SweepAxis::Delay, lo: -20.0, hi: 20.0, n: 41 },
    };
    let max_delay = sweep.lo.abs().max(sweep.hi.abs());
    let pa = prepare(a, None, a.pulse.fwhm, m)?;
    let pb = prepare(b, None, b.pulse.fwhm, m)?;
    let grid = common_grid(a, b, &pa.system, &pb.system, max_delay)?;
    let sa: SourceAnalysis = analyze_source(&pa.system, &grid)?;
    let sb: SourceAnalysis = analyze_source(&pb.system, &grid)?;
    let (ma, mb) = (sa.summary.mean_photons, sb.summary.mean_photons);
    let mut rows = Vec::with_capacity(sweep.n);
    for delay in sweep.values() {
        let steps = (delay / grid.dt()).round() as i64;
        let value = if steps >= 0 {
            let (g1b, g2b) = (delay_shift(&sb.g1, steps)?, delay_shift(&sb.g2, steps)?);
            hom_cross_general(&sa.g1, &g1b, &sa.g2, &g2b, ma, mb)?
        } else {
            let (g1a, g2a) = (delay_shift(&sa.g1, -steps)?, delay_shift(&sa.g2, -steps)?);
            hom_cross_general(&g1a, &sb.g1, &g2a, &sb.g2, ma, mb)?
        };
        finite(&[value])?;
        rows.push(DelayRow { delay, steps, applied_delay: steps as f64 * grid.dt(), g2_hom: value });
    }
    m.rows = rows.len();
    m.sweep_axis = Some(SweepAxis::Delay.name());
    m.config_b = Some(b.clone());
    m.extra = serde_json::json!({
        "grid": { "t_end": grid.t_end(), "n": grid.len(), "dt": grid.dt() },
        "source_a": sa.summary,
        "source_b": sb.summary,
    });
    Ok(rows)
}
