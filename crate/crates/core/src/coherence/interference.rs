use crate::dynamics::{CorrelationGrid, CorrelationKind};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Allowed deviation of the integrated flux from 1 for single-photon inputs.
pub const NORMALIZATION_TOL: f64 = 1e-3;

fn integrated_flux(g1: &CorrelationGrid) -> f64 {
    g1.grid().trapezoid(&g1.diagonal().iter().map(|z| z.re).collect::<Vec<_>>())
}

fn check_pair(a: &CorrelationGrid, b: &CorrelationGrid, kind: CorrelationKind) -> Result<()> {
    a.require_kind(kind)?;
    b.require_kind(kind)?;
    a.require_same_grid(b)
}

/// `¼(⟨M̂_a⟩ + ⟨M̂_b⟩)²`, the coincidences of statistically independent pulses.
pub fn hom_normalization_reference(ma: f64, mb: f64) -> f64 {
    0.25 * (ma + mb) * (ma + mb)
}

/// `¼(⟨M̂_a⟩² + ⟨M̂_b⟩²)`, the adjacent-period cross-correlation of two
/// perfectly coherent sources.
pub fn hom_short_time_intensity(ma: f64, mb: f64) -> f64 {
    0.25 * (ma * ma + mb * mb)
}

/// Reference built from the average of the adjacent-period cross- and
/// auto-correlations, `(2G_c′d′ + G_c′c′ + G_d′d′)/4`.
pub fn hom_cross_auto_reference(cross: f64, auto_c: f64, auto_d: f64) -> f64 {
    0.25 * (2.0 * cross + auto_c + auto_d)
}

/// Integrated adjacent-period HOM correlations `(G_c′d′[t_r], G_c′c′[t_r])`
/// for independent pulses and a phase-stable drive, where the first-order
/// coherence between neighbouring periods equals the in-period one.
/// Their sum `2·cross + 2·auto` is `(⟨M̂_a⟩ + ⟨M̂_b⟩)²`.
pub fn adjacent_period_correlations(g1a: &CorrelationGrid, g1b: &CorrelationGrid) -> Result<(f64, f64)> {
    check_pair(g1a, g1b, CorrelationKind::G1)?;
    let (ma, mb) = (integrated_flux(g1a), integrated_flux(g1b));
    let overlap = g1a.overlap(g1b)?;
    let intensity = ma * ma + mb * mb + 2.0 * ma * mb;
    Ok((0.25 * (intensity - 2.0 * overlap), 0.25 * (intensity + 2.0 * overlap)))
}

/// Normalized HOM coincidence of two independent sources `a` and `b`.
pub fn hom_cross_general(
    g1a: &CorrelationGrid,
    g1b: &CorrelationGrid,
    g2a: &CorrelationGrid,
    g2b: &CorrelationGrid,
    ma: f64,
    mb: f64,
) -> Result<f64> {
    check_pair(g1a, g1b, CorrelationKind::G1)?;
    check_pair(g2a, g2b, CorrelationKind::G2)?;
    g1a.require_same_grid(g2a)?;
    let reference = hom_normalization_reference(ma, mb);
    if !(reference > 0.0) || !reference.is_finite() {
        return Err(Error::DivisionGuard(format!("photon numbers ({ma}, {mb}) give no reference")));
    }
    let w = g1a.grid().weights();
    let n = w.len();
    let (va, vb) = (g1a.values(), g1b.values());
    let (ua, ub) = (g2a.values(), g2b.values());
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            let mut sum = 0.0;
            for (e, f, ge) in [(va, vb, ua), (vb, va, ub)] {
                sum += ge[(i, j)].re + (e[(i, i)] * f[(j, j)]).re - (e[(i, j)].conj() * f[(i, j)]).re;
            }
            row += 0.25 * sum * w[j];
        }
        total += row * w[i];
    }
    Ok(total / reference)
}

/// `½(1 − Re∫∫ conj(G¹_a)·G¹_b)` for two single-photon wavepackets.
pub fn hom_single_photon_overlap(g1a: &CorrelationGrid, g1b: &CorrelationGrid) -> Result<f64> {
    check_pair(g1a, g1b, CorrelationKind::G1)?;
    for g in [g1a, g1b] {
        let m = integrated_flux(g);
        if (m - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Normalization(format!("integrated flux {m} is not 1")));
        }
    }
    Ok(0.5 * (1.0 - g1a.overlap(g1b)?))
}

/// Scales a first-order grid to unit integrated flux.
pub fn normalized_to_unit_flux(g1: &CorrelationGrid) -> Result<CorrelationGrid> {
    g1.require_kind(CorrelationKind::G1)?;
    let m = integrated_flux(g1);
    if !(m > 0.0) {
        return Err(Error::DivisionGuard(format!("integrated flux {m} must be positive")));
    }
    Ok(g1.scaled(1.0 / m))
}

/// Translates the grid by `steps·dt` along both time axes; entries shifted
/// in from outside the window are zero.
pub fn delay_shift(g: &CorrelationGrid, steps: i64) -> Result<CorrelationGrid> {
    let n = g.len();
    if steps.unsigned_abs() as usize >= n {
        return Err(Error::ShiftRange { steps, n });
    }
    let src = |k: usize| -> Option<usize> {
        let s = k as i64 - steps;
        (0..n as i64).contains(&s).then_some(s as usize)
    };
    let values = CMatrix::from_fn(n, n, |i, j| match (src(i), src(j)) {
        (Some(a), Some(b)) => g.at(a, b),
        _ => C64::new(0.0, 0.0),
    });
    CorrelationGrid::new(*g.grid(), values, g.kind())
}
