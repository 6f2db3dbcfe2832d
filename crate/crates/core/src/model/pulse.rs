//! Drive envelopes Ω(t).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts the FWHM of the intensity envelope Ω(t)² into the standard
/// deviation of the amplitude envelope Ω(t).
pub fn sigma_from_fwhm(fwhm: f64) -> f64 {
    fwhm / (2.0 * std::f64::consts::LN_2.sqrt())
}

/// Default pulse centre for a Gaussian of the given FWHM: `max(5σ, 1)`.
pub fn default_center(fwhm: f64) -> f64 {
    (5.0 * sigma_from_fwhm(fwhm)).max(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseEnvelope {
    /// `Ω₀ exp(−(t−t₀)²/(2σ²))` where `fwhm` is the FWHM of Ω(t)².
    Gaussian { amplitude: f64, center: f64, fwhm: f64 },
    /// Piecewise-linear interpolation of `(t, Ω)` samples; zero outside.
    Sampled { samples: Vec<(f64, f64)> },
}

impl PulseEnvelope {
    pub fn gaussian(amplitude: f64, center: f64, fwhm: f64) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidPulse(format!("amplitude must be ≥ 0, got {amplitude}")));
        }
        if !(fwhm > 0.0) || !fwhm.is_finite() {
            return Err(Error::InvalidPulse(format!("fwhm must be > 0, got {fwhm}")));
        }
        if !center.is_finite() {
            return Err(Error::InvalidPulse("center must be finite".into()));
        }
        Ok(Self::Gaussian { amplitude, center, fwhm })
    }

    /// Gaussian placed at [`default_center`].
    pub fn centered_gaussian(amplitude: f64, fwhm: f64) -> Result<Self> {
        Self::gaussian(amplitude, default_center(fwhm), fwhm)
    }

    /// Gaussian with the amplitude chosen so that `∫Ω dt = area`.
    pub fn gaussian_with_area(area: f64, center: f64, fwhm: f64) -> Result<Self> {
        let s = sigma_from_fwhm(fwhm);
        Self::gaussian(area / (s * (2.0 * std::f64::consts::PI).sqrt()), center, fwhm)
    }

    /// The zero drive.
    pub fn off() -> Self {
        Self::Gaussian { amplitude: 0.0, center: 1.0, fwhm: 1.0 }
    }

    pub fn sampled(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidPulse("need at least two samples".into()));
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidPulse("sample times must increase strictly".into()));
        }
        if samples.iter().any(|&(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidPulse("samples must be finite".into()));
        }
        Ok(Self::Sampled { samples })
    }

    /// Gaussian value; errors for sampled envelopes.
    pub fn gaussian_value(&self, t: f64) -> Result<f64> {
        match self {
            Self::Gaussian { amplitude, center, fwhm } => {
                let s = sigma_from_fwhm(*fwhm);
                let x = (t - center) / s;
                Ok(amplitude * (-0.5 * x * x).exp())
            }
            Self::Sampled { .. } => Err(Error::UnsupportedKind("sampled")),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Gaussian { .. } => self.gaussian_value(t).unwrap_or(0.0),
            Self::Sampled { samples } => {
                let (first, last) = (samples[0], samples[samples.len() - 1]);
                if t < first.0 || t > last.0 {
                    return 0.0;
                }
                let k = samples.partition_point(|&(ts, _)| ts <= t);
                if k >= samples.len() {
                    return last.1;
                }
                let (t0, v0) = samples[k - 1];
                let (t1, v1) = samples[k];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    pub fn is_off(&self) -> bool {
        match self {
            Self::Gaussian { amplitude, .. } => *amplitude == 0.0,
            Self::Sampled { samples } => samples.iter().all(|&(_, v)| v == 0.0),
        }
    }

    /// Interval outside which the envelope is negligible (below 1e-14 of
    /// the peak for Gaussians), and the largest step that resolves it.
    pub fn active_window(&self) -> Option<(f64, f64, f64)> {
        if self.is_off() {
            return None;
        }
        match self {
            Self::Gaussian { center, fwhm, .. } => {
                let s = sigma_from_fwhm(*fwhm);
                Some((center - 8.0 * s, center + 8.0 * s, 0.25 * s))
            }
            Self::Sampled { samples } => {
                let min_gap = samples.windows(2).map(|w| w[1].0 - w[0].0).fold(f64::INFINITY, f64::min);
                Some((samples[0].0, samples[samples.len() - 1].0, min_gap))
            }
        }
    }

    pub fn amplitude(&self) -> f64 {
        match self {
            Self::Gaussian { amplitude, .. } => *amplitude,
            Self::Sampled { samples } => samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max),
        }
    }

    /// Returns a copy with a new peak amplitude (sampled envelopes are rescaled).
    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        match self {
            Self::Gaussian { center, fwhm, .. } => Self::gaussian(amplitude, *center, *fwhm),
            Self::Sampled { samples } => {
                let peak = self.amplitude();
                if peak == 0.0 {
                    return Err(Error::InvalidPulse("cannot rescale an all-zero envelope".into()));
                }
                let k = amplitude / peak;
                Self::sampled(samples.iter().map(|&(t, v)| (t, v * k)).collect())
            }
        }
    }

    /// Returns a copy shifted in time by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        match self {
            Self::Gaussian { amplitude, center, fwhm } => {
                Self::Gaussian { amplitude: *amplitude, center: center + dt, fwhm: *fwhm }
            }
            Self::Sampled { samples } => Self::Sampled { samples: samples.iter().map(|&(t, v)| (t + dt, v)).collect() },
        }
    }

    /// Analytic `∫Ω dt` for Gaussians, trapezoid over samples otherwise.
    pub fn area(&self) -> f64 {
        match self {
            Self::Gaussian { amplitude, fwhm, .. } => {
                amplitude * sigma_from_fwhm(*fwhm) * (2.0 * std::f64::consts::PI).sqrt()
            }
            Self::Sampled { samples } => samples.windows(2).map(|w| 0.5 * (w[1].1 + w[0].1) * (w[1].0 - w[0].0)).sum(),
        }
    }

    /// Time at which the envelope (or its last sample) has ended.
    pub fn end_time(&self) -> f64 {
        match self {
            Self::Gaussian { center, fwhm, .. } => center + 5.0 * sigma_from_fwhm(*fwhm),
            Self::Sampled { samples } => samples[samples.len() - 1].0,
        }
    }
}
