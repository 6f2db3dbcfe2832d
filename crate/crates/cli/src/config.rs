//! Run configuration: a TOML file plus command-line overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sps_core::coherence::SplitterSpec;
use sps_core::dynamics::{recommended_grid, recommended_grid_until, TimeGrid};
use sps_core::model::{add_dephasing, build_ladder, build_lambda, build_two_level, PulseEnvelope, Rate, SourceSystem};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    TwoLevel,
    Ladder,
    Lambda,
}

impl SystemKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s.replace('-', "_").as_str() {
            "two_level" => Ok(Self::TwoLevel),
            "ladder" => Ok(Self::Ladder),
            "lambda" => Ok(Self::Lambda),
            other => Err(CliError::Config(format!("unknown system `{other}` (expected two_level, ladder or lambda)"))),
        }
    }

    /// Upper level of the monitored transition, which dephasing acts on.
    fn emitting_level(self) -> usize {
        match self {
            Self::TwoLevel | Self::Ladder => 1,
            Self::Lambda => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Rates {
    /// Two-level decay rate.
    pub gamma: f64,
    /// Ladder `|2⟩ → |1⟩` decay rate.
    pub gamma12: f64,
    /// Lambda decay back to the ground state.
    pub gamma13: f64,
    /// Lambda decay into the trap, the monitored channel.
    pub gamma23: f64,
    pub gamma_d: f64,
    pub delta: f64,
}

impl Default for Rates {
    fn default() -> Self {
        Self { gamma: 1.0, gamma12: 1.0, gamma13: 0.0, gamma23: 1.0, gamma_d: 0.0, delta: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub fwhm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Pulse area in units of π.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    #[serde(default)]
    pub calibrate: bool,
    #[serde(default = "default_target")]
    pub target: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
}

fn default_target() -> f64 {
    1.0
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self { fwhm: 1.0, amplitude: None, area: None, calibrate: true, target: 1.0, center: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Fwhm,
    Area,
    Dephasing,
    Delay,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fwhm => "fwhm",
            Self::Area => "area",
            Self::Dephasing => "dephasing",
            Self::Delay => "delay",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Sweep {
    /// Parses `AXIS:LO:HI:N`.
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || CliError::Config(format!("sweep `{spec}` is not of the form AXIS:LO:HI:N"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let axis = match parts[0] {
            "fwhm" => SweepAxis::Fwhm,
            "area" => SweepAxis::Area,
            "dephasing" => SweepAxis::Dephasing,
            "delay" => SweepAxis::Delay,
            other => return Err(CliError::Config(format!("unknown sweep axis `{other}`"))),
        };
        let lo = parts[1].parse().map_err(|_| bad())?;
        let hi = parts[2].parse().map_err(|_| bad())?;
        let n = parts[3].parse().map_err(|_| bad())?;
        Ok(Self { axis, lo, hi, n })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n).map(|k| self.lo + (self.hi - self.lo) * k as f64 / (self.n - 1) as f64).collect()
    }

    fn validate(&self) -> Result<(), CliError> {
        let err = |m: String| Err(CliError::Config(format!("sweep {}: {m}", self.axis.name())));
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return err("range must be finite".into());
        }
        if self.n == 0 {
            return err("needs at least one point".into());
        }
        if self.hi < self.lo {
            return err(format!("upper end {} is below lower end {}", self.hi, self.lo));
        }
        match self.axis {
            SweepAxis::Fwhm | SweepAxis::Area if self.lo <= 0.0 => err("values must be positive".into()),
            SweepAxis::Dephasing if self.lo < 0.0 => err("values must be non-negative".into()),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub trials: usize,
    pub seed: u64,
    pub eta: f64,
    /// Repetition period `t_r`; defaults to the simulated window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rep_period: Option<f64>,
    pub n_periods: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { trials: 100_000, seed: 1, eta: 1.0, rep_period: None, n_periods: 1 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(CliError::Config(format!("unknown format `{other}` (expected csv or json)"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitterConfig {
    pub r1: f64,
    pub r2: f64,
}

impl Default for SplitterConfig {
    fn default() -> Self {
        Self { r1: 0.5, r2: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemKind,
    #[serde(default)]
    pub rates: Rates,
    #[serde(default)]
    pub pulse: PulseConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub splitter: SplitterConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemKind::TwoLevel,
            rates: Rates::default(),
            pulse: PulseConfig::default(),
            grid: GridConfig::default(),
            sweep: None,
            mc: McConfig::default(),
            splitter: SplitterConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub system: Option<String>,
    pub fwhm: Option<f64>,
    pub area: Option<f64>,
    pub calibrate: bool,
    pub sweep: Option<String>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub eta: Option<f64>,
    pub out: Option<String>,
    pub format: Option<String>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Reads `path` when given, else starts from defaults, then applies the
    /// flags and validates the result.
    pub fn resolve(path: Option<&Path>, o: &Overrides) -> Result<Self, CliError> {
        let mut c = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        c.apply(o)?;
        c.validate()?;
        Ok(c)
    }

    fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(s) = &o.system {
            self.system = SystemKind::parse(s)?;
        }
        if let Some(x) = o.fwhm {
            self.pulse.fwhm = x;
        }
        if let Some(x) = o.area {
            if o.calibrate {
                return Err(CliError::Config("--area and --calibrate are mutually exclusive".into()));
            }
            self.pulse.area = Some(x);
            self.pulse.amplitude = None;
            self.pulse.calibrate = false;
        }
        if o.calibrate {
            self.pulse.calibrate = true;
            self.pulse.amplitude = None;
            self.pulse.area = None;
        }
        if let Some(s) = &o.sweep {
            self.sweep = Some(Sweep::parse(s)?);
        }
        if let Some(x) = o.trials {
            self.mc.trials = x;
        }
        if let Some(x) = o.seed {
            self.mc.seed = x;
        }
        if let Some(x) = o.eta {
            self.mc.eta = x;
        }
        if let Some(p) = &o.out {
            self.output.path = Some(p.clone());
        }
        if let Some(f) = &o.format {
            self.output.format = Format::parse(f)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let err = |m: &str| Err(CliError::Config(m.to_string()));
        let p = &self.pulse;
        let explicit = p.amplitude.is_some() as u8 + p.area.is_some() as u8;
        if explicit > 1 {
            return err("pulse.amplitude and pulse.area are mutually exclusive");
        }
        if p.calibrate && explicit > 0 {
            return err("pulse.calibrate and an explicit amplitude or area are mutually exclusive");
        }
        if !p.calibrate && explicit == 0 {
            return err("set pulse.calibrate or give pulse.amplitude or pulse.area");
        }
        if !(p.fwhm > 0.0) || !p.fwhm.is_finite() {
            return err("pulse.fwhm must be positive and finite");
        }
        if !(p.target > 0.0) || !p.target.is_finite() {
            return err("pulse.target must be positive and finite");
        }
        for v in [p.amplitude, p.area, p.center].into_iter().flatten() {
            if !v.is_finite() {
                return err("pulse values must be finite");
            }
        }
        if p.amplitude.is_some_and(|a| a < 0.0) || p.area.is_some_and(|a| a < 0.0) {
            return err("pulse amplitude and area must be non-negative");
        }
        let r = &self.rates;
        for v in [r.gamma, r.gamma12, r.gamma13, r.gamma23, r.gamma_d, r.delta] {
            if !v.is_finite() {
                return err("rates must be finite");
            }
        }
        if r.gamma_d < 0.0 {
            return err("rates.gamma_d must be non-negative");
        }
        if let Some(t) = self.grid.t_end {
            if !(t > 0.0) || !t.is_finite() {
                return err("grid.t_end must be positive and finite");
            }
        }
        if self.grid.n.is_some_and(|n| n < 2) {
            return err("grid.n must be at least 2");
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
            if s.axis == SweepAxis::Area && p.calibrate {
                return err("an area sweep cannot be combined with calibration");
            }
        }
        let mc = &self.mc;
        if mc.trials == 0 {
            return err("mc.trials must be positive");
        }
        if !(mc.eta > 0.0 && mc.eta <= 1.0) {
            return err("mc.eta must lie in (0, 1]");
        }
        if mc.n_periods == 0 || mc.rep_period.is_some_and(|t| !(t > 0.0) || !t.is_finite()) {
            return err("mc.rep_period must be positive and mc.n_periods at least 1");
        }
        self.splitter_spec().map(|_| ())
    }

    pub fn splitter_spec(&self) -> Result<SplitterSpec, CliError> {
        SplitterSpec::from_reflectivities(self.splitter.r1, self.splitter.r2)
            .map_err(|e| CliError::Config(format!("invalid splitter: {e}")))
    }

    /// The configured system with `axis` set to `value`. The amplitude is the
    /// configured one (zero when it is still to be calibrated).
    pub fn system_at(&self, axis: Option<SweepAxis>, value: f64) -> Result<SourceSystem, CliError> {
        let mut p = self.pulse;
        let mut gamma_d = self.rates.gamma_d;
        match axis {
            Some(SweepAxis::Fwhm) => p.fwhm = value,
            Some(SweepAxis::Area) => {
                p.area = Some(value);
                p.amplitude = None;
            }
            Some(SweepAxis::Dephasing) => gamma_d = value,
            Some(SweepAxis::Delay) | None => {}
        }
        let center = p.center.unwrap_or_else(|| sps_core::model::default_center(p.fwhm));
        let pulse = match (p.amplitude, p.area) {
            (_, Some(area)) => PulseEnvelope::gaussian_with_area(area * std::f64::consts::PI, center, p.fwhm),
            (Some(a), None) => PulseEnvelope::gaussian(a, center, p.fwhm),
            (None, None) => PulseEnvelope::gaussian(1.0, center, p.fwhm),
        }
        .map_err(|e| CliError::Config(e.to_string()))?;
        let r = &self.rates;
        let s = match self.system {
            SystemKind::TwoLevel => build_two_level(r.delta, r.gamma, pulse),
            SystemKind::Ladder => build_ladder(r.gamma12, pulse),
            SystemKind::Lambda => build_lambda(r.delta, r.gamma13, r.gamma23, pulse),
        }
        .map_err(|e| CliError::Config(e.to_string()))?;
        if gamma_d > 0.0 {
            add_dephasing(&s, self.system.emitting_level(), Rate::constant(gamma_d))
                .map_err(|e| CliError::Config(e.to_string()))
        } else {
            Ok(s)
        }
    }

    /// Grid from `[grid]`, falling back to the recommended one for `s`.
    pub fn grid_for(&self, s: &SourceSystem) -> Result<TimeGrid, CliError> {
        let g = match (self.grid.t_end, self.grid.n) {
            (Some(t), Some(n)) => TimeGrid::new(0.0, t, n),
            (Some(t), None) => recommended_grid_until(s, t),
            (None, Some(n)) => TimeGrid::new(0.0, s.default_window_end(), n),
            (None, None) => recommended_grid(s),
        };
        g.map_err(|e| CliError::Config(format!("invalid grid: {e}")))
    }
}
