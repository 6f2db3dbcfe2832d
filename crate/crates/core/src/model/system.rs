//! Source systems: Hamiltonian terms, collapse channels and the three
//! prototypical emitters.

use serde::{Deserialize, Serialize};

use super::pulse::PulseEnvelope;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Operator};

const VALIDATION_TOL: f64 = 1e-12;

/// Rate attached to a unit-normalized collapse operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rate {
    Constant {
        value: f64,
    },
    /// Ω(t)² of the system's own drive envelope.
    DriveSquared,
    /// Value of an independent envelope.
    Envelope {
        envelope: PulseEnvelope,
    },
}

impl Rate {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn at(&self, drive: &PulseEnvelope, t: f64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::DriveSquared => {
                let v = drive.value(t);
                v * v
            }
            Self::Envelope { envelope } => envelope.value(t),
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Self::Constant { value } => Some(*value),
            _ => None,
        }
    }

    fn scaled(&self, k: f64) -> Result<Self> {
        Ok(match self {
            Self::Constant { value } => Self::Constant { value: value * k },
            Self::DriveSquared if (k - 1.0).abs() < 1e-15 => Self::DriveSquared,
            Self::DriveSquared => return Err(Error::InvalidWeights("cannot split a drive-squared channel".into())),
            Self::Envelope { envelope } => {
                Self::Envelope { envelope: envelope.with_amplitude(envelope.amplitude() * k)? }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseChannel {
    pub operator: Operator,
    pub rate: Rate,
    #[serde(default)]
    pub is_emission: bool,
}

impl CollapseChannel {
    pub fn new(operator: Operator, rate: Rate, is_emission: bool) -> Self {
        Self { operator, rate, is_emission }
    }
}

/// A driven open quantum system with one monitored emission channel.
///
/// The Hamiltonian is `H(t) = h_static + Ω(t)/2 · h_drive` in units ħ = γ = 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem", into = "RawSystem")]
pub struct SourceSystem {
    label: String,
    dim: usize,
    h_static: Operator,
    h_drive: Operator,
    pulse: PulseEnvelope,
    channels: Vec<CollapseChannel>,
    rho0: Operator,
}

#[derive(Serialize, Deserialize)]
struct RawSystem {
    label: String,
    dim: usize,
    h_static: Operator,
    h_drive: Operator,
    pulse: PulseEnvelope,
    channels: Vec<CollapseChannel>,
    rho0: Operator,
}

impl TryFrom<RawSystem> for SourceSystem {
    type Error = Error;
    fn try_from(r: RawSystem) -> Result<Self> {
        Self::new(r.label, r.h_static, r.h_drive, r.pulse, r.channels, r.rho0)
    }
}

impl From<SourceSystem> for RawSystem {
    fn from(s: SourceSystem) -> Self {
        Self {
            label: s.label,
            dim: s.dim,
            h_static: s.h_static,
            h_drive: s.h_drive,
            pulse: s.pulse,
            channels: s.channels,
            rho0: s.rho0,
        }
    }
}

impl SourceSystem {
    pub fn new(
        label: impl Into<String>,
        h_static: Operator,
        h_drive: Operator,
        pulse: PulseEnvelope,
        channels: Vec<CollapseChannel>,
        rho0: Operator,
    ) -> Result<Self> {
        let dim = h_static.dim();
        for d in [h_drive.dim(), rho0.dim()].into_iter().chain(channels.iter().map(|c| c.operator.dim())) {
            if d != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: d });
            }
        }
        if !h_static.is_hermitian(VALIDATION_TOL) || !h_drive.is_hermitian(VALIDATION_TOL) {
            return Err(Error::InvalidSystem("Hamiltonian terms must be Hermitian".into()));
        }
        let rho = rho0.matrix();
        if !linalg::is_hermitian(rho, VALIDATION_TOL) {
            return Err(Error::InvalidSystem("rho0 must be Hermitian".into()));
        }
        if (linalg::trace(rho).re - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::InvalidSystem("rho0 must have unit trace".into()));
        }
        if linalg::min_eigenvalue(rho) < -VALIDATION_TOL {
            return Err(Error::InvalidSystem("rho0 must be positive semidefinite".into()));
        }
        let emitters = channels.iter().filter(|c| c.is_emission).count();
        if emitters != 1 {
            return Err(Error::InvalidSystem(format!("exactly one emission channel required, found {emitters}")));
        }
        for c in &channels {
            if let Some(v) = c.rate.constant_value() {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidRate { name: "channel rate", value: v });
                }
            }
        }
        Ok(Self { label: label.into(), dim, h_static, h_drive, pulse, channels, rho0 })
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn h_static(&self) -> &Operator {
        &self.h_static
    }
    pub fn h_drive(&self) -> &Operator {
        &self.h_drive
    }
    pub fn pulse(&self) -> &PulseEnvelope {
        &self.pulse
    }
    pub fn channels(&self) -> &[CollapseChannel] {
        &self.channels
    }
    pub fn rho0(&self) -> &CMatrix {
        self.rho0.matrix()
    }

    pub fn emission_index(&self) -> usize {
        self.channels.iter().position(|c| c.is_emission).expect("validated")
    }

    pub fn emission(&self) -> &CollapseChannel {
        &self.channels[self.emission_index()]
    }

    pub fn rate_at(&self, channel: usize, t: f64) -> f64 {
        self.channels[channel].rate.at(&self.pulse, t)
    }

    pub fn emission_rate_at(&self, t: f64) -> f64 {
        self.rate_at(self.emission_index(), t)
    }

    pub fn hamiltonian_at(&self, t: f64) -> CMatrix {
        self.h_static.matrix() + self.h_drive.matrix().scale(0.5 * self.pulse.value(t))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_pulse(&self, pulse: PulseEnvelope) -> Self {
        let mut s = self.clone();
        s.pulse = pulse;
        s
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Ok(self.with_pulse(self.pulse.with_amplitude(amplitude)?))
    }

    pub fn with_rho0(&self, rho0: CMatrix) -> Result<Self> {
        Self::new(
            self.label.clone(),
            self.h_static.clone(),
            self.h_drive.clone(),
            self.pulse.clone(),
            self.channels.clone(),
            Operator::from_matrix(rho0)?,
        )
    }

    /// Starts the system in the pure basis state `|level⟩`.
    pub fn starting_in(&self, level: usize) -> Result<Self> {
        self.with_rho0(Operator::projector(self.dim, level)?.into_matrix())
    }

    /// Time windows with time-dependent terms, each with a step limit that
    /// resolves it.
    pub fn active_windows(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        let drive_used = self.h_drive.matrix().iter().any(|z| z.norm() > 0.0)
            || self.channels.iter().any(|c| c.rate == Rate::DriveSquared);
        if drive_used {
            out.extend(self.pulse.active_window());
        }
        for c in &self.channels {
            if let Rate::Envelope { envelope } = &c.rate {
                out.extend(envelope.active_window());
            }
        }
        out
    }

    /// Slowest total decay rate out of any level that has outgoing constant-rate
    /// channels; sets the tail of the default simulation window.
    pub fn slowest_decay_rate(&self) -> f64 {
        let mut out_rates = vec![0.0; self.dim];
        for c in &self.channels {
            let Some(rate) = c.rate.constant_value() else { continue };
            let m = c.operator.matrix();
            for from in 0..self.dim {
                let leaves = (0..self.dim).any(|to| to != from && m[(to, from)].norm() > 0.0);
                if leaves {
                    let weight: f64 = (0..self.dim).map(|to| m[(to, from)].norm_sqr()).sum();
                    out_rates[from] += rate * weight;
                }
            }
        }
        out_rates.into_iter().filter(|r| *r > 0.0).fold(f64::INFINITY, f64::min)
    }

    /// Default end of the simulation window: pulse end plus 14 lifetimes of
    /// the slowest decay, so that the residual population is below 1e-6.
    pub fn default_window_end(&self) -> f64 {
        let mut end = self.pulse.end_time().max(1.0);
        for (_, b, _) in self.active_windows() {
            end = end.max(b);
        }
        let gamma = self.slowest_decay_rate();
        let tail = if gamma.is_finite() { 14.0 / gamma } else { 14.0 };
        end + tail
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::InvalidRate { name, value });
    }
    Ok(())
}

fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(Error::InvalidRate { name, value });
    }
    Ok(())
}

/// Coherently driven two-level emitter in the frame rotating at the drive
/// frequency. Basis: `|g⟩ = 0`, `|e⟩ = 1`.
pub fn build_two_level(delta: f64, gamma: f64, pulse: PulseEnvelope) -> Result<SourceSystem> {
    check_positive("gamma", gamma)?;
    if !delta.is_finite() {
        return Err(Error::InvalidRate { name: "delta", value: delta });
    }
    let sigma = Operator::transition(2, 0, 1)?;
    let h_static = (&sigma.dagger() * &sigma).scaled(delta);
    let h_drive = &sigma + &sigma.dagger();
    SourceSystem::new(
        "two_level",
        h_static,
        h_drive,
        pulse,
        vec![CollapseChannel::new(sigma, Rate::constant(gamma), true)],
        Operator::projector(2, 0)?,
    )
}

/// Incoherently pumped ladder `|3⟩ → |2⟩ → |1⟩` (indices 2, 1, 0). The
/// pump channel `σ₂₃` has rate Ω(t)².
pub fn build_ladder(gamma12: f64, pump: PulseEnvelope) -> Result<SourceSystem> {
    check_positive("gamma12", gamma12)?;
    let sigma23 = Operator::transition(3, 1, 2)?;
    let sigma12 = Operator::transition(3, 0, 1)?;
    SourceSystem::new(
        "ladder",
        Operator::zeros(3),
        Operator::zeros(3),
        pump,
        vec![
            CollapseChannel::new(sigma23, Rate::DriveSquared, false),
            CollapseChannel::new(sigma12, Rate::constant(gamma12), true),
        ],
        Operator::projector(3, 2)?,
    )
}

/// Coherently driven lambda system: `|1⟩ ↔ |3⟩` is driven, `|3⟩` decays to
/// `|1⟩` (rate γ₁₃) and to the trap `|2⟩` (rate γ₂₃, monitored).
pub fn build_lambda(delta: f64, gamma13: f64, gamma23: f64, pulse: PulseEnvelope) -> Result<SourceSystem> {
    check_non_negative("gamma13", gamma13)?;
    check_positive("gamma23", gamma23)?;
    if !delta.is_finite() {
        return Err(Error::InvalidRate { name: "delta", value: delta });
    }
    let sigma13 = Operator::transition(3, 0, 2)?;
    let sigma23 = Operator::transition(3, 1, 2)?;
    let h_static = (&sigma13.dagger() * &sigma13).scaled(delta);
    let h_drive = &sigma13 + &sigma13.dagger();
    SourceSystem::new(
        "lambda",
        h_static,
        h_drive,
        pulse,
        vec![
            CollapseChannel::new(sigma13, Rate::constant(gamma13), false),
            CollapseChannel::new(sigma23, Rate::constant(gamma23), true),
        ],
        Operator::projector(3, 0)?,
    )
}

/// Appends a pure-dephasing channel `|level⟩⟨level|`.
pub fn add_dephasing(s: &SourceSystem, level: usize, rate: Rate) -> Result<SourceSystem> {
    if level >= s.dim {
        return Err(Error::IndexOutOfRange { index: level, dim: s.dim });
    }
    if let Some(v) = rate.constant_value() {
        check_non_negative("gamma_d", v)?;
    }
    let mut out = s.clone();
    out.channels.push(CollapseChannel::new(Operator::projector(s.dim, level)?, rate, false));
    Ok(out)
}

/// Splits the emission channel into fragments with rates `γ·wᵢ`; the first
/// fragment stays the monitored one.
pub fn split_emission(s: &SourceSystem, fractions: &[f64]) -> Result<SourceSystem> {
    if fractions.is_empty() || fractions.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidWeights("weights must be positive".into()));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
    }
    let k = s.emission_index();
    let original = s.channels[k].clone();
    let mut fragments = Vec::with_capacity(fractions.len());
    for (i, w) in fractions.iter().enumerate() {
        fragments.push(CollapseChannel::new(original.operator.clone(), original.rate.scaled(*w)?, i == 0));
    }
    let mut out = s.clone();
    out.channels.splice(k..=k, fragments);
    Ok(out)
}
