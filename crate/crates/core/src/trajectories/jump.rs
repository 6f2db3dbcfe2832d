use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, I, ZERO};
use crate::model::{Rate, SourceSystem};
use crate::ode::{Dopri5, Tolerances};

/// Norm² tolerance when locating a jump.
pub const JUMP_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Detector {
    C,
    D,
}

impl Detector {
    pub fn label(self) -> &'static str {
        match self {
            Detector::C => "c",
            Detector::D => "d",
        }
    }
}

/// One emission-channel jump. `detector` is set once the click has been
/// routed through the HBT beamsplitter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Click {
    pub time: f64,
    pub detector: Option<Detector>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClickRecord {
    pub trial: usize,
    pub clicks: Vec<Click>,
}

impl ClickRecord {
    pub fn count(&self) -> usize {
        self.clicks.len()
    }

    pub fn count_on(&self, detector: Detector) -> usize {
        self.clicks.iter().filter(|c| c.detector == Some(detector)).count()
    }

    /// Click times strictly increasing and inside `[t_start, t_end]`.
    pub fn is_well_formed(&self, t_start: f64, t_end: f64) -> bool {
        self.clicks.windows(2).all(|w| w[0].time < w[1].time)
            && self.clicks.iter().all(|c| c.time >= t_start && c.time <= t_end)
    }
}

/// Non-Hermitian `H_eff(t) = H(t) − (i/2) Σ r_k(t) C_k†C_k` split into a
/// constant part and time-dependent terms.
struct EffectiveHamiltonian {
    dim: usize,
    base: CMatrix,
    drive: CMatrix,
    timed: Vec<(usize, CMatrix)>,
    channels: Vec<CMatrix>,
}

impl EffectiveHamiltonian {
    fn new(s: &SourceSystem) -> Self {
        let mut base = s.h_static().matrix().clone();
        let mut timed = Vec::new();
        let channels: Vec<CMatrix> = s.channels().iter().map(|c| c.operator.matrix().clone()).collect();
        for (k, c) in s.channels().iter().enumerate() {
            let cdc = c.operator.matrix().adjoint() * c.operator.matrix() * C64::new(0.0, -0.5);
            match c.rate {
                Rate::Constant { value } => base += cdc.scale(value),
                _ => timed.push((k, cdc)),
            }
        }
        let drive = s.h_drive().matrix().scale(0.5);
        Self { dim: s.dim(), base, drive, timed, channels }
    }

    fn apply(&self, s: &SourceSystem, t: f64, y: &[C64], dy: &mut [C64]) {
        let d = self.dim;
        let omega = s.pulse().value(t);
        let coeffs: Vec<f64> = self.timed.iter().map(|(k, _)| s.rate_at(*k, t)).collect();
        for i in 0..d {
            let mut acc = ZERO;
            for j in 0..d {
                let mut h = self.base[(i, j)];
                if omega != 0.0 {
                    h += self.drive[(i, j)] * omega;
                }
                for ((_, m), c) in self.timed.iter().zip(&coeffs) {
                    if *c != 0.0 {
                        h += m[(i, j)] * *c;
                    }
                }
                acc += h * y[j];
            }
            dy[i] = -I * acc;
        }
    }
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Pure states and weights whose mixture is `rho0`.
fn initial_ensemble(s: &SourceSystem) -> Vec<(f64, Vec<C64>)> {
    let eig = s.rho0().clone().symmetric_eigen();
    let mut out: Vec<(f64, Vec<C64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > 1e-14)
        .map(|(k, p)| (*p, eig.eigenvectors.column(k).iter().cloned().collect()))
        .collect();
    let total: f64 = out.iter().map(|(p, _)| p).sum();
    out.iter_mut().for_each(|(p, _)| *p /= total);
    out
}

fn pick(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w / total;
        if u < acc {
            return k;
        }
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// Trial-specific generator: the master seed selects the key and the trial
/// index selects an independent stream.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

struct Unraveling<'a> {
    s: &'a SourceSystem,
    heff: EffectiveHamiltonian,
    ensemble: Vec<(f64, Vec<C64>)>,
    cuts: Vec<f64>,
    windows: Vec<(f64, f64, f64)>,
    emission: usize,
    t_end: f64,
}

impl<'a> Unraveling<'a> {
    fn new(s: &'a SourceSystem, g: &TimeGrid) -> Self {
        let windows = s.active_windows();
        let mut cuts = vec![g.t_start(), g.t_end()];
        for &(lo, hi, _) in &windows {
            for c in [lo, hi] {
                if c > g.t_start() && c < g.t_end() {
                    cuts.push(c);
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self {
            s,
            heff: EffectiveHamiltonian::new(s),
            ensemble: initial_ensemble(s),
            cuts,
            windows,
            emission: s.emission_index(),
            t_end: g.t_end(),
        }
    }

    fn max_step(&self, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        self.windows
            .iter()
            .filter(|&&(lo, hi, _)| mid > lo && mid < hi)
            .map(|&(_, _, step)| step)
            .fold(f64::INFINITY, f64::min)
    }

    fn run(&self, trial: usize, seed: u64) -> Result<ClickRecord> {
        let mut rng = trial_rng(seed, trial);
        let weights: Vec<f64> = self.ensemble.iter().map(|(p, _)| *p).collect();
        let start = if self.ensemble.len() == 1 { 0 } else { pick(&weights, rng.random::<f64>()) };
        let mut psi = self.ensemble[start].1.clone();
        let d = psi.len();
        let f = |t: f64, y: &[C64], dy: &mut [C64]| self.heff.apply(self.s, t, y, dy);
        let mut ode = Dopri5::new(d, Tolerances::default());
        let mut trial_state = vec![ZERO; d];
        let mut probe = vec![ZERO; d];
        let mut target = uniform_open(&mut rng);
        let mut clicks = Vec::new();
        let mut t = self.cuts[0];
        let mut h: f64 = 0.0;
        for seg in self.cuts.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let max_step = self.max_step(a, b);
            if !(h > 0.0) {
                h = (b - a).min(max_step).min(0.1);
            }
            h = h.min(max_step);
            while t < b {
                let remaining = b - t;
                let mut step = h.min(max_step);
                let last = step >= remaining * (1.0 - 1e-12);
                if last {
                    step = remaining;
                }
                let err = ode.attempt(&f, t, &psi, step, &mut trial_state);
                if !err.is_finite() {
                    return Err(Error::IntegrationFailure(format!("non-finite state at t = {t}")));
                }
                if err > 1.0 {
                    h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                    if h < 1e-14 * t.abs().max(1.0) {
                        return Err(Error::Stiffness { t, h });
                    }
                    continue;
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || factor < 1.0 {
                    h = step * factor;
                }
                if norm_sqr(&trial_state) > target {
                    psi.copy_from_slice(&trial_state);
                    t = if last { b } else { t + step };
                    continue;
                }
                // The norm² crossed the target inside this step; bisect on
                // the step length from the accepted starting point.
                let (mut lo, mut hi) = (0.0, step);
                probe.copy_from_slice(&trial_state);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let mut mid_state = vec![ZERO; d];
                    ode.attempt(&f, t, &psi, mid, &mut mid_state);
                    let n2 = norm_sqr(&mid_state);
                    if n2 > target {
                        lo = mid;
                    } else {
                        hi = mid;
                        probe.copy_from_slice(&mid_state);
                    }
                    if (n2 - target).abs() <= JUMP_TOL {
                        hi = mid;
                        probe.copy_from_slice(&mid_state);
                        break;
                    }
                    if hi - lo <= 1e-15 * t.abs().max(1.0) {
                        break;
                    }
                }
                let t_jump = t + hi;
                let rates: Vec<f64> = (0..self.heff.channels.len())
                    .map(|k| {
                        let v = &self.heff.channels[k] * DVector::from_column_slice(&probe);
                        self.s.rate_at(k, t_jump) * v.norm_squared()
                    })
                    .collect();
                if !(rates.iter().sum::<f64>() > 0.0) {
                    return Err(Error::IntegrationFailure(format!("no jump channel available at t = {t_jump}")));
                }
                let k = pick(&rates, rng.random::<f64>());
                let jumped = &self.heff.channels[k] * DVector::from_column_slice(&probe);
                let norm = jumped.norm();
                for (p, z) in psi.iter_mut().zip(jumped.iter()) {
                    *p = z / norm;
                }
                if k == self.emission {
                    clicks.push(Click { time: t_jump, detector: None });
                }
                target = uniform_open(&mut rng);
                t = t_jump;
                if t >= b {
                    t = b;
                }
            }
        }
        debug_assert!(t >= self.t_end);
        Ok(ClickRecord { trial, clicks })
    }
}

/// Quantum-jump unraveling of `s` over the grid window, one record per trial.
/// Each trial draws from its own stream keyed by `(seed, trial)`, so the
/// output does not depend on how trials are scheduled.
pub fn run_trajectories(s: &SourceSystem, g: &TimeGrid, n_trials: usize, seed: u64) -> Result<Vec<ClickRecord>> {
    if n_trials == 0 {
        return Err(Error::InvalidDetection("need at least one trial".into()));
    }
    let u = Unraveling::new(s, g);
    (0..n_trials).into_par_iter().map(|trial| u.run(trial, seed)).collect()
}
