use crate::error::Result;
use crate::linalg::{self, C64, ONE, ZERO};
use crate::model::{Generator, SourceSystem};
use crate::ode::{Dopri5, Tolerances};

/// How intervals are advanced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationOptions {
    pub tol: Tolerances,
    /// Use the exact propagator `exp(L·dt)` on grid intervals where the
    /// generator is constant; otherwise every interval goes through the
    /// adaptive integrator.
    pub exact_static: bool,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), exact_static: true }
    }
}

impl PropagationOptions {
    pub fn adaptive_only() -> Self {
        Self { exact_static: false, ..Self::default() }
    }
}

/// Advances vectorized operators under the master-equation generator.
pub struct Propagator {
    generator: Generator,
    opts: PropagationOptions,
    cached: Option<(f64, Vec<C64>)>,
}

/// Per-thread integrator state.
pub struct Workspace {
    ode: Dopri5,
    h: f64,
    scratch: Vec<C64>,
}

impl Workspace {
    /// Forgets the step-size hint so that a new propagation does not depend
    /// on what this workspace integrated before.
    pub fn reset(&mut self) {
        self.h = 0.0;
    }
}

impl Propagator {
    pub fn new(s: &SourceSystem, opts: PropagationOptions) -> Self {
        Self { generator: Generator::new(s), opts, cached: None }
    }

    /// Precomputes `exp(L_static·dt)` for grid steps of length `dt`.
    pub fn with_step(mut self, dt: f64) -> Self {
        if self.opts.exact_static {
            let m = (self.generator.static_matrix() * C64::new(dt, 0.0)).exp();
            self.cached = Some((dt, linalg::row_major(&m)));
        }
        self
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn workspace(&self) -> Workspace {
        let n = self.generator.len();
        Workspace { ode: Dopri5::new(n, self.opts.tol), h: 0.0, scratch: vec![ZERO; n] }
    }

    /// Advances `y` from `ta` to `tb`.
    pub fn advance(&self, ws: &mut Workspace, ta: f64, tb: f64, y: &mut [C64]) -> Result<()> {
        if tb <= ta {
            return Ok(());
        }
        if let Some((dt, m)) = &self.cached {
            if ((tb - ta) - dt).abs() <= 1e-9 * dt && self.generator.is_static_on(ta, tb) {
                ws.scratch.iter_mut().for_each(|z| *z = ZERO);
                linalg::gemv_acc(m, y.len(), y, ONE, &mut ws.scratch);
                y.copy_from_slice(&ws.scratch);
                return Ok(());
            }
        }
        let g = &self.generator;
        let f = |t: f64, v: &[C64], dv: &mut [C64]| g.apply(t, v, dv);
        // Split at window edges so that steps never skip a pulse.
        let mut cuts = vec![ta, tb];
        for &(lo, hi, _) in g.windows() {
            for c in [lo, hi] {
                if c > ta && c < tb {
                    cuts.push(c);
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            let max_step = g
                .windows()
                .iter()
                .filter(|&&(lo, hi, _)| mid > lo && mid < hi)
                .map(|&(_, _, step)| step)
                .fold(f64::INFINITY, f64::min);
            if max_step.is_finite() && ws.h > max_step {
                ws.h = max_step;
            }
            ws.ode.integrate(&f, a, b, y, &mut ws.h, max_step)?;
        }
        Ok(())
    }
}
