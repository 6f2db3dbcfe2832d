//! Adaptive Dormand–Prince 5(4) integrator for complex linear systems.

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { atol: 1e-10, rtol: 1e-7 }
    }
}

impl Tolerances {
    pub fn tight() -> Self {
        Self { atol: 1e-11, rtol: 1e-9 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

/// Reusable stepper with preallocated stage buffers.
#[derive(Clone, Debug)]
pub struct Dopri5 {
    tol: Tolerances,
    k: [Vec<C64>; 7],
    stage: Vec<C64>,
    y_new: Vec<C64>,
}

impl Dopri5 {
    pub fn new(n: usize, tol: Tolerances) -> Self {
        Self { tol, k: std::array::from_fn(|_| vec![ZERO; n]), stage: vec![ZERO; n], y_new: vec![ZERO; n] }
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// Attempts one step of size `h`, writing the fifth-order solution to
    /// `y_new` and returning the scaled error norm (accept when ≤ 1).
    pub fn attempt<F>(&mut self, f: &F, t: f64, y: &[C64], h: f64, y_new: &mut [C64]) -> f64
    where
        F: Fn(f64, &[C64], &mut [C64]),
    {
        let n = y.len();
        f(t, y, &mut self.k[0]);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = ZERO;
                for (j, a) in A[s].iter().enumerate().take(s) {
                    if *a != 0.0 {
                        acc += self.k[j][i] * *a;
                    }
                }
                self.stage[i] = y[i] + acc * h;
            }
            let (done, rest) = self.k.split_at_mut(s);
            let _ = done;
            f(t + C[s] * h, &self.stage, &mut rest[0]);
        }
        // The seventh stage was evaluated at the fifth-order solution.
        y_new.copy_from_slice(&self.stage);
        let mut sum = 0.0;
        for i in 0..n {
            let mut err = ZERO;
            for (s, e) in E.iter().enumerate() {
                if *e != 0.0 {
                    err += self.k[s][i] * *e;
                }
            }
            let err = (err * h).norm();
            let scale = self.tol.atol + self.tol.rtol * y[i].norm().max(y_new[i].norm());
            sum += (err / scale).powi(2);
        }
        (sum / n.max(1) as f64).sqrt()
    }

    /// Integrates `y` from `t0` to `t1`. `h` carries the step-size hint
    /// between calls. Returns the number of accepted steps.
    pub fn integrate<F>(&mut self, f: &F, t0: f64, t1: f64, y: &mut [C64], h: &mut f64, max_step: f64) -> Result<usize>
    where
        F: Fn(f64, &[C64], &mut [C64]),
    {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(0);
        }
        let mut t = t0;
        let max_step = if max_step > 0.0 { max_step } else { f64::INFINITY };
        if !(*h > 0.0) || !h.is_finite() {
            *h = span.min(max_step).min(0.1);
        }
        let mut y_new = std::mem::take(&mut self.y_new);
        y_new.resize(y.len(), ZERO);
        let mut steps = 0;
        while t < t1 {
            let remaining = t1 - t;
            let mut step = h.min(max_step);
            let last = step >= remaining * (1.0 - 1e-12);
            if last {
                step = remaining;
            }
            let err = self.attempt(f, t, y, step, &mut y_new);
            if !err.is_finite() {
                self.y_new = y_new;
                return Err(Error::IntegrationFailure(format!("non-finite state at t = {t}")));
            }
            if err <= 1.0 {
                t = if last { t1 } else { t + step };
                y.copy_from_slice(&y_new);
                steps += 1;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // A truncated final step says nothing about the natural step size.
                if !last || factor < 1.0 {
                    *h = step * factor;
                }
            } else {
                *h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
            if *h < 1e-14 * t.abs().max(1.0) {
                self.y_new = y_new;
                return Err(Error::Stiffness { t, h: *h });
            }
        }
        self.y_new = y_new;
        Ok(steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;

    #[test]
    fn exponential_decay_and_rotation() {
        // y' = (-0.5 + 3i) y
        let rate = C64::new(-0.5, 3.0);
        let f = |_t: f64, y: &[C64], dy: &mut [C64]| dy[0] = rate * y[0];
        let mut ode = Dopri5::new(1, Tolerances::tight());
        let mut y = vec![C64::new(1.0, 0.0)];
        let mut h = 0.0;
        ode.integrate(&f, 0.0, 4.0, &mut y, &mut h, 0.0).unwrap();
        let exact = (rate * 4.0).exp();
        assert!((y[0] - exact).norm() < 1e-8, "{} vs {}", y[0], exact);
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = i t y  =>  y = exp(i t²/2)
        let f = |t: f64, y: &[C64], dy: &mut [C64]| dy[0] = I * t * y[0];
        let mut ode = Dopri5::new(1, Tolerances::tight());
        let mut y = vec![C64::new(1.0, 0.0)];
        let mut h = 0.0;
        ode.integrate(&f, 0.0, 3.0, &mut y, &mut h, 0.0).unwrap();
        assert!((y[0] - (I * 4.5).exp()).norm() < 1e-7);
    }

    #[test]
    fn narrow_feature_is_resolved_with_max_step() {
        // y' = g(t) with a narrow Gaussian g centred at 1; y(2) = area.
        let s = 1e-3;
        let f = move |t: f64, _y: &[C64], dy: &mut [C64]| {
            dy[0] = C64::new((-(t - 1.0) * (t - 1.0) / (2.0 * s * s)).exp(), 0.0)
        };
        let mut ode = Dopri5::new(1, Tolerances::tight());
        let mut y = vec![ZERO];
        let mut h = 0.0;
        ode.integrate(&f, 0.0, 2.0, &mut y, &mut h, s / 2.0).unwrap();
        let area = s * (2.0 * std::f64::consts::PI).sqrt();
        assert!((y[0].re - area).abs() < 1e-9 * 10.0);
    }
}
