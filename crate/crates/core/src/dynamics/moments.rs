//! Pulse-wise scalars integrated directly by one adaptive ODE solve, without
//! sampling correlation grids.
//!
//! The factorial moments of the emission count come from the generating
//! hierarchy `ρ₁′ = 𝓛ρ₁ + 𝒥ρ`, `ρ₂′ = 𝓛ρ₂ + 𝒥ρ₁` with the jump superoperator
//! `𝒥ρ = γ(t)·aρa†`: `⟨M̂⟩ = Tr ρ₁(T)` and `E[m(m−1)] = 2 Tr ρ₂(T)`.
//! The first-order term `∫∫|G¹|²` uses `X(t) = ∫₀ᵗ γ(s) Λ_s(t) Λ_s(t)† ds`
//! where `Λ_s(t)` is the propagated `vec(ρ(s)a†)`; it obeys
//! `X′ = 𝓛X + X𝓛† + γ(t)·v v†` and the integral is `2∫ γ(t)·w X w̄ dt`.

use super::propagate::PropagationOptions;
use crate::error::Result;
use crate::linalg::{self, C64, ZERO};
use crate::model::{Generator, SourceSystem};
use crate::ode::Dopri5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactMoments {
    pub mean_photons: f64,
    /// `E[m(m−1)] = ∫∫ G²`.
    pub second_factorial: f64,
    /// `∫∫ |G¹|²`.
    pub g1_abs_sq: f64,
}

impl ExactMoments {
    pub fn g2_zero(&self) -> f64 {
        self.second_factorial / (self.mean_photons * self.mean_photons)
    }
    pub fn g1sq_zero(&self) -> f64 {
        self.g1_abs_sq / (self.mean_photons * self.mean_photons)
    }
}

/// Integrates the moment hierarchy over `[0, t_end]`.
pub fn exact_moments(s: &SourceSystem, t_end: f64, opts: PropagationOptions) -> Result<ExactMoments> {
    let gen = Generator::new(s);
    let d = s.dim();
    let n = d * d;
    let a = s.emission().operator.matrix().clone();
    let ad = a.adjoint();
    let jump = linalg::sandwich(&a, &ad);
    let w_a = linalg::trace_weights(&a);
    let w_conj: Vec<C64> = w_a.iter().map(|z| z.conj()).collect();
    let right_ad = linalg::right(&ad);

    // Layout: ρ | ρ₁ | ρ₂ | X (column-major n×n) | accumulator.
    let (o1, o2, ox, oacc) = (n, 2 * n, 3 * n, 3 * n + n * n);
    let len = oacc + 1;
    let mut y = vec![ZERO; len];
    y[..n].copy_from_slice(&linalg::vectorize(s.rho0()));

    let f = |t: f64, y: &[C64], dy: &mut [C64]| {
        let l = gen.matrix_at(t);
        let r = s.emission_rate_at(t);
        let rho = nalgebra::DVectorView::from_slice(&y[..n], n);
        let jr = &jump * rho * C64::new(r, 0.0);
        let r1 = nalgebra::DVectorView::from_slice(&y[o1..o2], n);
        let jr1 = &jump * r1 * C64::new(r, 0.0);
        let r2 = nalgebra::DVectorView::from_slice(&y[o2..ox], n);
        dy[..n].copy_from_slice((&l * rho).as_slice());
        dy[o1..o2].copy_from_slice((&l * r1 + jr).as_slice());
        dy[o2..ox].copy_from_slice((&l * r2 + jr1).as_slice());
        let x = nalgebra::DMatrixView::from_slice(&y[ox..oacc], n, n);
        let v = &right_ad * rho;
        let dx = &l * x + x * l.adjoint() + (&v * v.adjoint()) * C64::new(r, 0.0);
        dy[ox..oacc].copy_from_slice(dx.as_slice());
        let xw = x * nalgebra::DVector::from_column_slice(&w_conj);
        dy[oacc] = linalg::dot(&w_a, xw.as_slice()) * r;
    };

    let mut ode = Dopri5::new(len, opts.tol);
    let mut h = 0.0;
    let mut cuts = vec![0.0, t_end];
    for &(lo, hi, _) in gen.windows() {
        for c in [lo, hi] {
            if c > 0.0 && c < t_end {
                cuts.push(c);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let max_step = gen
            .windows()
            .iter()
            .filter(|&&(lo, hi, _)| mid > lo && mid < hi)
            .map(|&(_, _, step)| step)
            .fold(f64::INFINITY, f64::min);
        if h > max_step {
            h = max_step;
        }
        ode.integrate(&f, w[0], w[1], &mut y, &mut h, max_step)?;
    }
    let tr = |v: &[C64]| linalg::trace(&linalg::unvectorize(v, d)).re;
    Ok(ExactMoments {
        mean_photons: tr(&y[o1..o2]),
        second_factorial: 2.0 * tr(&y[o2..ox]),
        g1_abs_sq: 2.0 * y[oacc].re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_lambda, build_two_level, PulseEnvelope};
    use crate::ode::Tolerances;

    fn tight() -> PropagationOptions {
        PropagationOptions { tol: Tolerances::tight(), exact_static: false }
    }

    #[test]
    fn undriven_excited_emitter() {
        let s = build_two_level(0.0, 1.0, PulseEnvelope::off()).unwrap().starting_in(1).unwrap();
        let m = exact_moments(&s, 30.0, tight()).unwrap();
        assert!((m.mean_photons - 1.0).abs() < 1e-9);
        assert!(m.second_factorial.abs() < 1e-12);
        assert!((m.g1sq_zero() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn lambda_source_is_pure_single_photon() {
        let s = build_lambda(0.0, 0.0, 1.0, PulseEnvelope::gaussian(1.5, 5.0, 1.0).unwrap()).unwrap();
        let m = exact_moments(&s, 30.0, tight()).unwrap();
        assert!(m.second_factorial.abs() < 1e-12);
        assert!((m.g1sq_zero() - 1.0).abs() < 1e-6, "{}", m.g1sq_zero());
    }

    #[test]
    fn coherent_limit_of_weak_long_drive() {
        // A driven two-level emitter has g² > 0 once re-excitation is possible.
        let s = build_two_level(0.0, 1.0, PulseEnvelope::gaussian(1.0, 15.0, 5.0).unwrap()).unwrap();
        let m = exact_moments(&s, 40.0, tight()).unwrap();
        assert!(m.g2_zero() > 0.2 && m.g2_zero() < 1.0, "{}", m.g2_zero());
        assert!(m.g1sq_zero() < 1.0);
    }
}
