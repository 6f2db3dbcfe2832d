mod common;

use proptest::prelude::*;
use sps_core::dynamics::{evolve, mean_photon_number, recommended_grid, TimeGrid};
use sps_core::model::{
    add_dephasing, build_ladder, build_lambda, build_two_level, liouvillian_at, split_emission, PulseEnvelope, Rate,
    SourceSystem,
};
use sps_core::{CMatrix, C64};

fn mean_photons(s: &SourceSystem, t_end: f64) -> f64 {
    let g = sps_core::dynamics::recommended_grid_until(s, t_end).unwrap();
    mean_photon_number(s, &evolve(s, &g).unwrap())
}

#[test]
fn gaussian_envelope_examples() {
    let p = PulseEnvelope::gaussian(1.0, 0.0, 1.0).unwrap();
    assert_eq!(p.gaussian_value(0.0).unwrap(), 1.0);
    assert!((p.gaussian_value(0.5).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    let p = PulseEnvelope::gaussian(2.0, 5.0, 0.1).unwrap();
    assert_eq!(p.gaussian_value(5.0).unwrap(), 2.0);
}

#[test]
fn impulsive_ladder_pump_releases_one_photon() {
    // ∫Ω² dt = 30 leaves e^{-30} in the top level.
    let fwhm = 1e-3;
    let sigma = sps_core::model::sigma_from_fwhm(fwhm);
    let amplitude = (30.0 / (sigma * std::f64::consts::PI.sqrt())).sqrt();
    let pump = PulseEnvelope::gaussian(amplitude, 1.0, fwhm).unwrap();
    let s = build_ladder(1.0, pump).unwrap();
    // The flux switches on within one step, so the grid has to be fine.
    let g = TimeGrid::new(0.0, 20.0, 20_001).unwrap();
    let m = mean_photon_number(&s, &evolve(&s, &g).unwrap());
    assert!((m - 1.0).abs() <= 1e-3, "{m}");
}

#[test]
fn ladder_without_pump_stays_in_the_top_level() {
    let s = build_ladder(1.0, PulseEnvelope::off()).unwrap();
    let traj = evolve(&s, &TimeGrid::new(0.0, 50.0, 101).unwrap()).unwrap();
    for p in traj.population(2) {
        assert_eq!(p, 1.0);
    }
}

#[test]
fn constant_ladder_pump_follows_rate_equations() {
    let (r, gamma, t_end) = (0.4f64, 1.0, 12.0);
    let pump = PulseEnvelope::sampled(vec![(0.0, r.sqrt()), (t_end, r.sqrt())]).unwrap();
    let s = build_ladder(gamma, pump).unwrap();
    let g = TimeGrid::new(0.0, t_end, 241).unwrap();
    let traj = evolve(&s, &g).unwrap();
    let (p3, p2) = (traj.population(2), traj.population(1));
    for (k, t) in g.times().into_iter().enumerate() {
        let want3 = (-r * t).exp();
        let want2 = r / (gamma - r) * ((-r * t).exp() - (-gamma * t).exp());
        assert!((p3[k] - want3).abs() <= 1e-6, "t={t}: {} vs {want3}", p3[k]);
        assert!((p2[k] - want2).abs() <= 1e-6, "t={t}: {} vs {want2}", p2[k]);
    }
}

#[test]
fn lambda_trap_population_equals_emitted_photons() {
    let s = common::lambda(1.0).with_amplitude(1.3).unwrap();
    let g = recommended_grid(&s).unwrap();
    let traj = evolve(&s, &g).unwrap();
    let trap = *traj.population(1).last().unwrap();
    let m = mean_photon_number(&s, &traj);
    assert!((trap - m).abs() <= 1e-4, "{trap} vs {m}");
}

#[test]
fn undriven_lambda_is_stationary() {
    let s = build_lambda(0.0, 0.0, 1.0, PulseEnvelope::off()).unwrap();
    let traj = evolve(&s, &TimeGrid::new(0.0, 20.0, 41).unwrap()).unwrap();
    for rho in &traj.states {
        assert_eq!(rho, s.rho0());
    }
}

#[test]
fn pi_pulses_release_one_photon() {
    let pulse = PulseEnvelope::gaussian_with_area(std::f64::consts::PI, 1.0, 0.01).unwrap();
    let lambda = build_lambda(0.0, 0.0, 1.0, pulse.clone()).unwrap();
    assert!((mean_photons(&lambda, 15.0) - 1.0).abs() <= 2e-2);
    let two_level = build_two_level(0.0, 1.0, pulse).unwrap();
    assert!((mean_photons(&two_level, 15.0) - 1.0).abs() <= 2e-2);
}

#[test]
fn split_emission_halves_the_monitored_flux() {
    let s = common::two_level(1.0).with_amplitude(1.5).unwrap();
    let split = split_emission(&s, &[0.5, 0.5]).unwrap();
    let t = 20.0;
    for time in [0.0, 1.0, 5.0] {
        assert!(
            sps_core::linalg::max_abs(&(liouvillian_at(&s, time).matrix - liouvillian_at(&split, time).matrix))
                <= 1e-14
        );
    }
    let (m, m_split) = (mean_photons(&s, t), mean_photons(&split, t));
    assert!((m_split - 0.5 * m).abs() <= 1e-6, "{m_split} vs {m}");
    assert_eq!(split_emission(&s, &[1.0]).unwrap(), s);
}

#[test]
fn single_excitation_splits_by_branching_fraction() {
    // γ₁₃ = γ₂₃: half of the decays reach the monitored trap transition.
    let s = build_lambda(0.0, 1.0, 1.0, PulseEnvelope::off()).unwrap().starting_in(2).unwrap();
    let g = TimeGrid::new(0.0, 30.0, 3001).unwrap();
    let a = sps_core::coherence::analyze_source(&s, &g).unwrap();
    assert!((a.summary.mean_photons - 0.5).abs() <= 1e-4, "{}", a.summary.mean_photons);
    assert!(a.g2.max_abs() <= 1e-10);
}

#[test]
fn system_definitions_round_trip_through_json() {
    let s = add_dephasing(&common::ladder(0.5), 1, Rate::constant(0.3)).unwrap();
    let text = serde_json::to_string(&s).unwrap();
    let back: SourceSystem = serde_json::from_str(&text).unwrap();
    assert_eq!(back, s);
}

fn arb_system() -> impl Strategy<Value = SourceSystem> {
    (0usize..3, 0.05f64..4.0, 0.0f64..3.0, -2.0f64..2.0, 0.0f64..1.0).prop_map(|(kind, fwhm, amp, delta, gd)| {
        let pulse = PulseEnvelope::centered_gaussian(amp, fwhm).unwrap();
        let s = match kind {
            0 => build_two_level(delta, 1.0, pulse).unwrap(),
            1 => build_ladder(1.0, pulse).unwrap(),
            _ => build_lambda(delta, 0.2, 1.0, pulse).unwrap(),
        };
        add_dephasing(&s, 1, Rate::constant(gd)).unwrap()
    })
}

fn arb_state(dim: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        let a = CMatrix::from_iterator(dim, dim, v.into_iter().map(|(re, im)| C64::new(re, im)));
        let rho = &a * a.adjoint();
        let tr = sps_core::linalg::trace(&rho);
        rho / tr
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generators_preserve_trace(s in arb_system(), t in 0.0f64..20.0) {
        let l = liouvillian_at(&s, t);
        prop_assert!(l.trace_defect() <= 1e-12);
    }

    #[test]
    fn evolution_keeps_states_physical((s, rho) in arb_system().prop_flat_map(|s| {
        let d = s.dim();
        (Just(s), arb_state(d))
    })) {
        let s = s.with_rho0(rho).unwrap();
        let g = TimeGrid::new(0.0, s.default_window_end().min(30.0), 64).unwrap();
        let h = evolve(&s, &g).unwrap().hygiene();
        prop_assert!(h.max_hermiticity_error <= 1e-10);
        prop_assert!(h.min_eigenvalue >= -1e-8);
        prop_assert!(h.max_trace_error <= 1e-8);
    }

    #[test]
    fn zero_dephasing_and_trivial_split_change_nothing(s in arb_system(), t in 0.0f64..10.0) {
        let d = add_dephasing(&s, 0, Rate::constant(0.0)).unwrap();
        let split = split_emission(&s, &[0.25, 0.75]).unwrap();
        let l = liouvillian_at(&s, t).matrix;
        prop_assert!(sps_core::linalg::max_abs(&(&l - liouvillian_at(&d, t).matrix)) <= 1e-14);
        prop_assert!(sps_core::linalg::max_abs(&(&l - liouvillian_at(&split, t).matrix)) <= 1e-14);
    }

    #[test]
    fn gaussian_is_symmetric_with_closed_form_area(amp in 0.1f64..5.0, center in 0.0f64..10.0, fwhm in 0.01f64..5.0, x in 0.0f64..3.0) {
        let p = PulseEnvelope::gaussian(amp, center, fwhm).unwrap();
        let dx = x * fwhm;
        let (l, r) = (p.gaussian_value(center + dx).unwrap(), p.gaussian_value(center - dx).unwrap());
        prop_assert!((l - r).abs() <= 1e-12 * amp);
        let s = sps_core::model::sigma_from_fwhm(fwhm);
        let n = 4001;
        let (a, b) = (center - 10.0 * s, center + 10.0 * s);
        let h = (b - a) / (n - 1) as f64;
        let area: f64 = (0..n).map(|k| {
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            w * p.gaussian_value(a + k as f64 * h).unwrap()
        }).sum::<f64>() * h;
        let want = amp * s * (2.0 * std::f64::consts::PI).sqrt();
        prop_assert!((area - want).abs() <= 1e-6 * want);
    }
}
