mod common;

use sps_core::coherence::{
    adjacent_period_correlations, analyze_source, delay_shift, hom_cross_auto_reference, hom_cross_general,
    hom_identical, hom_normalization_reference, hom_short_time_intensity, hom_single_photon_overlap, mz_five_peaks,
    mz_identical, normalized_to_unit_flux, SplitterSpec,
};
use sps_core::dynamics::{recommended_grid_until, CorrelationGrid, CorrelationKind, TimeGrid};
use sps_core::model::{add_dephasing, build_lambda, build_two_level, PulseEnvelope, Rate, SourceSystem};
use sps_core::CMatrix;

fn flux(g1: &CorrelationGrid) -> f64 {
    g1.grid().trapezoid(&g1.diagonal().iter().map(|z| z.re).collect::<Vec<_>>())
}

fn zero_g2(g: &TimeGrid) -> CorrelationGrid {
    CorrelationGrid::new(*g, CMatrix::zeros(g.len(), g.len()), CorrelationKind::G2).unwrap()
}

#[test]
fn free_decay_is_a_pure_wavepacket() {
    let s = build_two_level(0.0, 1.0, PulseEnvelope::off()).unwrap().starting_in(1).unwrap();
    let a = analyze_source(&s, &TimeGrid::new(0.0, 25.0, 801).unwrap()).unwrap();
    assert!((a.summary.g1sq_zero - 1.0).abs() <= 1e-6, "{}", a.summary.g1sq_zero);
    assert!(a.summary.g2_zero.abs() <= 1e-10);
}

#[test]
fn long_ladder_pump_randomizes_the_phase() {
    let (_, a) = common::calibrated_analysis(&common::ladder(3.3));
    assert!(a.summary.g1sq_zero < 1.0 - 1e-3, "{}", a.summary.g1sq_zero);
    assert!(a.summary.g2_zero.abs() <= 1e-8);
}

#[test]
fn lambda_keeps_full_coherence() {
    for fwhm in [0.1, 1.0] {
        let (_, a) = common::calibrated_analysis(&common::lambda(fwhm));
        assert!((a.summary.g1sq_zero - 1.0).abs() <= 1e-4, "fwhm {fwhm}: {}", a.summary.g1sq_zero);
        assert!(a.summary.g2_zero.abs() <= 1e-8);
    }
}

fn dephased(base: &SourceSystem, level: usize, gamma_d: f64) -> SourceSystem {
    if gamma_d == 0.0 {
        base.clone()
    } else {
        add_dephasing(base, level, Rate::constant(gamma_d)).unwrap()
    }
}

#[test]
fn dephasing_never_raises_first_order_coherence() {
    let pulse = PulseEnvelope::gaussian_with_area(std::f64::consts::PI, 2.0, 0.4).unwrap();
    let bases =
        [(build_two_level(0.0, 1.0, pulse.clone()).unwrap(), 1), (build_lambda(0.0, 0.0, 1.0, pulse).unwrap(), 2)];
    for (base, level) in bases {
        let mut last = f64::INFINITY;
        for gamma_d in [0.0, 0.1, 0.3, 1.0, 3.0, 10.0] {
            let s = dephased(&base, level, gamma_d);
            let g = recommended_grid_until(&s, 25.0).unwrap();
            let v = analyze_source(&s, &g).unwrap().summary.g1sq_zero;
            assert!(v <= last + 1e-9, "γ_d {gamma_d}: {v} > {last}");
            last = v;
        }
        assert!(last < 0.5, "{last}");
    }
}

#[test]
fn strongly_dephased_lambda_loses_coherence() {
    let s = dephased(&common::lambda(1.0).with_amplitude(2.0).unwrap(), 2, 10.0);
    let g = recommended_grid_until(&s, 25.0).unwrap();
    assert!(analyze_source(&s, &g).unwrap().summary.g1sq_zero < 1.0 - 1e-3);
}

#[test]
fn cauchy_schwarz_holds_for_simulated_sources() {
    let sources = [
        common::two_level(0.1).with_amplitude(15.0).unwrap(),
        common::two_level(2.0).with_amplitude(1.0).unwrap(),
        common::ladder(1.0).with_amplitude(2.0).unwrap(),
        common::lambda(0.5).with_amplitude(4.0).unwrap(),
        dephased(&common::two_level(1.0).with_amplitude(2.0).unwrap(), 1, 0.5),
    ];
    for s in sources {
        let g = recommended_grid_until(&s, 20.0).unwrap();
        let v = analyze_source(&s, &g).unwrap().summary;
        assert!(v.g1sq_zero <= 1.0 + 1e-6, "{v:?}");
        assert!(v.consistency_error() <= 1e-15);
    }
}

#[test]
fn general_hom_reduces_to_identical_sources() {
    for s in [common::two_level(1.0), common::ladder(3.3)] {
        let (_, a) = common::calibrated_analysis(&s);
        let m = a.summary.mean_photons;
        let general = hom_cross_general(&a.g1, &a.g1, &a.g2, &a.g2, m, m).unwrap();
        assert!((general - hom_identical(a.summary.g2_zero, a.summary.g1sq_zero)).abs() <= 1e-10);
    }
}

/// Calibrated lambda photons of two pulse lengths on one shared grid.
fn lambda_pair(fa: f64, fb: f64, t_end: f64) -> (CorrelationGrid, CorrelationGrid) {
    let (ca, cb) = (common::calibrated(&common::lambda(fa)), common::calibrated(&common::lambda(fb)));
    let ga = recommended_grid_until(&ca.system, t_end).unwrap();
    let gb = recommended_grid_until(&cb.system, t_end).unwrap();
    let g = if ga.len() >= gb.len() { ga } else { gb };
    let a = analyze_source(&ca.system, &g).unwrap().g1;
    let b = analyze_source(&cb.system, &g).unwrap().g1;
    (normalized_to_unit_flux(&a).unwrap(), normalized_to_unit_flux(&b).unwrap())
}

#[test]
fn different_pulse_lengths_never_interfere_perfectly() {
    let (short, long) = lambda_pair(0.1, 3.3, 35.0);
    let dt = short.grid().dt();
    let (mut best, mut best_delay) = (f64::INFINITY, 0.0);
    for k in 0..=60 {
        let delay = 0.1 * k as f64;
        let shifted = delay_shift(&short, (delay / dt).round() as i64).unwrap();
        let v = hom_single_photon_overlap(&normalized_to_unit_flux(&shifted).unwrap(), &long).unwrap();
        if v < best {
            (best, best_delay) = (v, delay);
        }
    }
    assert!(best > 1e-3 && best < 0.5 - 1e-3, "best {best} at delay {best_delay}");
    assert!(best_delay > 0.0, "{best_delay}");
}

#[test]
fn single_photon_overlap_matches_general_hom_without_g2() {
    let (a, b) = lambda_pair(0.5, 2.0, 25.0);
    let z = zero_g2(a.grid());
    let general = hom_cross_general(&a, &b, &z, &z, 1.0, 1.0).unwrap();
    let overlap = hom_single_photon_overlap(&a, &b).unwrap();
    assert!((general - overlap).abs() <= 1e-8, "{general} vs {overlap}");
    assert!((0.0..=0.5 + 1e-9).contains(&overlap));
    assert!(hom_single_photon_overlap(&a, &a).unwrap().abs() <= 1e-10);
}

#[test]
fn identical_single_photons_cancel_and_distant_ones_do_not() {
    let c = common::calibrated(&common::lambda(0.5));
    let g = recommended_grid_until(&c.system, 40.0).unwrap();
    let a = analyze_source(&c.system, &g).unwrap();
    let m = a.summary.mean_photons;
    assert!(hom_cross_general(&a.g1, &a.g1, &a.g2, &a.g2, m, m).unwrap().abs() <= 1e-6);
    let steps = (25.0 / g.dt()).round() as i64;
    let (g1b, g2b) = (delay_shift(&a.g1, steps).unwrap(), delay_shift(&a.g2, steps).unwrap());
    let v = hom_cross_general(&a.g1, &g1b, &a.g2, &g2b, m, flux(&g1b)).unwrap();
    assert!((v - 0.5).abs() <= 1e-3, "{v}");
}

#[test]
fn shifting_preserves_flux_and_lowers_self_overlap() {
    let c = common::calibrated(&common::lambda(1.0));
    let g = recommended_grid_until(&c.system, 35.0).unwrap();
    let g1 = normalized_to_unit_flux(&analyze_source(&c.system, &g).unwrap().g1).unwrap();
    assert_eq!(delay_shift(&g1, 0).unwrap(), g1);
    let dt = g.dt();
    let mut last = f64::INFINITY;
    for k in 0..=20 {
        let steps = (0.25 * k as f64 / dt).round() as i64;
        let shifted = delay_shift(&g1, steps).unwrap();
        assert!((flux(&shifted) - 1.0).abs() <= 1e-8, "steps {steps}: {}", flux(&shifted));
        let ov = g1.overlap(&shifted).unwrap();
        assert!(ov <= last + 1e-12, "steps {steps}: {ov} > {last}");
        last = ov;
    }
    assert!(last < 0.5);
    assert!(delay_shift(&g1, g.len() as i64).is_err());
}

#[test]
fn adjacent_period_references_add_up() {
    let (ca, cb) = (common::calibrated(&common::two_level(0.5)), common::calibrated(&common::lambda(2.0)));
    let g = recommended_grid_until(&ca.system, 25.0).unwrap();
    let a = analyze_source(&ca.system, &g).unwrap();
    let b = analyze_source(&cb.system, &g).unwrap();
    let (ma, mb) = (a.summary.mean_photons, b.summary.mean_photons);
    let (cross, auto) = adjacent_period_correlations(&a.g1, &b.g1).unwrap();
    let reference = hom_normalization_reference(ma, mb);
    assert!((hom_cross_auto_reference(cross, auto, auto) - reference).abs() <= 1e-10 * reference);
    assert!((2.0 * cross + 2.0 * auto - (ma + mb).powi(2)).abs() <= 1e-10);

    let (cross, _) = adjacent_period_correlations(&b.g1, &b.g1).unwrap();
    assert!((cross - hom_short_time_intensity(mb, mb)).abs() <= 1e-6, "{cross}");
}

#[test]
fn balanced_five_peaks_from_simulated_sources() {
    for s in [common::two_level(0.5), common::two_level(3.3), common::ladder(1.0)] {
        let (_, a) = common::calibrated_analysis(&s);
        let v = a.summary;
        let p = mz_five_peaks(v.g2_zero, v.g1sq_zero, &SplitterSpec::balanced());
        assert_eq!(p.at(-2), p.at(2));
        assert_eq!(p.at(-1), p.at(1));
        assert!((p.center() - mz_identical(v.g2_zero, v.g1sq_zero)).abs() <= 1e-12);
        assert!((-2..=2).all(|n| p.at(n) >= 0.0));
    }
}
