mod common;

use common::*;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use wgqed::montecarlo::{sample_configuration, DisorderModel};
use wgqed::physmodel::{atom_number_to_od, od_to_atom_number, single_atom_coefficients, EnsembleSpec};
use wgqed::spectral::bidirectional_state;

fn assert_check(c: Check) {
    assert!(c.passed(), "{}", c.line());
}

#[test]
fn propagation_properties() {
    let case = propagation_case();
    assert_check(linearity(&case));
    assert_check(time_invariance(&case));
    assert_check(causality(&case));
    assert_check(energy_bound(&case));
    assert_check(fit_self_consistency(&case));
}

#[test]
fn random_arrays_are_passive() {
    assert_check(passivity());
}

#[test]
fn collective_rate_is_weighted_mean_of_atom_rates() {
    assert_check(gamma_coll_identity());
}

#[test]
fn averages_do_not_depend_on_thread_count() {
    assert_check(monte_carlo_determinism());
}

#[test]
fn standard_error_shrinks_as_inverse_root() {
    assert_check(monte_carlo_scaling());
}

#[test]
fn phases_pass_chi_square_uniformity() {
    let model = DisorderModel::random_positions(1000, 0.01, 31);
    let bins = 20;
    let mut counts = vec![0u64; bins];
    let mut total = 0u64;
    for index in 0..100 {
        for &p in sample_configuration(&model, index).unwrap().phase() {
            counts[(p / std::f64::consts::TAU * bins as f64) as usize] += 1;
            total += 1;
        }
    }
    assert_eq!(total, 100_000);
    let expected = total as f64 / bins as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2 = {chi2}, p = {p}");
}

#[test]
fn global_phase_leaves_transmission_unchanged() {
    let ensemble = random_ensemble(9, 4);
    for k in 0..50 {
        let delta = -5.0 + 0.2 * k as f64;
        let a = bidirectional_state(delta, &ensemble).transmission();
        let b = bidirectional_state(delta, &ensemble.with_phase_offset(1.234)).transmission();
        assert!(relative(b, a) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_atom_loses_a_fraction_in_unit_interval(delta in -100.0f64..100.0, beta in 1e-6f64..0.5) {
        let (t, r) = single_atom_coefficients(delta, beta).unwrap();
        let loss = 1.0 - t.norm_sqr() - r.norm_sqr();
        prop_assert!((-1e-15..=1.0).contains(&loss));
        prop_assert!((t - r - 1.0).norm() < 1e-15);
    }

    #[test]
    fn single_atom_transmission_grows_with_detuning(a in 0.0f64..50.0, b in 0.0f64..50.0, beta in 1e-4f64..0.5) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let t_lo = single_atom_coefficients(lo, beta).unwrap().0.norm();
        let t_hi = single_atom_coefficients(-hi, beta).unwrap().0.norm();
        prop_assert!(t_hi >= t_lo - 1e-15);
    }

    #[test]
    fn atom_number_survives_od_round_trip(n in 1usize..20_000, beta in 1e-4f64..0.45) {
        prop_assert_eq!(od_to_atom_number(atom_number_to_od(n, beta), beta).unwrap(), n);
    }

    #[test]
    fn recursion_matches_scattering_solve(n in 1usize..=12, seed in any::<u64>(), delta in -15.0f64..15.0) {
        let ensemble = random_ensemble(n, seed);
        let s = bidirectional_state(delta, &ensemble);
        let (t, r) = scattering_solve(delta, &ensemble);
        prop_assert!(relative(s.transmission(), t) < 1e-10);
        prop_assert!(relative(s.reflection(), r) < 1e-10);
    }

    #[test]
    fn lossless_atoms_conserve_flux(n in 1usize..30, seed in any::<u64>(), delta in -5.0f64..5.0) {
        let phases = random_ensemble(n, seed).phase().to_vec();
        let ensemble = EnsembleSpec::new(vec![0.5; n], phases).unwrap();
        let s = bidirectional_state(delta, &ensemble);
        prop_assert!((s.transmission().norm_sqr() + s.reflection().norm_sqr() - 1.0).abs() < 1e-9);
    }
}
