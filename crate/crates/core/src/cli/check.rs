//! Quick numerical self-test of the library's invariants.

use num_complex::Complex64 as C64;
use std::f64::consts::TAU;

use crate::analysis::fit_pulse_decay;
use crate::error::Result;
use crate::montecarlo::{average_observable, sample_configuration, DisorderModel};
use crate::physmodel::{single_atom_coefficients, DetuningGrid, EnsembleSpec, TimeGrid, TransferSpectrum};
use crate::spectral::{bidirectional_state, transfer_bidirectional, transfer_unidirectional};
use crate::timedomain::{atom_dynamics, propagate_pulse, synthesize_pulse, PulseSpec, TraceSampling};

/// Outcome of one self-test.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, value: f64, limit: f64) -> CheckResult {
    CheckResult { name, passed: value <= limit, detail: format!("{value:.3e} (limit {limit:.0e})") }
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

/// (t_N, r_N) of an array from the product of per-atom transfer matrices
/// acting on (right-moving, left-moving) amplitudes.
fn transfer_matrix_solution(delta: f64, ensemble: &EnsembleSpec) -> Result<(C64, C64)> {
    let mut m = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
    for n in 0..ensemble.n_atoms() {
        let (t, r) = single_atom_coefficients(delta, ensemble.beta()[n])?;
        let e = C64::from_polar(1.0, ensemble.phase()[n]);
        let a = [[(t * t - r * r) / t, r / (t * e)], [-r * e / t, 1.0 / t]];
        m = [
            [a[0][0] * m[0][0] + a[0][1] * m[1][0], a[0][0] * m[0][1] + a[0][1] * m[1][1]],
            [a[1][0] * m[0][0] + a[1][1] * m[1][0], a[1][0] * m[0][1] + a[1][1] * m[1][1]],
        ];
    }
    let r_n = -m[1][0] / m[1][1];
    Ok((m[0][0] + m[0][1] * r_n, r_n))
}

fn closed_form() -> Result<CheckResult> {
    let beta = 0.0055;
    let ensemble = EnsembleSpec::uniform(10_000, beta)?;
    let grid = DetuningGrid::new(0.0, 1.0, 2)?;
    let t = transfer_unidirectional(&grid, &ensemble).amplitude()[grid.center_index()];
    let od = -2.0 * 10_000.0 * (1.0 - 2.0 * beta).ln();
    Ok(outcome("resonant attenuation closed form", (t.norm_sqr() / (-od).exp() - 1.0).abs(), 1e-12))
}

fn small_system() -> Result<CheckResult> {
    let model = DisorderModel { beta_spread: 0.5, ..DisorderModel::random_positions(12, 0.05, 7) };
    let mut worst = 0.0f64;
    for index in 0..4 {
        let ensemble = sample_configuration(&model, index)?;
        for k in 0..64 {
            let delta = -8.0 + 0.25 * k as f64;
            let state = bidirectional_state(delta, &ensemble);
            let (t, r) = transfer_matrix_solution(delta, &ensemble)?;
            worst = worst.max(rel(state.transmission(), t)).max(rel(state.reflection(), r));
        }
    }
    Ok(outcome("bidirectional recursion against transfer matrices", worst, 1e-10))
}

fn propagation() -> Result<Vec<CheckResult>> {
    let grid = TimeGrid::new(0.0, 2e-3, 1 << 14)?;
    let spec = PulseSpec { t_on: 2.0, duration: 2.0, rise_fall: 0.05, carrier_detuning: 1.5, photon_number: 1.0 };
    let pulse = synthesize_pulse(&spec, &grid)?;
    let ensemble = sample_configuration(&DisorderModel::random_positions(150, 0.02, 3), 0)?;
    let medium = transfer_bidirectional(&grid.detuning_grid(spec.carrier_detuning), &ensemble).transmission;
    let out = propagate_pulse(&pulse, &medium)?;

    let c = C64::from_polar(0.7, 1.1);
    let scaled = propagate_pulse(&pulse.scaled(c), &medium)?;
    let linearity = scaled
        .envelope()
        .iter()
        .zip(out.envelope())
        .map(|(a, b)| (a - c * b).norm())
        .fold(0.0, f64::max)
        / out.envelope().iter().map(|a| a.norm()).fold(0.0, f64::max);

    let shift = 400;
    let delayed = propagate_pulse(&pulse.delayed(shift), &medium)?;
    let expected = out.delayed(shift);
    let invariance = delayed
        .envelope()
        .iter()
        .zip(expected.envelope())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / out.envelope().iter().map(|a| a.norm()).fold(0.0, f64::max);

    let leading = grid.index_at_or_after(spec.leading_edge()).unwrap();
    let early: f64 = out.power()[..leading].iter().sum();
    let total: f64 = out.power().iter().sum();

    let passive = out.photon_number() / pulse.photon_number() - 1.0;
    let identity = propagate_pulse(&pulse, &TransferSpectrum::identity(*medium.grid()))?;
    let round_trip = identity
        .envelope()
        .iter()
        .zip(pulse.envelope())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(vec![
        outcome("linearity", linearity, 1e-12),
        outcome("time invariance", invariance, 1e-12),
        outcome("causality", early / total, 1e-9),
        outcome("energy bound", passive.max(0.0), 1e-12),
        outcome("transform round trip", round_trip, 1e-12),
    ])
}

fn single_atom() -> Result<CheckResult> {
    let grid = TimeGrid::new(0.0, 1e-3, 1 << 15)?;
    let spec = PulseSpec { t_on: 1.0, duration: 4.0, rise_fall: 0.02, carrier_detuning: 0.0, photon_number: 1.0 };
    let pulse = synthesize_pulse(&spec, &grid)?;
    let traj = atom_dynamics(&pulse, &EnsembleSpec::uniform(1, 0.2)?, TraceSampling::full())?;
    let fit = fit_pulse_decay(&traj.times, &traj.traces[0], spec.switch_off(), 3.0, 0.05)?;
    Ok(outcome("single atom decays at the natural rate", (fit.rate - 1.0).abs(), 5e-3))
}

fn monte_carlo() -> Result<CheckResult> {
    let model = DisorderModel::random_positions(30, 0.05, 11);
    let obs = |e: &EnsembleSpec| Ok(vec![bidirectional_state(0.3, e).transmission().norm_sqr()]);
    let run = |threads| -> Result<Vec<f64>> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        Ok(pool.install(|| average_observable(&model, 200, obs))?.mean)
    };
    let (a, b) = (run(1)?, run(3)?);
    let differs = a.iter().zip(&b).any(|(x, y)| x.to_bits() != y.to_bits());
    Ok(CheckResult {
        name: "Monte Carlo mean independent of thread count",
        passed: !differs,
        detail: format!("{} vs {}", a[0], b[0]),
    })
}

fn uniform_phases() -> Result<CheckResult> {
    let model = DisorderModel::random_positions(1000, 0.01, 5);
    let mut counts = [0usize; 10];
    for index in 0..20 {
        for &p in sample_configuration(&model, index)?.phase() {
            counts[((p / TAU) * 10.0) as usize] += 1;
        }
    }
    let expected = 2000.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99.9th percentile of χ² with 9 degrees of freedom
    Ok(CheckResult { name: "phase draws are uniform", passed: chi2 < 27.88, detail: format!("χ² = {chi2:.2}") })
}

/// Run every self-test. Errors inside a test count as failures.
pub fn run_checks() -> Vec<CheckResult> {
    let mut results = Vec::new();
    let mut push = |r: Result<CheckResult>, name: &'static str| match r {
        Ok(r) => results.push(r),
        Err(e) => results.push(CheckResult { name, passed: false, detail: e.to_string() }),
    };
    push(closed_form(), "resonant attenuation closed form");
    push(small_system(), "bidirectional recursion against transfer matrices");
    match propagation() {
        Ok(rs) => rs.into_iter().for_each(|r| push(Ok(r), "")),
        Err(e) => push(Err(e), "propagation"),
    }
    push(single_atom(), "single atom decays at the natural rate");
    push(monte_carlo(), "Monte Carlo mean independent of thread count");
    push(uniform_phases(), "phase draws are uniform");
    results
}
