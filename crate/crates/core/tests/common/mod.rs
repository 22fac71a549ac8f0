#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wgqed::analysis::{fit_decay, fit_pulse_decay};
use wgqed::montecarlo::{average_observable, sample_configuration, DisorderModel};
use wgqed::physmodel::{single_atom_coefficients, EnsembleSpec, TimeGrid, TransferSpectrum};
use wgqed::spectral::{bidirectional_state, transfer_bidirectional};
use wgqed::timedomain::{atom_dynamics, propagate_pulse, synthesize_pulse, PulseSpec, PulseWaveform, TraceSampling};

/// A measured quantity and the bound it must respect.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.limit
    }

    pub fn line(&self) -> String {
        format!("{}: {:.3e} (limit {:.1e})", self.name, self.value, self.limit)
    }
}

/// Random couplings in [0.001, 0.45] and uniform phases.
pub fn random_ensemble(n: usize, seed: u64) -> EnsembleSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta = (0..n).map(|_| rng.gen_range(0.001..0.45)).collect();
    let phase = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    EnsembleSpec::new(beta, phase).unwrap()
}

/// Direct solve of the scattering equations of the whole array.
///
/// Unknowns are the right-moving amplitude after each atom, a_2..a_{N+1},
/// and the left-moving amplitude before each atom, b_1..b_N, for unit
/// incidence from the left (a_1 = 1) and nothing incident from the right
/// (b_{N+1} = 0). Atom n obeys
///   a_{n+1} = t a_n + r e^{-iθ_n} b_{n+1}
///   b_n     = r e^{iθ_n} a_n + t b_{n+1}.
/// Returns (a_{N+1}, b_1).
pub fn scattering_solve(delta: f64, ensemble: &EnsembleSpec) -> (C64, C64) {
    let n = ensemble.n_atoms();
    let a = |k: usize| k - 2; // a_k, k in 2..=N+1
    let b = |k: usize| n + k - 1; // b_k, k in 1..=N
    let mut m = DMatrix::<C64>::zeros(2 * n, 2 * n);
    let mut rhs = DVector::<C64>::zeros(2 * n);
    let one = C64::new(1.0, 0.0);
    for atom in 1..=n {
        let (t, r) = single_atom_coefficients(delta, ensemble.beta()[atom - 1]).unwrap();
        let e = C64::from_polar(1.0, ensemble.phase()[atom - 1]);
        let (row_a, row_b) = (2 * (atom - 1), 2 * (atom - 1) + 1);

        m[(row_a, a(atom + 1))] = one;
        if atom == 1 {
            rhs[row_a] += t;
        } else {
            m[(row_a, a(atom))] -= t;
        }
        if atom < n {
            m[(row_a, b(atom + 1))] -= r / e;
        }

        m[(row_b, b(atom))] = one;
        if atom == 1 {
            rhs[row_b] += r * e;
        } else {
            m[(row_b, a(atom))] -= r * e;
        }
        if atom < n {
            m[(row_b, b(atom + 1))] -= t;
        }
    }
    let x = m.lu().solve(&rhs).expect("scattering system is regular");
    (x[a(n + 1)], x[b(1)])
}

/// (t_N, r_N) from the product of 2×2 transfer matrices acting on
/// (right-moving, left-moving) amplitudes.
pub fn transfer_matrix_solve(delta: f64, ensemble: &EnsembleSpec) -> (C64, C64) {
    let mut total = nalgebra::Matrix2::<C64>::identity();
    for n in 0..ensemble.n_atoms() {
        let (t, r) = single_atom_coefficients(delta, ensemble.beta()[n]).unwrap();
        let e = C64::from_polar(1.0, ensemble.phase()[n]);
        let m = nalgebra::Matrix2::new((t * t - r * r) / t, r / (t * e), -r * e / t, 1.0 / t);
        total = m * total;
    }
    let r_n = -total[(1, 0)] / total[(1, 1)];
    (total[(0, 0)] + total[(0, 1)] * r_n, r_n)
}

pub fn relative(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn peak(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// A pulse through a disordered array on a grid long enough that nothing
/// wraps around.
pub struct PropagationCase {
    pub spec: PulseSpec,
    pub pulse: PulseWaveform,
    pub medium: TransferSpectrum,
    pub output: PulseWaveform,
}

pub fn propagation_case() -> PropagationCase {
    let grid = TimeGrid::new(0.0, 2e-3, 1 << 14).unwrap();
    let spec = PulseSpec { t_on: 2.0, duration: 2.0, rise_fall: 0.05, carrier_detuning: 1.5, photon_number: 1.0 };
    let pulse = synthesize_pulse(&spec, &grid).unwrap();
    let ensemble = sample_configuration(&DisorderModel::random_positions(150, 0.02, 3), 0).unwrap();
    let medium = transfer_bidirectional(&grid.detuning_grid(spec.carrier_detuning), &ensemble).transmission;
    let output = propagate_pulse(&pulse, &medium).unwrap();
    PropagationCase { spec, pulse, medium, output }
}

pub fn linearity(case: &PropagationCase) -> Check {
    let c = C64::from_polar(0.7, 1.1);
    let scaled = propagate_pulse(&case.pulse.scaled(c), &case.medium).unwrap();
    let expected: Vec<C64> = case.output.envelope().iter().map(|a| c * a).collect();
    Check {
        name: "linearity",
        value: max_abs_diff(scaled.envelope(), &expected) / peak(&expected),
        limit: 1e-12,
    }
}

pub fn time_invariance(case: &PropagationCase) -> Check {
    let shift = 400;
    let delayed = propagate_pulse(&case.pulse.delayed(shift), &case.medium).unwrap();
    let out = case.output.envelope();
    let n = out.len();
    let expected: Vec<C64> = (0..n).map(|j| out[(j + n - shift) % n]).collect();
    Check {
        name: "time invariance",
        value: max_abs_diff(delayed.envelope(), &expected) / peak(out),
        limit: 1e-12,
    }
}

pub fn causality(case: &PropagationCase) -> Check {
    let grid = case.pulse.grid();
    let first = (0..grid.len()).find(|&j| case.pulse.envelope()[j].norm() > 0.0).unwrap();
    let power = case.output.power();
    let early: f64 = power[..first].iter().sum();
    let total: f64 = power.iter().sum();
    Check { name: "causality", value: early / total, limit: 1e-9 }
}

pub fn energy_bound(case: &PropagationCase) -> Check {
    let ratio = case.output.photon_number() / case.pulse.photon_number();
    Check { name: "energy bound", value: (ratio - 1.0).max(0.0), limit: 1e-12 }
}

/// Largest |t_N|² + |r_N|² − 1 over random arrays and detunings; must stay
/// below zero.
pub fn passivity() -> Check {
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..20 {
        let ensemble = random_ensemble(1 + (seed as usize * 7) % 40, seed);
        for k in 0..200 {
            let delta = -20.0 + 0.2 * k as f64 + 0.013;
            let s = bidirectional_state(delta, &ensemble);
            worst = worst.max(s.transmission().norm_sqr() + s.reflection().norm_sqr() - 1.0);
        }
    }
    Check { name: "passivity", value: worst, limit: 0.0 }
}

/// Γ_coll against the population-weighted mean of the single-atom rates
/// −ṗ_n/p_n, both by centred differences.
pub fn gamma_coll_identity() -> Check {
    let grid = TimeGrid::new(0.0, 1e-3, 1 << 14).unwrap();
    let spec = PulseSpec { t_on: 1.0, duration: 5.0, rise_fall: 0.03, carrier_detuning: 2.0, photon_number: 1.0 };
    let pulse = synthesize_pulse(&spec, &grid).unwrap();
    let ensemble = EnsembleSpec::uniform(60, 0.0055).unwrap();
    let traj = atom_dynamics(&pulse, &ensemble, TraceSampling::full()).unwrap();
    let dt = grid.step();
    let mut worst = 0.0f64;
    for j in 1..traj.times.len() - 1 {
        let Some(g) = traj.gamma_coll[j] else { continue };
        let (mut num, mut den) = (0.0, 0.0);
        for p in &traj.traces {
            if p[j] > 0.0 {
                let rate = -(p[j + 1] - p[j - 1]) / (2.0 * dt) / p[j];
                num += p[j] * rate;
                den += p[j];
            }
        }
        worst = worst.max((g - num / den).abs() / g.abs().max(1.0));
    }
    Check { name: "collective rate equals weighted single-atom rates", value: worst, limit: 1e-6 }
}

/// Refit of the trace generated by a fitted model.
pub fn fit_self_consistency(case: &PropagationCase) -> Check {
    let times = case.pulse.grid().times();
    let fit = fit_pulse_decay(&times, &case.output.power(), case.spec.switch_off(), 1.0, 0.05).unwrap();
    let model: Vec<f64> = times.iter().map(|&t| fit.model(t)).collect();
    let refit = fit_decay(&times, &model, fit.window.0, fit.window.1).unwrap();
    Check {
        name: "fit self-consistency",
        value: (refit.rate - fit.rate).abs() / fit.rate,
        limit: 1e-9,
    }
}

fn resonant_transmission(e: &EnsembleSpec) -> wgqed::Result<Vec<f64>> {
    Ok(vec![bidirectional_state(0.0, e).transmission().norm_sqr()])
}

/// Largest number of bits-differing means across thread counts (0 passes).
pub fn monte_carlo_determinism() -> Check {
    let model = DisorderModel::random_positions(40, 0.02, 99);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| average_observable(&model, 300, resonant_transmission).unwrap())
    };
    let reference = run(1);
    let differing = [2, 3, 4]
        .into_iter()
        .map(run)
        .filter(|e| {
            e.mean[0].to_bits() != reference.mean[0].to_bits() || e.stderr[0].to_bits() != reference.stderr[0].to_bits()
        })
        .count();
    Check { name: "Monte Carlo determinism across thread counts", value: differing as f64, limit: 0.0 }
}

/// Worst relative deviation of stderr(n)·√n from its value at n = 100 for
/// n in {10², 10³, 10⁴}.
pub fn monte_carlo_scaling() -> Check {
    let model = DisorderModel::random_positions(40, 0.02, 2024);
    let scaled: Vec<f64> = [100u64, 1000, 10_000]
        .iter()
        .map(|&n| average_observable(&model, n, resonant_transmission).unwrap().stderr[0] * (n as f64).sqrt())
        .collect();
    let worst = scaled.iter().map(|s| (s / scaled[0] - 1.0).abs()).fold(0.0, f64::max);
    Check { name: "standard error scales as 1/sqrt(n)", value: worst, limit: 0.2 }
}

/// Every property of the suite.
pub fn property_suite() -> Vec<Check> {
    let case = propagation_case();
    vec![
        linearity(&case),
        time_invariance(&case),
        causality(&case),
        passivity(),
        energy_bound(&case),
        gamma_coll_identity(),
        fit_self_consistency(&case),
        monte_carlo_determinism(),
        monte_carlo_scaling(),
    ]
}
