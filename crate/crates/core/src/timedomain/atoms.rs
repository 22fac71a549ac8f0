use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::propagate::PulseSpectrum;
use super::pulse::PulseWaveform;
use crate::error::{Error, Result};
use crate::physmodel::{EnsembleSpec, TimeGrid};
use crate::spectral::atom_t;

/// Atoms per work item. Fixed so that the reduction order, and hence every
/// bit of the result, is independent of the number of worker threads.
const ATOM_BLOCK: usize = 32;

/// Γ_coll is masked where E(t) drops below this fraction of its maximum.
pub const ENERGY_FLOOR: f64 = 1e-12;

/// Delay after switch-off at which the collective rate is read, in 1/Γ0.
pub const DEFAULT_SETTLE_DELAY: f64 = 0.02;

/// Which part of the time grid to keep in the per-atom traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSampling {
    pub t_start: f64,
    pub t_end: f64,
    pub stride: usize,
}

impl TraceSampling {
    pub fn full() -> Self {
        TraceSampling { t_start: f64::NEG_INFINITY, t_end: f64::INFINITY, stride: 1 }
    }

    fn indices(&self, grid: &TimeGrid) -> Vec<usize> {
        (0..grid.len())
            .step_by(self.stride.max(1))
            .filter(|&j| {
                let t = grid.time(j);
                t >= self.t_start && t <= self.t_end
            })
            .collect()
    }
}

/// Excited-state populations of every atom plus the collective quantities
/// derived from them.
#[derive(Debug, Clone)]
pub struct AtomTrajectorySet {
    /// Sample times of the stored traces.
    pub times: Vec<f64>,
    /// `traces[n][j]` is p_n at `times[j]`.
    pub traces: Vec<Vec<f64>>,
    /// E(t) = Σ_n p_n(t) at `times`.
    pub energy: Vec<f64>,
    /// Γ_coll(t) = −Ė/E at `times`; `None` where E is below the floor.
    pub gamma_coll: Vec<Option<f64>>,
}

/// Walk over the atoms in fixed blocks, handing each atom's complex
/// excitation amplitude c_n(t) to `visit`. Returns one accumulator per block,
/// in atom order.
fn visit_atoms<R, I, F>(spectrum: &PulseSpectrum, ensemble: &EnsembleSpec, init: I, visit: F) -> Vec<R>
where
    R: Send,
    I: Fn() -> R + Sync,
    F: Fn(&mut R, usize, &[C64]) + Sync,
{
    let grid = *spectrum.grid();
    let len = grid.len();
    let n_atoms = ensemble.n_atoms();
    let starts: Vec<usize> = (0..n_atoms).step_by(ATOM_BLOCK).collect();

    // field incident on the first atom of every block, ∏_{j<start} t_j(Δ)
    let mut prefixes = Vec::with_capacity(starts.len());
    let mut running = vec![C64::new(1.0, 0.0); len];
    let last = *starts.last().expect("ensemble has at least one atom");
    for n in 0..=last {
        if n % ATOM_BLOCK == 0 {
            prefixes.push(running.clone());
        }
        if n < last {
            for (k, r) in running.iter_mut().enumerate() {
                *r *= atom_t(ensemble, n, grid.detuning(k));
            }
        }
    }

    starts
        .into_par_iter()
        .zip(prefixes)
        .map(|(start, mut incident)| {
            let mut acc = init();
            let mut scratch = Vec::new();
            for n in start..(start + ATOM_BLOCK).min(n_atoms) {
                let coupling = C64::i() / ensemble.beta()[n].sqrt();
                let mut drive = Vec::with_capacity(len);
                for (k, (inc, u)) in incident.iter_mut().zip(spectrum.values()).enumerate() {
                    let t = atom_t(ensemble, n, grid.detuning(k));
                    drive.push(u * coupling * (t - 1.0) * *inc);
                    *inc *= t;
                }
                let amplitude = spectrum.transforms().to_time(drive, &mut scratch);
                visit(&mut acc, n, &amplitude);
            }
            acc
        })
        .collect()
}

fn sum_in_order(parts: Vec<Vec<f64>>, len: usize) -> Vec<f64> {
    let mut total = vec![0.0; len];
    for part in parts {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}

/// Total stored excitation E(t) = Σ_n p_n(t) on the full time grid, without
/// keeping the per-atom traces.
pub fn energy_trace(pulse: &PulseWaveform, ensemble: &EnsembleSpec) -> Result<Vec<f64>> {
    let spectrum = PulseSpectrum::new(pulse)?;
    let len = pulse.grid().len();
    let parts = visit_atoms(&spectrum, ensemble, || vec![0.0; len], |acc, _, c| {
        for (e, a) in acc.iter_mut().zip(c) {
            *e += a.norm_sqr();
        }
    });
    Ok(sum_in_order(parts, len))
}

/// Γ_coll = −Ė/E by centred differences, masked below the energy floor and
/// at the two ends of the grid.
pub fn collective_rate_trace(energy: &[f64], dt: f64) -> Vec<Option<f64>> {
    let max = energy.iter().cloned().fold(0.0, f64::max);
    let floor = ENERGY_FLOOR * max;
    (0..energy.len())
        .map(|j| {
            if j == 0 || j + 1 == energy.len() || energy[j] < floor || energy[j] <= 0.0 {
                None
            } else {
                Some(-(energy[j + 1] - energy[j - 1]) / (2.0 * dt) / energy[j])
            }
        })
        .collect()
}

/// Per-atom excited-state probabilities p_n(t) = |F⁻¹[u_in(Δ)·φ_n(Δ)]|².
///
/// The pulse envelope is a photon flux, so the traces are probabilities for
/// the pulse's photon number. Collective quantities are computed on the full
/// grid and then sampled like the traces.
pub fn atom_dynamics(
    pulse: &PulseWaveform,
    ensemble: &EnsembleSpec,
    sampling: TraceSampling,
) -> Result<AtomTrajectorySet> {
    let spectrum = PulseSpectrum::new(pulse)?;
    let grid = *pulse.grid();
    let len = grid.len();
    let keep = sampling.indices(&grid);
    let parts = visit_atoms(
        &spectrum,
        ensemble,
        || (vec![0.0; len], Vec::new()),
        |(energy, traces): &mut (Vec<f64>, Vec<Vec<f64>>), _, c| {
            for (e, a) in energy.iter_mut().zip(c) {
                *e += a.norm_sqr();
            }
            traces.push(keep.iter().map(|&j| c[j].norm_sqr()).collect());
        },
    );
    let mut energy_parts = Vec::with_capacity(parts.len());
    let mut traces = Vec::with_capacity(ensemble.n_atoms());
    for (e, t) in parts {
        energy_parts.push(e);
        traces.extend(t);
    }
    let energy_full = sum_in_order(energy_parts, len);
    let gamma_full = collective_rate_trace(&energy_full, grid.step());
    Ok(AtomTrajectorySet {
        times: keep.iter().map(|&j| grid.time(j)).collect(),
        energy: keep.iter().map(|&j| energy_full[j]).collect(),
        gamma_coll: keep.iter().map(|&j| gamma_full[j]).collect(),
        traces,
    })
}

/// Collective decay rate read `settle` after the switch-off time `t_off`.
pub fn collective_rate_at_switchoff(traj: &AtomTrajectorySet, t_off: f64, settle: f64) -> Result<f64> {
    let target = t_off + settle;
    let j = traj
        .times
        .iter()
        .position(|&t| t >= target)
        .ok_or_else(|| Error::invalid("t_off", format!("{target} lies beyond the stored traces")))?;
    traj.gamma_coll[j].ok_or(Error::BelowFloor { time: traj.times[j] })
}
