use num_complex::Complex64 as C64;

use crate::physmodel::{lorentzian, DetuningGrid, EnsembleSpec, TransferSpectrum};

/// Transmission of atom `n` at detuning `delta`, including its resonance shift.
#[inline]
pub(crate) fn atom_t(ensemble: &EnsembleSpec, n: usize, delta: f64) -> C64 {
    C64::new(1.0, 0.0) - lorentzian(delta - ensemble.shift(n), ensemble.beta()[n])
}

/// Forward transmission neglecting back-reflection: ∏_n t_n(Δ).
///
/// Phases play no role here; only β and the resonance shifts enter.
pub fn transfer_unidirectional(grid: &DetuningGrid, ensemble: &EnsembleSpec) -> TransferSpectrum {
    let n_atoms = ensemble.n_atoms();
    if ensemble.is_homogeneous() {
        let beta = ensemble.beta()[0];
        TransferSpectrum::from_fn(*grid, |d| {
            (C64::new(1.0, 0.0) - lorentzian(d, beta)).powi(n_atoms as i32)
        })
    } else {
        TransferSpectrum::from_fn(*grid, |d| {
            (0..n_atoms).fold(C64::new(1.0, 0.0), |acc, n| acc * atom_t(ensemble, n, d))
        })
    }
}

/// Excitation amplitude of every atom for a monochromatic drive at `delta`.
///
/// Normalised to a unit incident photon flux (one photon per 1/Γ0), so that
/// φ_n = i(t_n − 1)/√β_n · ∏_{j<n} t_j. For identical atoms this is the
/// geometric sequence i(t − 1)t^{n−1}/√β.
pub fn excitation_amplitudes(delta: f64, ensemble: &EnsembleSpec) -> Vec<C64> {
    let mut incident = C64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(ensemble.n_atoms());
    for n in 0..ensemble.n_atoms() {
        let t = atom_t(ensemble, n, delta);
        out.push(C64::i() * (t - 1.0) / ensemble.beta()[n].sqrt() * incident);
        incident *= t;
    }
    out
}
