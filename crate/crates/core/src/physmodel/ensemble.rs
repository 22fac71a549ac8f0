use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Waveguide coupling ratio of the nanofiber-trapped Cs atoms.
pub const DEFAULT_BETA: f64 = 0.55e-2;

/// A discrete array of two-level emitters along the waveguide.
///
/// `phase[n]` is the round-trip propagation phase 2·k·x_n, used only by the
/// bidirectional model. `resonance_shift[n]`, when present, moves the
/// resonance of atom `n` by the given amount (in Γ0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    beta: Vec<f64>,
    phase: Vec<f64>,
    resonance_shift: Option<Vec<f64>>,
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 && beta <= 0.5 {
        Ok(())
    } else {
        Err(Error::invalid("beta", format!("must lie in (0, 0.5], got {beta}")))
    }
}

impl EnsembleSpec {
    pub fn new(beta: Vec<f64>, phase: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::invalid("n_atoms", "ensemble needs at least one atom"));
        }
        if beta.len() != phase.len() {
            return Err(Error::invalid(
                "phase",
                format!("{} phases for {} atoms", phase.len(), beta.len()),
            ));
        }
        for &b in &beta {
            check_beta(b)?;
        }
        if let Some(p) = phase.iter().find(|p| !p.is_finite()) {
            return Err(Error::invalid("phase", format!("non-finite phase {p}")));
        }
        Ok(EnsembleSpec { beta, phase, resonance_shift: None })
    }

    /// `n_atoms` identical atoms, all at phase zero.
    pub fn uniform(n_atoms: usize, beta: f64) -> Result<Self> {
        Self::new(vec![beta; n_atoms], vec![0.0; n_atoms])
    }

    pub fn with_resonance_shift(mut self, shift: Vec<f64>) -> Result<Self> {
        if shift.len() != self.beta.len() {
            return Err(Error::invalid(
                "resonance_shift",
                format!("{} shifts for {} atoms", shift.len(), self.beta.len()),
            ));
        }
        if shift.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("resonance_shift", "non-finite shift"));
        }
        self.resonance_shift = Some(shift);
        Ok(self)
    }

    pub fn n_atoms(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn resonance_shift(&self) -> Option<&[f64]> {
        self.resonance_shift.as_deref()
    }

    /// Shift of atom `n`, zero when no broadening is configured.
    #[inline]
    pub fn shift(&self, n: usize) -> f64 {
        self.resonance_shift.as_ref().map_or(0.0, |s| s[n])
    }

    /// True when every atom has the same β and no resonance shift, so the
    /// medium response is a plain power t(Δ)^N.
    pub fn is_homogeneous(&self) -> bool {
        let b0 = self.beta[0];
        self.beta.iter().all(|&b| b == b0)
            && self.resonance_shift.as_ref().map_or(true, |s| s.iter().all(|&x| x == 0.0))
    }

    /// Optical depth −ln|t_N(0)|² of the unbroadened array.
    pub fn optical_depth(&self) -> f64 {
        self.beta.iter().map(|&b| -2.0 * (1.0 - 2.0 * b).ln()).sum()
    }

    /// Same array with every phase shifted by `offset`, wrapped to [0, 2π).
    pub fn with_phase_offset(&self, offset: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.phase {
            *p = (*p + offset).rem_euclid(TAU);
        }
        out
    }

    /// Atom order reversed.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.beta.reverse();
        out.phase.reverse();
        if let Some(s) = out.resonance_shift.as_mut() {
            s.reverse();
        }
        out
    }
}

/// Lorentzian scattering term β/(1/2 + iΔ) of a single atom.
#[inline]
pub(crate) fn lorentzian(delta: f64, beta: f64) -> C64 {
    C64::new(beta, 0.0) / C64::new(0.5, delta)
}

/// Single-atom transmission and reflection amplitudes at detuning `delta`.
///
/// t = 1 − β/(1/2 + iΔ) and r = −β/(1/2 + iΔ), so t − r = 1.
pub fn single_atom_coefficients(delta: f64, beta: f64) -> Result<(C64, C64)> {
    check_beta(beta)?;
    let r = -lorentzian(delta, beta);
    Ok((C64::new(1.0, 0.0) + r, r))
}

/// Number of atoms whose resonant power transmission (1−2β)^{2N} equals e^{−OD}.
pub fn od_to_atom_number(od: f64, beta: f64) -> Result<usize> {
    if !(od.is_finite() && od >= 0.0) {
        return Err(Error::invalid("od", format!("must be non-negative, got {od}")));
    }
    if !(beta.is_finite() && beta > 0.0 && beta < 0.5) {
        return Err(Error::invalid("beta", format!("must lie in (0, 0.5), got {beta}")));
    }
    Ok((-od / (2.0 * (1.0 - 2.0 * beta).ln())).round() as usize)
}

/// Optical depth of `n_atoms` identical atoms.
pub fn atom_number_to_od(n_atoms: usize, beta: f64) -> f64 {
    -2.0 * n_atoms as f64 * (1.0 - 2.0 * beta).ln()
}
