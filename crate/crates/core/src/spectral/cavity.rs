use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::physmodel::TransferSpectrum;

/// Denominator modulus below which a cavity grid point is flagged.
pub const CAVITY_EPSILON: f64 = 1e-12;

/// Fiber ring resonator enclosing the atomic medium.
///
/// `tau_rt` is the roundtrip delay in 1/Γ0 and `phi0` the static roundtrip
/// phase at the atomic resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySpec {
    t_rt: f64,
    t_c: C64,
    tau_rt: f64,
    phi0: f64,
}

impl CavitySpec {
    pub fn new(t_rt: f64, t_c: C64, tau_rt: f64, phi0: f64) -> Result<Self> {
        if !(t_rt > 0.0 && t_rt <= 1.0) {
            return Err(Error::invalid("t_rt", format!("must lie in (0, 1], got {t_rt}")));
        }
        if !(t_c.norm() <= 1.0) {
            return Err(Error::invalid("t_c", format!("|t_c| must not exceed 1, got {}", t_c.norm())));
        }
        if !(tau_rt.is_finite() && tau_rt > 0.0) {
            return Err(Error::invalid("tau_rt", format!("must be positive, got {tau_rt}")));
        }
        if !phi0.is_finite() {
            return Err(Error::invalid("phi0", "must be finite"));
        }
        Ok(CavitySpec { t_rt, t_c, tau_rt, phi0 })
    }

    pub fn t_rt(&self) -> f64 {
        self.t_rt
    }

    pub fn t_c(&self) -> C64 {
        self.t_c
    }

    pub fn tau_rt(&self) -> f64 {
        self.tau_rt
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// Roundtrip phase Φ(Δ) = φ0 − Δ·τ_rt.
    ///
    /// The minus sign makes the roundtrip a causal delay under the inverse
    /// transform u(t) = Σ u(Δ) e^{+iΔt} used throughout the crate.
    pub fn roundtrip_phase(&self, delta: f64) -> f64 {
        self.phi0 - delta * self.tau_rt
    }

    /// Field amplitude picked up by the pulse that leaves after `m` roundtrips
    /// (m ≥ 1), ignoring the medium: −(1 − |t_c|²)·t_c^{m−1}·t_rt^m for real t_c.
    pub fn roundtrip_weight(&self, m: u32) -> C64 {
        let tc = self.t_c;
        -(1.0 - tc.norm_sqr()) * tc.conj().powi(m as i32 - 1) * self.t_rt.powi(m as i32)
    }
}

#[derive(Debug, Clone)]
pub struct CavityResponse {
    pub spectrum: TransferSpectrum,
    pub degenerate_points: Vec<usize>,
}

/// Transmission of the ring resonator with the medium `t_medium` inside.
///
/// With x = t_rt·t_N(Δ)·e^{iΦ(Δ)}, the response is (x − t_c)/(t̄_c·x − 1).
/// For a real coupler this is the familiar all-pass form; the conjugate keeps
/// the lossless ring all-pass for a complex coupler as well.
pub fn transfer_cavity(t_medium: &TransferSpectrum, cavity: &CavitySpec) -> CavityResponse {
    let grid = *t_medium.grid();
    let mut degenerate = Vec::new();
    let amplitude = t_medium
        .amplitude()
        .iter()
        .enumerate()
        .map(|(k, &tn)| {
            let x = cavity.t_rt * tn * C64::from_polar(1.0, cavity.roundtrip_phase(grid.detuning(k)));
            let den = cavity.t_c.conj() * x - 1.0;
            if den.norm() < CAVITY_EPSILON {
                degenerate.push(k);
            }
            (x - cavity.t_c) / den
        })
        .collect();
    CavityResponse {
        spectrum: TransferSpectrum::new(grid, amplitude).expect("length matches grid"),
        degenerate_points: degenerate,
    }
}
