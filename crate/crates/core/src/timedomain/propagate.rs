use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::pulse::PulseWaveform;
use crate::error::{Error, Result};
use crate::physmodel::{grids_match, DetuningGrid, TransferSpectrum};

/// Largest pulse-energy fraction tolerated in the outer 1 % of the frequency window.
pub const ALIASING_LIMIT: f64 = 1e-6;

/// Forward and inverse transforms of one length, planned once.
#[derive(Clone)]
pub(crate) struct Transforms {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
}

impl Transforms {
    pub(crate) fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Transforms {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }

    /// Time samples to a spectrum in centred (detuning-grid) order.
    pub(crate) fn to_spectrum(&self, samples: &[C64]) -> Vec<C64> {
        let mut buf = samples.to_vec();
        self.forward.process(&mut buf);
        buf.rotate_right(self.len / 2);
        buf
    }

    /// Centred spectrum back to time samples, consuming the buffer.
    pub(crate) fn to_time(&self, mut spectrum: Vec<C64>, scratch: &mut Vec<C64>) -> Vec<C64> {
        spectrum.rotate_left(self.len / 2);
        scratch.resize(self.inverse.get_inplace_scratch_len(), C64::new(0.0, 0.0));
        self.inverse.process_with_scratch(&mut spectrum, scratch);
        let norm = 1.0 / self.len as f64;
        for v in &mut spectrum {
            *v *= norm;
        }
        spectrum
    }
}

/// Spectrum of a pulse on the detuning grid centred at its carrier.
///
/// Computing it once lets many media be applied to the same input.
#[derive(Clone)]
pub struct PulseSpectrum {
    pulse: PulseWaveform,
    grid: DetuningGrid,
    values: Vec<C64>,
    transforms: Transforms,
}

impl PulseSpectrum {
    pub fn new(pulse: &PulseWaveform) -> Result<Self> {
        let len = pulse.grid().len();
        let transforms = Transforms::new(len);
        let values = transforms.to_spectrum(pulse.envelope());
        let total: f64 = values.iter().map(|v| v.norm_sqr()).sum();
        let edge = (len / 200).max(1);
        let outer: f64 = values[..edge]
            .iter()
            .chain(&values[len - edge..])
            .map(|v| v.norm_sqr())
            .sum();
        if total > 0.0 && outer > ALIASING_LIMIT * total {
            return Err(Error::Aliasing { fraction: outer / total });
        }
        Ok(PulseSpectrum {
            grid: pulse.grid().detuning_grid(pulse.carrier_detuning()),
            pulse: pulse.clone(),
            values,
            transforms,
        })
    }

    /// Detuning grid on which media must be sampled for this pulse.
    pub fn grid(&self) -> &DetuningGrid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn pulse(&self) -> &PulseWaveform {
        &self.pulse
    }

    pub(crate) fn transforms(&self) -> &Transforms {
        &self.transforms
    }

    /// Inverse transform of the pulse spectrum times an arbitrary response.
    pub(crate) fn apply_values(&self, response: &[C64]) -> Vec<C64> {
        let product: Vec<C64> = self.values.iter().zip(response).map(|(u, h)| u * h).collect();
        self.transforms.to_time(product, &mut Vec::new())
    }

    /// Output pulse after the medium: F⁻¹[u_in(Δ)·T(Δ)].
    pub fn apply(&self, medium: &TransferSpectrum) -> Result<PulseWaveform> {
        if !grids_match(&self.grid, medium.grid()) {
            return Err(Error::GridMismatch(format!(
                "medium sampled on {:?}, pulse needs {:?}",
                medium.grid(),
                self.grid
            )));
        }
        let out = self.apply_values(medium.amplitude());
        Ok(PulseWaveform::from_envelope(*self.pulse.grid(), out, self.pulse.carrier_detuning())?
            .with_switch_off(self.pulse.switch_off()))
    }
}

/// Propagate `pulse` through a linear medium described by `medium`.
///
/// The medium has to be sampled on the pulse's conjugate grid, centred at the
/// carrier detuning (see [`PulseSpectrum::grid`]).
pub fn propagate_pulse(pulse: &PulseWaveform, medium: &TransferSpectrum) -> Result<PulseWaveform> {
    PulseSpectrum::new(pulse)?.apply(medium)
}
