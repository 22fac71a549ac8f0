use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

fn check_len(len: usize) -> Result<()> {
    if len >= 2 && len.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::invalid("grid length", format!("must be a power of two >= 2, got {len}")))
    }
}

fn check_step(step: f64) -> Result<()> {
    if step.is_finite() && step > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("grid step", format!("must be positive, got {step}")))
    }
}

/// Uniform time grid t_j = start + j·step, j = 0..len, in units of 1/Γ0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    start: f64,
    step: f64,
    len: usize,
}

impl TimeGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        check_len(len)?;
        check_step(step)?;
        Ok(TimeGrid { start, step, len })
    }

    /// Grid of `len` points whose conjugate detuning grid spans ±`half_span` Γ0.
    pub fn from_span(half_span: f64, len: usize) -> Result<Self> {
        check_step(half_span)?;
        Self::new(0.0, std::f64::consts::PI / half_span, len)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn duration(&self) -> f64 {
        self.step * self.len as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        self.start + j as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len).map(|j| self.time(j)).collect()
    }

    /// Index of the first sample at or after `t`, if inside the grid.
    pub fn index_at_or_after(&self, t: f64) -> Option<usize> {
        let j = ((t - self.start) / self.step).ceil().max(0.0) as usize;
        // guard against the ceil landing one sample late through rounding
        let j = if j > 0 && self.time(j - 1) >= t { j - 1 } else { j };
        (j < self.len).then_some(j)
    }

    /// Spacing of the conjugate angular-frequency grid, 2π/(len·step).
    pub fn frequency_step(&self) -> f64 {
        TAU / self.duration()
    }

    /// Detuning grid conjugate to this time grid, centred on `center`.
    pub fn detuning_grid(&self, center: f64) -> DetuningGrid {
        DetuningGrid { center, step: self.frequency_step(), len: self.len }
    }
}

/// Uniform detuning grid Δ_k = center + (k − len/2)·step, k = 0..len, in Γ0.
///
/// Index `len/2` holds the centre; the grid runs from −len/2 to len/2 − 1
/// steps around it (the layout of a shifted discrete Fourier spectrum).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetuningGrid {
    center: f64,
    step: f64,
    len: usize,
}

impl DetuningGrid {
    pub fn new(center: f64, step: f64, len: usize) -> Result<Self> {
        check_len(len)?;
        check_step(step)?;
        if !center.is_finite() {
            return Err(Error::invalid("grid center", "must be finite"));
        }
        Ok(DetuningGrid { center, step, len })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Offset of sample `k` from the centre.
    #[inline]
    pub fn offset(&self, k: usize) -> f64 {
        (k as f64 - (self.len / 2) as f64) * self.step
    }

    #[inline]
    pub fn detuning(&self, k: usize) -> f64 {
        self.center + self.offset(k)
    }

    pub fn detunings(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.detuning(k)).collect()
    }

    /// Index of the grid point holding the centre.
    pub fn center_index(&self) -> usize {
        self.len / 2
    }
}

/// Complex amplitude response of a medium sampled on a [`DetuningGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransferSpectrum {
    grid: DetuningGrid,
    amplitude: Vec<C64>,
}

impl TransferSpectrum {
    pub fn new(grid: DetuningGrid, amplitude: Vec<C64>) -> Result<Self> {
        if amplitude.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes for a grid of {} points",
                amplitude.len(),
                grid.len()
            )));
        }
        Ok(TransferSpectrum { grid, amplitude })
    }

    /// Response identically equal to one (no medium).
    pub fn identity(grid: DetuningGrid) -> Self {
        TransferSpectrum { grid, amplitude: vec![C64::new(1.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: DetuningGrid, f: impl Fn(f64) -> C64) -> Self {
        let amplitude = (0..grid.len()).map(|k| f(grid.detuning(k))).collect();
        TransferSpectrum { grid, amplitude }
    }

    pub fn grid(&self) -> &DetuningGrid {
        &self.grid
    }

    pub fn amplitude(&self) -> &[C64] {
        &self.amplitude
    }

    pub fn into_amplitude(self) -> Vec<C64> {
        self.amplitude
    }

    pub fn power(&self) -> Vec<f64> {
        self.amplitude.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Largest |amplitude| on the grid; at most one for a passive medium.
    pub fn max_modulus(&self) -> f64 {
        self.amplitude.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Pointwise product with another response on the same grid (media in series).
    pub fn cascade(&self, other: &TransferSpectrum) -> Result<TransferSpectrum> {
        if !grids_match(&self.grid, &other.grid) {
            return Err(Error::GridMismatch("cascaded spectra live on different grids".into()));
        }
        let amplitude = self.amplitude.iter().zip(&other.amplitude).map(|(a, b)| a * b).collect();
        Ok(TransferSpectrum { grid: self.grid, amplitude })
    }
}

/// Grids agree in length, spacing and centre up to rounding.
pub fn grids_match(a: &DetuningGrid, b: &DetuningGrid) -> bool {
    a.len == b.len
        && (a.step - b.step).abs() <= 1e-9 * a.step
        && (a.center - b.center).abs() <= 1e-9 * a.step.max(a.center.abs())
}
