use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::physmodel::TimeGrid;

/// Minimum number of samples across a 10–90 % edge.
pub const MIN_EDGE_SAMPLES: usize = 8;

/// Ratio between the 10–90 % width of a sin² ramp and its full length.
pub fn raised_cosine_10_90() -> f64 {
    (0.9f64.sqrt().asin() - 0.1f64.sqrt().asin()) / FRAC_PI_2
}

/// Boxcar probe pulse with raised-cosine edges.
///
/// `t_on` and `t_on + duration` are the midpoints of the rising and falling
/// edges; `rise_fall` is their 10–90 % width. All times in 1/Γ0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub t_on: f64,
    pub duration: f64,
    pub rise_fall: f64,
    pub carrier_detuning: f64,
    pub photon_number: f64,
}

impl PulseSpec {
    /// Full length of one sin² ramp.
    pub fn ramp_length(&self) -> f64 {
        self.rise_fall / raised_cosine_10_90()
    }

    /// Time from which the envelope is identically zero.
    pub fn switch_off(&self) -> f64 {
        self.t_on + self.duration + 0.5 * self.ramp_length()
    }

    /// First instant with a non-zero envelope.
    pub fn leading_edge(&self) -> f64 {
        self.t_on - 0.5 * self.ramp_length()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::invalid("duration", format!("must be positive, got {}", self.duration)));
        }
        if !(self.rise_fall >= 0.0 && self.rise_fall < self.duration) {
            return Err(Error::invalid(
                "rise_fall",
                format!("must lie in [0, duration), got {}", self.rise_fall),
            ));
        }
        if !(self.photon_number.is_finite() && self.photon_number >= 0.0) {
            return Err(Error::invalid("photon_number", "must be non-negative"));
        }
        if !self.carrier_detuning.is_finite() || !self.t_on.is_finite() {
            return Err(Error::invalid("pulse", "non-finite carrier detuning or start time"));
        }
        Ok(())
    }

    /// Unnormalised envelope shape at time `t` (plateau = 1).
    fn shape(&self, t: f64) -> f64 {
        if self.rise_fall == 0.0 {
            return if t >= self.t_on && t < self.t_on + self.duration { 1.0 } else { 0.0 };
        }
        let len = self.ramp_length();
        let up = ((t - self.leading_edge()) / len).clamp(0.0, 1.0);
        let down = ((t - (self.t_on + self.duration - 0.5 * len)) / len).clamp(0.0, 1.0);
        if up == 0.0 || down == 1.0 {
            return 0.0;
        }
        (FRAC_PI_2 * up).sin().powi(2) * (FRAC_PI_2 * down).cos().powi(2)
    }
}

/// Complex baseband field envelope on a uniform time grid.
///
/// |envelope|² is a photon flux in photons per 1/Γ0, so
/// Σ|envelope|²·dt equals `photon_number`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseWaveform {
    grid: TimeGrid,
    envelope: Vec<C64>,
    carrier_detuning: f64,
    photon_number: f64,
    switch_off: Option<f64>,
}

impl PulseWaveform {
    pub fn from_envelope(grid: TimeGrid, envelope: Vec<C64>, carrier_detuning: f64) -> Result<Self> {
        if envelope.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                envelope.len(),
                grid.len()
            )));
        }
        let photon_number = energy(&envelope, grid.step());
        Ok(PulseWaveform { grid, envelope, carrier_detuning, photon_number, switch_off: None })
    }

    pub(crate) fn with_switch_off(mut self, t: Option<f64>) -> Self {
        self.switch_off = t;
        self
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn envelope(&self) -> &[C64] {
        &self.envelope
    }

    pub fn carrier_detuning(&self) -> f64 {
        self.carrier_detuning
    }

    pub fn photon_number(&self) -> f64 {
        self.photon_number
    }

    /// Switch-off time of the synthesised input this waveform derives from.
    pub fn switch_off(&self) -> Option<f64> {
        self.switch_off
    }

    pub fn power(&self) -> Vec<f64> {
        self.envelope.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn scaled(&self, c: C64) -> PulseWaveform {
        let envelope = self.envelope.iter().map(|a| a * c).collect();
        PulseWaveform {
            envelope,
            photon_number: self.photon_number * c.norm_sqr(),
            ..self.clone()
        }
    }

    /// Circular shift by `samples` grid steps.
    pub fn delayed(&self, samples: usize) -> PulseWaveform {
        let mut envelope = self.envelope.clone();
        envelope.rotate_right(samples % self.envelope.len());
        PulseWaveform {
            envelope,
            switch_off: self.switch_off.map(|t| t + samples as f64 * self.grid.step()),
            ..self.clone()
        }
    }
}

pub(crate) fn energy(envelope: &[C64], dt: f64) -> f64 {
    envelope.iter().map(|a| a.norm_sqr()).sum::<f64>() * dt
}

/// Sample the pulse described by `spec` on `grid`, normalised to its photon number.
pub fn synthesize_pulse(spec: &PulseSpec, grid: &TimeGrid) -> Result<PulseWaveform> {
    spec.validate()?;
    if spec.rise_fall > 0.0 {
        let samples = spec.rise_fall / grid.step();
        if samples < MIN_EDGE_SAMPLES as f64 {
            return Err(Error::UnderResolved { samples, required: MIN_EDGE_SAMPLES });
        }
    }
    let end = grid.time(grid.len() - 1);
    if spec.leading_edge() < grid.start() || spec.switch_off() > end {
        return Err(Error::invalid(
            "pulse",
            format!(
                "pulse [{}, {}] does not fit in the time window [{}, {}]",
                spec.leading_edge(),
                spec.switch_off(),
                grid.start(),
                end
            ),
        ));
    }
    let shape: Vec<f64> = (0..grid.len()).map(|j| spec.shape(grid.time(j))).collect();
    let raw: f64 = shape.iter().map(|a| a * a).sum::<f64>() * grid.step();
    let scale = if raw > 0.0 { (spec.photon_number / raw).sqrt() } else { 0.0 };
    let envelope = shape.iter().map(|&a| C64::new(a * scale, 0.0)).collect();
    Ok(PulseWaveform {
        grid: *grid,
        envelope,
        carrier_detuning: spec.carrier_detuning,
        photon_number: spec.photon_number,
        switch_off: Some(spec.switch_off()),
    })
}
