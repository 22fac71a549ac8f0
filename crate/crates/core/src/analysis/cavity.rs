use num_complex::Complex64 as C64;

use super::fit::DecayFit;
use super::sweep::FitProtocol;
use crate::error::{Error, Result};
use crate::physmodel::{EnsembleSpec, TransferSpectrum};
use crate::spectral::{transfer_cavity, transfer_unidirectional, CavitySpec};
use crate::timedomain::{PulseSpectrum, PulseWaveform};

/// How much of the preceding plateau is averaged to get the plateau level.
const PLATEAU_SPAN: f64 = 0.3;

/// The pulse leaving the ring after `roundtrip` passes, next to the pulse that
/// a single pass through `roundtrip` copies of the medium would give.
#[derive(Debug, Clone)]
pub struct RoundtripComparison {
    pub roundtrip: u32,
    pub od_total: f64,
    /// Sample times of this roundtrip's segment of the output.
    pub times: Vec<f64>,
    pub cavity: Vec<f64>,
    /// Single-pass output, scaled by the coupler and ring losses and delayed
    /// by `roundtrip` roundtrip times.
    pub single_pass: Vec<f64>,
    /// max |cavity − single_pass| over the segment, relative to the
    /// single-pass peak.
    pub max_deviation: f64,
    /// Mean power over the end of the plateau, before the falling edge.
    pub plateau: f64,
    /// Largest power after this roundtrip's switch-off.
    pub peak_after_switch_off: f64,
    /// Tail fit of the cavity segment.
    pub fit: DecayFit,
}

impl RoundtripComparison {
    pub fn superflash_ratio(&self) -> f64 {
        self.peak_after_switch_off / self.plateau
    }
}

#[derive(Debug, Clone)]
pub struct CavityRun {
    /// Full cavity output, including the directly reflected pulse.
    pub output: PulseWaveform,
    pub roundtrips: Vec<RoundtripComparison>,
}

/// Propagate `pulse` through the ring resonator holding `ensemble` and cut the
/// output into roundtrips 1..=n_roundtrips.
///
/// Segment m starts a little before t_first + m·τ, t_first being the first
/// time the input envelope is nonzero, and lasts one roundtrip time.
/// `ramp_length` is the duration of the pulse's falling edge.
pub fn cavity_roundtrips(
    pulse: &PulseWaveform,
    ensemble: &EnsembleSpec,
    cavity: &CavitySpec,
    n_roundtrips: u32,
    protocol: &FitProtocol,
    ramp_length: f64,
) -> Result<CavityRun> {
    let t_off = pulse
        .switch_off()
        .ok_or_else(|| Error::invalid("pulse", "switch-off time is unknown for this waveform"))?;
    let grid = *pulse.grid();
    let spectrum = PulseSpectrum::new(pulse)?;
    let medium = transfer_unidirectional(spectrum.grid(), ensemble);
    let response = transfer_cavity(&medium, cavity);
    if !response.degenerate_points.is_empty() {
        return Err(Error::invalid("cavity", "response has a pole on the detuning grid"));
    }
    let output = spectrum.apply(&response.spectrum)?;
    let power = output.power();
    let tau = cavity.tau_rt();
    let needed = t_off + n_roundtrips as f64 * tau + protocol.horizon(0.0);
    if needed > grid.start() + grid.duration() {
        return Err(Error::invalid(
            "grid",
            format!("window ends at {} but roundtrip {n_roundtrips} needs {needed}", grid.start() + grid.duration()),
        ));
    }
    let t_first = pulse
        .envelope()
        .iter()
        .position(|a| a.norm() > 0.0)
        .map(|j| grid.time(j))
        .ok_or_else(|| Error::invalid("pulse", "envelope is zero"))?;
    let margin = 0.5f64.min(tau / 4.0);

    let od_sp = ensemble.optical_depth();
    let mut roundtrips = Vec::with_capacity(n_roundtrips as usize);
    for m in 1..=n_roundtrips {
        let weight = cavity.roundtrip_weight(m);
        let reference = TransferSpectrum::new(
            *spectrum.grid(),
            medium
                .amplitude()
                .iter()
                .enumerate()
                .map(|(k, &t)| {
                    let phase = m as f64 * cavity.roundtrip_phase(spectrum.grid().detuning(k));
                    weight * t.powi(m as i32) * C64::from_polar(1.0, phase)
                })
                .collect(),
        )?;
        let single = spectrum.apply(&reference)?.power();

        let lo = t_first + m as f64 * tau - margin;
        let hi = lo + tau;
        let idx: Vec<usize> = (0..grid.len()).filter(|&j| grid.time(j) >= lo && grid.time(j) < hi).collect();
        let times: Vec<f64> = idx.iter().map(|&j| grid.time(j)).collect();
        let seg_cavity: Vec<f64> = idx.iter().map(|&j| power[j]).collect();
        let seg_single: Vec<f64> = idx.iter().map(|&j| single[j]).collect();
        let peak = seg_single.iter().cloned().fold(0.0, f64::max);
        let max_deviation = seg_cavity
            .iter()
            .zip(&seg_single)
            .map(|(c, s)| (c - s).abs())
            .fold(0.0, f64::max)
            / peak;

        let off_m = t_off + m as f64 * tau;
        let edge = off_m - ramp_length;
        let plateau_samples: Vec<f64> = times
            .iter()
            .zip(&seg_cavity)
            .filter(|(&t, _)| t >= edge - PLATEAU_SPAN && t < edge)
            .map(|(_, &p)| p)
            .collect();
        if plateau_samples.is_empty() {
            return Err(Error::invalid("pulse", "too short to have a plateau"));
        }
        let plateau = plateau_samples.iter().sum::<f64>() / plateau_samples.len() as f64;
        let peak_after_switch_off = times
            .iter()
            .zip(&seg_cavity)
            .filter(|(&t, _)| t > off_m)
            .map(|(_, &p)| p)
            .fold(0.0, f64::max);
        let od_total = m as f64 * od_sp;
        let fit = protocol.fit(&times, &seg_cavity, off_m, od_total)?;
        roundtrips.push(RoundtripComparison {
            roundtrip: m,
            od_total,
            times,
            cavity: seg_cavity,
            single_pass: seg_single,
            max_deviation,
            plateau,
            peak_after_switch_off,
            fit,
        });
    }
    Ok(CavityRun { output, roundtrips })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physmodel::TimeGrid;
    use crate::timedomain::{synthesize_pulse, PulseSpec};

    #[test]
    fn short_ring_matches_repeated_single_pass() {
        let spec = PulseSpec { t_on: 1.0, duration: 1.5, rise_fall: 0.05, carrier_detuning: 4.0, photon_number: 1.0 };
        let grid = TimeGrid::new(0.0, 4e-3, 1 << 16).unwrap();
        let pulse = synthesize_pulse(&spec, &grid).unwrap();
        let ensemble = EnsembleSpec::uniform(200, 0.0055).unwrap();
        let cavity = CavitySpec::new(0.9, C64::new(0.8, 0.0), 10.0, 0.4).unwrap();
        let protocol = FitProtocol { settle: 0.03, window: 0.5, short_window: 0.5, short_window_above_od: 1e9 };
        let run = cavity_roundtrips(&pulse, &ensemble, &cavity, 5, &protocol, spec.ramp_length()).unwrap();
        assert_eq!(run.roundtrips.len(), 5);
        for rt in &run.roundtrips {
            assert!(rt.max_deviation < 2e-3, "m = {}: {}", rt.roundtrip, rt.max_deviation);
            assert!(rt.fit.rate > 1.0);
        }
        assert!(run.roundtrips[4].fit.rate > run.roundtrips[0].fit.rate);
    }

    #[test]
    fn window_must_hold_every_roundtrip() {
        let spec = PulseSpec { t_on: 1.0, duration: 1.5, rise_fall: 0.05, carrier_detuning: 4.0, photon_number: 1.0 };
        let grid = TimeGrid::new(0.0, 4e-3, 1 << 13).unwrap();
        let pulse = synthesize_pulse(&spec, &grid).unwrap();
        let ensemble = EnsembleSpec::uniform(20, 0.0055).unwrap();
        let cavity = CavitySpec::new(0.9, C64::new(0.8, 0.0), 12.0, 0.0).unwrap();
        let protocol = FitProtocol { settle: 0.03, window: 0.5, short_window: 0.5, short_window_above_od: 1e9 };
        assert!(cavity_roundtrips(&pulse, &ensemble, &cavity, 5, &protocol, spec.ramp_length()).is_err());
    }
}
