use super::fit::{fit_pulse_decay, DecayFit};
use crate::error::{Error, Result};
use crate::montecarlo::{average_observable, DisorderModel, MonteCarloEstimate};
use crate::physmodel::{atom_number_to_od, od_to_atom_number, EnsembleSpec, TimeGrid, Units};
use crate::spectral::{transfer_bidirectional, transfer_unidirectional};
use crate::timedomain::{collective_rate_trace, energy_trace, synthesize_pulse, PulseSpec, PulseSpectrum, PulseWaveform};

/// How tail fits are windowed: the window opens `settle` after switch-off and
/// is `window` long, or `short_window` long when the optical depth exceeds
/// `short_window_above_od`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitProtocol {
    pub settle: f64,
    pub window: f64,
    pub short_window: f64,
    pub short_window_above_od: f64,
}

impl FitProtocol {
    /// 1 ns settle, 30 ns window, 15 ns above OD 20.7.
    pub fn standard(units: &Units) -> Self {
        FitProtocol {
            settle: units.ns_to_natural(1.0),
            window: units.ns_to_natural(30.0),
            short_window: units.ns_to_natural(15.0),
            short_window_above_od: 20.7,
        }
    }

    pub fn window_for(&self, od: f64) -> f64 {
        if od > self.short_window_above_od {
            self.short_window
        } else {
            self.window
        }
    }

    pub fn fit(&self, times: &[f64], trace: &[f64], t_off: f64, od: f64) -> Result<DecayFit> {
        fit_pulse_decay(times, trace, t_off, self.window_for(od), self.settle)
    }

    /// Last time any fit under this protocol can reach.
    pub fn horizon(&self, t_off: f64) -> f64 {
        t_off + self.settle + self.window.max(self.short_window)
    }
}

/// One optical depth of a forward sweep.
#[derive(Debug, Clone)]
pub struct OdSweepPoint {
    pub od: f64,
    pub n_atoms: usize,
    /// Fit to the transmitted power after switch-off.
    pub pulse_fit: DecayFit,
    /// Γ_coll read `rate_settle` after switch-off.
    pub gamma_coll: f64,
}

fn switch_off(pulse: &PulseWaveform) -> Result<f64> {
    pulse
        .switch_off()
        .ok_or_else(|| Error::invalid("pulse", "switch-off time is unknown for this waveform"))
}

/// Sweep the optical depth of a homogeneous ensemble without
/// back-scattering, fitting the transmitted tail and reading Γ_coll at each
/// point.
pub fn forward_decay_sweep(
    pulse: &PulseWaveform,
    beta: f64,
    ods: &[f64],
    protocol: &FitProtocol,
    rate_settle: f64,
) -> Result<Vec<OdSweepPoint>> {
    let t_off = switch_off(pulse)?;
    let spectrum = PulseSpectrum::new(pulse)?;
    let grid = pulse.grid();
    let times = grid.times();
    let j_rate = grid
        .index_at_or_after(t_off + rate_settle)
        .ok_or_else(|| Error::invalid("rate_settle", "reads past the end of the grid"))?;
    ods.iter()
        .map(|&od| {
            let n_atoms = od_to_atom_number(od, beta)?;
            if n_atoms == 0 {
                return Err(Error::invalid("od", format!("{od} rounds to zero atoms")));
            }
            let ensemble = EnsembleSpec::uniform(n_atoms, beta)?;
            let out = spectrum.apply(&transfer_unidirectional(spectrum.grid(), &ensemble))?;
            let pulse_fit = protocol.fit(&times, &out.power(), t_off, od)?;
            let energy = energy_trace(pulse, &ensemble)?;
            let gamma_coll = collective_rate_trace(&energy, grid.step())[j_rate]
                .ok_or(Error::BelowFloor { time: grid.time(j_rate) })?;
            Ok(OdSweepPoint { od, n_atoms, pulse_fit, gamma_coll })
        })
        .collect()
}

/// Forward and backward output power averaged over disorder configurations.
#[derive(Debug, Clone)]
pub struct AveragedTraces {
    pub times: Vec<f64>,
    pub forward: MonteCarloEstimate,
    pub backward: MonteCarloEstimate,
}

/// Average the transmitted and reflected power of `n_configs` configurations
/// of `model`, keeping samples with `window.0 ≤ t ≤ window.1`.
pub fn disorder_averaged_traces(
    model: &DisorderModel,
    spectrum: &PulseSpectrum,
    n_configs: u64,
    window: (f64, f64),
) -> Result<AveragedTraces> {
    let grid = spectrum.pulse().grid();
    let keep: Vec<usize> = (0..grid.len())
        .filter(|&j| grid.time(j) >= window.0 && grid.time(j) <= window.1)
        .collect();
    if keep.is_empty() {
        return Err(Error::invalid("window", "contains no samples"));
    }
    let len = keep.len();
    let joint = average_observable(model, n_configs, |ensemble| {
        let spectra = transfer_bidirectional(spectrum.grid(), ensemble);
        if !spectra.degenerate_points.is_empty() {
            return Err(Error::invalid(
                "ensemble",
                format!("recursion is singular at {} grid points", spectra.degenerate_points.len()),
            ));
        }
        let fwd = spectrum.apply(&spectra.transmission)?.power();
        let bwd = spectrum.apply(&spectra.reflection)?.power();
        Ok(keep.iter().map(|&j| fwd[j]).chain(keep.iter().map(|&j| bwd[j])).collect())
    })?;
    let split = |v: &[f64], back: bool| if back { v[len..].to_vec() } else { v[..len].to_vec() };
    let part = |back| MonteCarloEstimate {
        mean: split(&joint.mean, back),
        stderr: split(&joint.stderr, back),
        n_configs: joint.n_configs,
    };
    Ok(AveragedTraces { times: keep.iter().map(|&j| grid.time(j)).collect(), forward: part(false), backward: part(true) })
}

/// Forward and backward tail fits at one carrier detuning.
#[derive(Debug, Clone)]
pub struct DirectionalFit {
    pub detuning: f64,
    pub forward: DecayFit,
    pub backward: DecayFit,
    pub traces: AveragedTraces,
}

/// For each carrier detuning, average the forward and backward output of the
/// same disorder configurations and fit both tails.
pub fn backward_decay_sweep(
    model: &DisorderModel,
    pulse: &PulseSpec,
    grid: &TimeGrid,
    detunings: &[f64],
    n_configs: u64,
    protocol: &FitProtocol,
) -> Result<Vec<DirectionalFit>> {
    let od = atom_number_to_od(model.n_atoms, model.beta_mean);
    let t_off = pulse.switch_off();
    let keep = (pulse.leading_edge(), protocol.horizon(t_off) + 10.0 * grid.step());
    detunings
        .iter()
        .map(|&detuning| {
            let spec = PulseSpec { carrier_detuning: detuning, ..*pulse };
            let spectrum = PulseSpectrum::new(&synthesize_pulse(&spec, grid)?)?;
            let traces = disorder_averaged_traces(model, &spectrum, n_configs, keep)?;
            let forward = protocol.fit(&traces.times, &traces.forward.mean, t_off, od)?;
            let backward = protocol.fit(&traces.times, &traces.backward.mean, t_off, od)?;
            Ok(DirectionalFit { detuning, forward, backward, traces })
        })
        .collect()
}
