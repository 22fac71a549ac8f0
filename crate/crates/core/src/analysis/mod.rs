//! Decay-rate extraction from output traces, optical-depth and detuning
//! sweeps, and spectral analysis of fit residuals.

mod cavity;
mod fit;
mod spectrum;
mod sweep;

pub use cavity::{cavity_roundtrips, CavityRun, RoundtripComparison};
pub use fit::{fit_decay, fit_pulse_decay, DecayFit};
pub use spectrum::{residual_spectrum, ResidualSpectrum, SpectralPeak, PEAK_PROMINENCE, PEAK_RELATIVE_AMPLITUDE};
pub use sweep::{
    backward_decay_sweep, disorder_averaged_traces, forward_decay_sweep, AveragedTraces, DirectionalFit,
    FitProtocol, OdSweepPoint,
};
