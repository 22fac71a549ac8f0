//! Time-domain response: pulse synthesis, linear propagation through any
//! transfer spectrum, and the excitation dynamics of every atom.
//!
//! Transforms follow u(t) = Σ_Δ u(Δ)·e^{+iΔt}, under which the single-atom
//! response 1 − β/(1/2 + iΔ) is causal.

mod atoms;
mod propagate;
mod pulse;

pub use atoms::{
    atom_dynamics, collective_rate_at_switchoff, collective_rate_trace, energy_trace,
    AtomTrajectorySet, TraceSampling, DEFAULT_SETTLE_DELAY, ENERGY_FLOOR,
};
pub use propagate::{propagate_pulse, PulseSpectrum, ALIASING_LIMIT};
pub use pulse::{raised_cosine_10_90, synthesize_pulse, PulseSpec, PulseWaveform, MIN_EDGE_SAMPLES};
