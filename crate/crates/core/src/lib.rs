//! Collective radiative dynamics of two-level emitters coupled to a
//! single-mode one-dimensional waveguide.
//!
//! The crate computes steady-state transfer functions of the emitter array
//! (with and without back-scattering, optionally inside a fiber ring
//! resonator), propagates probe pulses through them, resolves the excitation
//! of every atom in time, and extracts decay rates from the resulting traces.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod physmodel;
pub mod spectral;
pub mod timedomain;

pub use error::{Error, Result};
