//! Frequency-domain responses of the emitter array: the unidirectional
//! product, the bidirectional recursion with back-scattering, the ring
//! resonator, and per-atom excitation amplitudes.

mod bidirectional;
mod cavity;
mod unidirectional;

pub use bidirectional::{
    bidirectional_state, transfer_bidirectional, BidirectionalSpectra, BidirectionalState,
    RECURSION_EPSILON,
};
pub use cavity::{transfer_cavity, CavityResponse, CavitySpec, CAVITY_EPSILON};
pub(crate) use unidirectional::atom_t;
pub use unidirectional::{excitation_amplitudes, transfer_unidirectional};
