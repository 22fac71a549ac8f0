//! Natural-unit conventions, the emitter array and the single-atom response.
//!
//! Everything downstream works with Γ0 = 1: times in 1/Γ0, angular detunings
//! Δ = ω − ω_a in Γ0. SI quantities only appear at the configuration boundary
//! through [`Units`].

mod ensemble;
mod grid;
mod units;

pub use ensemble::{
    atom_number_to_od, od_to_atom_number, single_atom_coefficients, EnsembleSpec, DEFAULT_BETA,
};
pub(crate) use ensemble::{check_beta, lorentzian};
pub use grid::{grids_match, DetuningGrid, TimeGrid, TransferSpectrum};
pub use units::{Units, DEFAULT_GAMMA0_HZ};
