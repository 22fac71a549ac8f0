use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Intrinsic decay rate Γ0/2π of the Cs D2 line, in Hz.
pub const DEFAULT_GAMMA0_HZ: f64 = 5.2e6;

/// Conversion between SI quantities and natural units (Γ0 = 1).
///
/// Internally, times are measured in 1/Γ0 and angular detunings in Γ0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    gamma0_hz: f64,
}

impl Default for Units {
    fn default() -> Self {
        Units { gamma0_hz: DEFAULT_GAMMA0_HZ }
    }
}

impl Units {
    pub fn new(gamma0_hz: f64) -> Result<Self> {
        if !(gamma0_hz.is_finite() && gamma0_hz > 0.0) {
            return Err(Error::invalid("gamma0_hz", format!("must be positive, got {gamma0_hz}")));
        }
        Ok(Units { gamma0_hz })
    }

    pub fn gamma0_hz(&self) -> f64 {
        self.gamma0_hz
    }

    /// Γ0 in s⁻¹.
    pub fn gamma0_per_second(&self) -> f64 {
        TAU * self.gamma0_hz
    }

    pub fn seconds_to_natural(&self, seconds: f64) -> f64 {
        seconds * self.gamma0_per_second()
    }

    pub fn natural_to_seconds(&self, time: f64) -> f64 {
        time / self.gamma0_per_second()
    }

    pub fn ns_to_natural(&self, ns: f64) -> f64 {
        self.seconds_to_natural(ns * 1e-9)
    }

    pub fn natural_to_ns(&self, time: f64) -> f64 {
        self.natural_to_seconds(time) * 1e9
    }

    /// Ordinary frequency in Hz to angular frequency in units of Γ0.
    pub fn hz_to_angular(&self, hz: f64) -> f64 {
        hz / self.gamma0_hz
    }

    pub fn angular_to_hz(&self, omega: f64) -> f64 {
        omega * self.gamma0_hz
    }
}
