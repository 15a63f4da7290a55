//! Physical constants and the unit conventions used throughout the crate.
//!
//! Capacitances are carried in femtofarads, energies in joules and
//! frequencies as angular frequencies in rad/s. Every conversion between
//! those lives here.

use serde::{Deserialize, Serialize};

/// One femtofarad in farads.
pub const FEMTOFARAD: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Elementary charge (C).
    pub e: f64,
    /// Reduced Planck constant (J s).
    pub hbar: f64,
    /// Planck constant (J s).
    pub h: f64,
    /// Magnetic flux quantum h / 2e (Wb).
    pub phi0: f64,
}

impl PhysicalConstants {
    /// Exact SI values (2019 redefinition).
    pub fn si() -> Self {
        let e = 1.602_176_634e-19;
        let h = 6.626_070_15e-34;
        Self {
            e,
            hbar: h / (2.0 * std::f64::consts::PI),
            h,
            phi0: h / (2.0 * e),
        }
    }

    /// Charging energy `e^2 x / 2` in joules for an inverse-capacitance entry
    /// `x` given in fF^-1.
    pub fn charging_energy(&self, inverse_capacitance_per_ff: f64) -> f64 {
        self.e * self.e * (inverse_capacitance_per_ff / FEMTOFARAD) / 2.0
    }

    /// Energy (J) to angular frequency (rad/s).
    pub fn energy_to_angular(&self, energy: f64) -> f64 {
        energy / self.hbar
    }

    /// Angular frequency (rad/s) to energy (J).
    pub fn angular_to_energy(&self, omega: f64) -> f64 {
        omega * self.hbar
    }

    /// Energy (J) to ordinary frequency (Hz).
    pub fn energy_to_hz(&self, energy: f64) -> f64 {
        energy / self.h
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::si()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_quantum_matches_definition() {
        let c = PhysicalConstants::si();
        assert_eq!(c.phi0, c.h / (2.0 * c.e));
        assert!(c.e > 0.0 && c.h > 0.0 && c.hbar > 0.0 && c.phi0 > 0.0);
        assert!((c.phi0 - 2.067_833_848e-15).abs() < 1e-23);
    }

    #[test]
    fn isolated_transmon_charging_energy() {
        let c = PhysicalConstants::si();
        // e^2 / (2 * 100 fF)
        let ec = c.charging_energy(1.0 / 100.0);
        assert!((ec - 1.2833e-25).abs() / 1.2833e-25 < 1e-3);
        let mhz = c.energy_to_hz(ec) / 1e6;
        assert!((mhz - 193.7).abs() < 0.5, "{mhz}");
    }
}
