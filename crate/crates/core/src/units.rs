//! Trap parameters and the dimensionless unit system.
//!
//! Lengths are measured in `l_s = [e / (8π ε0 |β2|)]^{1/3}`, frequencies in
//! `ω_s = sqrt(2 e |β2| / M)` and times in `1/ω_s`. Every other module works
//! in these units; SI values only appear at reporting time.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Atomic mass unit in kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub elementary_charge: f64,
    pub vacuum_permittivity: f64,
    pub ion_mass: f64,
    pub reduced_planck: f64,
    pub boltzmann: f64,
}

impl PhysicalConstants {
    /// CODATA constants with the mass of a singly charged ⁴⁰Ca ion.
    pub fn calcium40() -> Self {
        Self {
            elementary_charge: 1.602_176_634e-19,
            vacuum_permittivity: 8.854_187_812_8e-12,
            ion_mass: 39.962_590_863 * ATOMIC_MASS_UNIT,
            reduced_planck: 1.054_571_817e-34,
            boltzmann: 1.380_649e-23,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("elementary_charge", self.elementary_charge),
            ("vacuum_permittivity", self.vacuum_permittivity),
            ("ion_mass", self.ion_mass),
            ("reduced_planck", self.reduced_planck),
            ("boltzmann", self.boltzmann),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::calcium40()
    }
}

/// Fields of the rf + quartic static trap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapParameters {
    /// rf gradient α in V/m².
    pub rf_gradient: f64,
    /// rf drive frequency Ω in rad/s.
    pub rf_frequency: f64,
    /// Quadratic static coefficient β2 in V/m² (negative).
    pub quadratic_coefficient: f64,
    /// Quartic static coefficient β4 in V/m⁴ (positive).
    pub quartic_coefficient: f64,
}

impl TrapParameters {
    /// Builds a trap whose quartic coefficient realizes the given `k4`.
    pub fn with_quartic_ratio(
        rf_gradient: f64,
        rf_frequency: f64,
        quadratic_coefficient: f64,
        k4: f64,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        if !(k4 > 0.0) {
            return Err(Error::invalid(format!("k4 must be positive, got {k4}")));
        }
        if !(quadratic_coefficient < 0.0) {
            return Err(Error::invalid("β2 must be negative"));
        }
        let ls = length_scale(quadratic_coefficient.abs(), consts);
        let trap = Self {
            rf_gradient,
            rf_frequency,
            quadratic_coefficient,
            quartic_coefficient: k4 * quadratic_coefficient.abs() / (2.0 * ls * ls),
        };
        trap.validate()?;
        Ok(trap)
    }

    /// α = 7×10⁸ V/m², Ω = 2π × 25.2 MHz, β2 = −2.09×10³ V/m², k4 = 1.343.
    pub fn reference() -> Self {
        Self::with_quartic_ratio(7.0e8, 2.0 * PI * 25.2e6, -2.09e3, 1.343, &PhysicalConstants::calcium40())
            .expect("reference trap is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rf_gradient > 0.0) {
            return Err(Error::invalid(format!("rf gradient α must be positive, got {}", self.rf_gradient)));
        }
        if !(self.rf_frequency > 0.0) {
            return Err(Error::invalid(format!("rf frequency Ω must be positive, got {}", self.rf_frequency)));
        }
        if !(self.quadratic_coefficient < 0.0) {
            return Err(Error::invalid(format!("β2 must be negative, got {}", self.quadratic_coefficient)));
        }
        if !(self.quartic_coefficient > 0.0) {
            return Err(Error::invalid(format!("β4 must be positive, got {}", self.quartic_coefficient)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledUnits {
    /// l_s in metres.
    pub length_scale: f64,
    /// ω_s in rad/s.
    pub frequency_scale: f64,
    /// k4 = 2 β4 l_s² / |β2|.
    pub quartic_ratio: f64,
}

impl ScaledUnits {
    /// Converts a scaled time (units of 1/ω_s) to seconds.
    pub fn seconds(&self, scaled_time: f64) -> f64 {
        scaled_time / self.frequency_scale
    }

    /// Converts a scaled angular frequency to rad/s.
    pub fn angular_frequency(&self, scaled: f64) -> f64 {
        scaled * self.frequency_scale
    }

    pub fn metres(&self, scaled_length: f64) -> f64 {
        scaled_length * self.length_scale
    }
}

fn length_scale(beta2_abs: f64, consts: &PhysicalConstants) -> f64 {
    (consts.elementary_charge / (8.0 * PI * consts.vacuum_permittivity * beta2_abs)).cbrt()
}

pub fn derive_scaled_units(trap: &TrapParameters, consts: &PhysicalConstants) -> Result<ScaledUnits> {
    trap.validate()?;
    consts.validate()?;
    let beta2 = trap.quadratic_coefficient.abs();
    let ls = length_scale(beta2, consts);
    Ok(ScaledUnits {
        length_scale: ls,
        frequency_scale: (2.0 * consts.elementary_charge * beta2 / consts.ion_mass).sqrt(),
        quartic_ratio: 2.0 * trap.quartic_coefficient * ls * ls / beta2,
    })
}

/// Radial frequency of an ion in a low-lying state, in units of ω_s.
///
/// The ponderomotive term `e²α² r² / (MΩ²)` alone sets this frequency,
/// `ω_ELL = √2 e α / (M Ω)`; the static `+1/2` curvature is carried by the
/// Hessian separately.
pub fn ell_frequency_ratio(trap: &TrapParameters, consts: &PhysicalConstants) -> Result<f64> {
    let units = derive_scaled_units(trap, consts)?;
    let omega = 2f64.sqrt() * consts.elementary_charge * trap.rf_gradient / (consts.ion_mass * trap.rf_frequency);
    Ok(omega / units.frequency_scale)
}

/// ω_Ryd / ω_ELL = sqrt(1 + term), where `term` is the dimensionless
/// polarizability product `−MΩ²P_nP`.
pub fn rydberg_frequency_ratio(polarizability_term: f64) -> Result<f64> {
    if !polarizability_term.is_finite() {
        return Err(Error::invalid("polarizability term must be finite"));
    }
    if polarizability_term <= -1.0 {
        return Err(Error::invalid(format!(
            "polarizability term {polarizability_term} ≤ −1 leaves the Rydberg ion untrapped"
        )));
    }
    Ok((1.0 + polarizability_term).sqrt())
}

/// Radial trap frequencies of the two electronic classes, in units of ω_s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateFrequencies {
    pub omega_ell: f64,
    pub omega_ryd: f64,
}

impl StateFrequencies {
    pub const REFERENCE_ELL: f64 = 150.0;
    pub const REFERENCE_RYD: f64 = 198.5;

    pub fn new(omega_ell: f64, omega_ryd: f64) -> Result<Self> {
        if !(omega_ell > 0.0) || !omega_ell.is_finite() {
            return Err(Error::invalid(format!("ω_ELL must be positive, got {omega_ell}")));
        }
        if !(omega_ryd >= omega_ell) || !omega_ryd.is_finite() {
            return Err(Error::invalid(format!("ω_Ryd ({omega_ryd}) must be ≥ ω_ELL ({omega_ell})")));
        }
        Ok(Self { omega_ell, omega_ryd })
    }

    pub fn from_polarizability(omega_ell: f64, polarizability_term: f64) -> Result<Self> {
        let ratio = rydberg_frequency_ratio(polarizability_term)?;
        Self::new(omega_ell, omega_ell * ratio)
    }

    pub fn ratio(&self) -> f64 {
        self.omega_ryd / self.omega_ell
    }
}

impl Default for StateFrequencies {
    fn default() -> Self {
        Self { omega_ell: Self::REFERENCE_ELL, omega_ryd: Self::REFERENCE_RYD }
    }
}
