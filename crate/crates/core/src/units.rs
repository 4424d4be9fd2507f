//! Physical units.
//!
//! Internally energies are in meV and ħ = 1, so times are measured in ħ/meV.
//! A time of `t` ps therefore corresponds to `t / HBAR_MEV_PS` internal units.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// ħ in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.6582119569;

/// Wavenumbers per meV.
pub const CM_INV_PER_MEV: f64 = 8.065544;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    MilliElectronVolt,
    Wavenumber,
    /// Angular frequency in rad/ps, read as the energy ħω.
    InversePicosecond,
    Femtosecond,
    Picosecond,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Energy,
    Time,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        match self {
            Unit::MilliElectronVolt | Unit::Wavenumber | Unit::InversePicosecond => {
                Dimension::Energy
            }
            Unit::Femtosecond | Unit::Picosecond => Dimension::Time,
        }
    }

    /// Factor taking a value in this unit to the canonical unit of its
    /// dimension (meV for energies, ps for times).
    fn to_canonical(self) -> f64 {
        match self {
            Unit::MilliElectronVolt => 1.0,
            Unit::Wavenumber => 1.0 / CM_INV_PER_MEV,
            Unit::InversePicosecond => HBAR_MEV_PS,
            Unit::Femtosecond => 1e-3,
            Unit::Picosecond => 1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::MilliElectronVolt => "meV",
            Unit::Wavenumber => "cm-1",
            Unit::InversePicosecond => "ps-1",
            Unit::Femtosecond => "fs",
            Unit::Picosecond => "ps",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "meV" => Ok(Unit::MilliElectronVolt),
            "cm-1" | "cm^-1" | "cm⁻¹" | "1/cm" => Ok(Unit::Wavenumber),
            "ps-1" | "ps^-1" | "ps⁻¹" | "1/ps" => Ok(Unit::InversePicosecond),
            "fs" => Ok(Unit::Femtosecond),
            "ps" => Ok(Unit::Picosecond),
            other => Err(Error::UnknownUnit(other.to_string())),
        }
    }
}

/// Linear conversion between two units of the same dimension.
pub fn convert(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from.dimension() != to.dimension() {
        return Err(Error::IncompatibleUnits {
            from: from.to_string(),
            to: to.to_string(),
        });
    }
    Ok(value * from.to_canonical() / to.to_canonical())
}

/// Converts a time in ps to internal units (ħ/meV).
pub fn ps_to_internal(t_ps: f64) -> f64 {
    t_ps / HBAR_MEV_PS
}

/// Converts an internal time (ħ/meV) to ps.
pub fn internal_to_ps(t: f64) -> f64 {
    t * HBAR_MEV_PS
}
