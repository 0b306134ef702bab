//! Physical constants and the handful of unit conversions the rest of the
//! crate needs.
//!
//! The EM sector works in SI. The QCD sector works in natural units
//! (ħ = c = 1, energies in MeV, lengths in MeV⁻¹). Crossing between the two
//! goes through [`convert`].

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Elementary charge, C (SI 2019 exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity ε₀, F/m (CODATA 2018).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Planck constant, J·s (SI 2019 exact).
pub const PLANCK_H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = PLANCK_H / (2.0 * PI);
/// Speed of light, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Atomic unit of electric polarizability, J/(V/m)² (CODATA 2018, 6 digits).
pub const ATOMIC_POLARIZABILITY_UNIT: f64 = 1.648_78e-41;
/// ħc in MeV·fm (PDG, 6 digits).
pub const HBAR_C_MEV_FM: f64 = 197.327;
/// Neutral pion mass, MeV (PDG).
pub const NEUTRAL_PION_MASS_MEV: f64 = 134.977;
/// Nucleon mass per atomic mass unit, MeV (1 u in MeV/c²).
pub const NUCLEON_MASS_MEV: f64 = 931.494;
pub const SECONDS_PER_DAY: f64 = 86_400.0;
/// Electron-volt in joules (exact).
pub const ELECTRON_VOLT: f64 = ELEMENTARY_CHARGE;

/// Coulomb constant 1/(4πε₀), N·m²/C².
pub fn coulomb_constant() -> f64 {
    1.0 / (4.0 * PI * VACUUM_PERMITTIVITY)
}

/// Snapshot of the constants as a value, for reports and metadata echo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub elementary_charge: f64,
    pub vacuum_permittivity: f64,
    pub planck_h: f64,
    pub hbar: f64,
    pub atomic_polarizability_unit: f64,
    pub hbar_c: f64,
    pub neutral_pion_mass: f64,
    pub nucleon_mass: f64,
    pub seconds_per_day: f64,
}

impl PhysicalConstants {
    pub const fn get() -> Self {
        Self {
            elementary_charge: ELEMENTARY_CHARGE,
            vacuum_permittivity: VACUUM_PERMITTIVITY,
            planck_h: PLANCK_H,
            hbar: HBAR,
            atomic_polarizability_unit: ATOMIC_POLARIZABILITY_UNIT,
            hbar_c: HBAR_C_MEV_FM,
            neutral_pion_mass: NEUTRAL_PION_MASS_MEV,
            nucleon_mass: NUCLEON_MASS_MEV,
            seconds_per_day: SECONDS_PER_DAY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Time,
    Length,
    Energy,
    Frequency,
    Field,
}

/// Units known to [`convert`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Second,
    Minute,
    Hour,
    Day,
    Meter,
    Nanometer,
    Femtometer,
    /// Natural-unit length, ħc / MeV.
    InverseMev,
    Joule,
    ElectronVolt,
    Mev,
    Hertz,
    Millihertz,
    Gigahertz,
    VoltPerMeter,
    KilovoltPerMeter,
}

impl Unit {
    pub const ALL: [Unit; 16] = [
        Unit::Second,
        Unit::Minute,
        Unit::Hour,
        Unit::Day,
        Unit::Meter,
        Unit::Nanometer,
        Unit::Femtometer,
        Unit::InverseMev,
        Unit::Joule,
        Unit::ElectronVolt,
        Unit::Mev,
        Unit::Hertz,
        Unit::Millihertz,
        Unit::Gigahertz,
        Unit::VoltPerMeter,
        Unit::KilovoltPerMeter,
    ];

    pub fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            Second | Minute | Hour | Day => Dimension::Time,
            Meter | Nanometer | Femtometer | InverseMev => Dimension::Length,
            Joule | ElectronVolt | Mev => Dimension::Energy,
            Hertz | Millihertz | Gigahertz => Dimension::Frequency,
            VoltPerMeter | KilovoltPerMeter => Dimension::Field,
        }
    }

    /// Size of one of this unit in the SI base unit of its dimension.
    fn to_base(self) -> f64 {
        use Unit::*;
        match self {
            Second => 1.0,
            Minute => 60.0,
            Hour => 3_600.0,
            Day => SECONDS_PER_DAY,
            Meter => 1.0,
            Nanometer => 1e-9,
            Femtometer => 1e-15,
            InverseMev => HBAR_C_MEV_FM * 1e-15,
            Joule => 1.0,
            ElectronVolt => ELECTRON_VOLT,
            Mev => ELECTRON_VOLT * 1e6,
            Hertz => 1.0,
            Millihertz => 1e-3,
            Gigahertz => 1e9,
            VoltPerMeter => 1.0,
            KilovoltPerMeter => 1e3,
        }
    }

    fn symbol(self) -> &'static str {
        use Unit::*;
        match self {
            Second => "s",
            Minute => "min",
            Hour => "h",
            Day => "d",
            Meter => "m",
            Nanometer => "nm",
            Femtometer => "fm",
            InverseMev => "MeV^-1",
            Joule => "J",
            ElectronVolt => "eV",
            Mev => "MeV",
            Hertz => "Hz",
            Millihertz => "mHz",
            Gigahertz => "GHz",
            VoltPerMeter => "V/m",
            KilovoltPerMeter => "kV/m",
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
        Unit::ALL
            .into_iter()
            .find(|u| u.symbol() == s)
            .ok_or_else(|| Error::Parse(format!("unknown unit `{s}`")))
    }
}

/// Convert `value` between two units of the same dimension.
///
/// Computed as `(value * from) / to` so that scaling the input by a power of
/// two scales the output exactly.
pub fn convert(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from.dimension() != to.dimension() {
        return Err(Error::DimensionMismatch {
            from: from.to_string(),
            to: to.to_string(),
        });
    }
    if from == to {
        return Ok(value);
    }
    Ok(value * from.to_base() / to.to_base())
}

/// Natural-unit length (MeV⁻¹) of an SI length in metres.
pub fn meters_to_inverse_mev(meters: f64) -> f64 {
    meters / Unit::InverseMev.to_base()
}

pub fn days_to_seconds(days: f64) -> f64 {
    days * SECONDS_PER_DAY
}

/// Optical frequency (Hz) of a vacuum wavelength given in nm.
pub fn wavelength_nm_to_hz(wavelength_nm: f64) -> f64 {
    SPEED_OF_LIGHT / (wavelength_nm * 1e-9)
}
