//! Nuclear-sector observables: the classical pion field sourced by a trapped
//! nucleus under the nonlinear pion-nucleon coupling, the resulting nuclear
//! mass shift, and whether that shift could show up as an isotope shift of a
//! clock transition.
//!
//! Natural units throughout (ħ = c = 1, MeV). The trap size enters as MeV⁻¹.
//!
//! The source strength follows the trapped norm, so both the field and the
//! mass shift decay as `e^{-Γt}`. Isomeric (Mössbauer-type) transitions keep
//! the daughter in the parent's lattice site, leaving the field unchanged,
//! so no lattice model is provided.

use crate::decay::DecayLaw;
use crate::em::{NonlinearCouplings, TrapSetup};
use crate::error::{require_time, Error, Result};
use crate::isotope::IsotopeRecord;
use crate::units::{meters_to_inverse_mev, NEUTRAL_PION_MASS_MEV, NUCLEON_MASS_MEV};
use serde::Serialize;

/// Default scale of isotope shifts on optical clock lines, Hz.
pub const DEFAULT_ISOTOPE_SHIFT_SCALE_HZ: f64 = 1e9;
/// Default clock frequency resolution, Hz.
pub const DEFAULT_CLOCK_SENSITIVITY_HZ: f64 = 1e-3;

/// How the `g² A²` mass-shift formula is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MassShiftReading {
    /// Whole-nucleus shift: `A × g π_cl`, i.e. `g² A² ε_N / (l³ m_π²)`.
    #[default]
    TotalNuclear,
    /// Single-nucleon shift `g π_cl`, i.e. `g² A ε_N / (l³ m_π²)`.
    PerNucleon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Detectable,
    NotDetectable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QcdShiftResult {
    /// MeV.
    pub pion_field: f64,
    /// MeV.
    pub mass_shift: f64,
    pub relative_mass_shift: f64,
    /// Hz.
    pub isotopic_frequency_shift: f64,
    pub verdict: Verdict,
    pub reading: MassShiftReading,
}

/// `1 / (l³ m_π²)` in natural units.
fn geometric_factor(trap: &TrapSetup) -> f64 {
    let l = meters_to_inverse_mev(trap.size);
    1.0 / (l * l * l * NEUTRAL_PION_MASS_MEV * NEUTRAL_PION_MASS_MEV)
}

/// Classical pion field `e^{-Γt} g A ε_N / (l³ m_π²)`, MeV.
pub fn pion_field(
    couplings: &NonlinearCouplings,
    isotope: &IsotopeRecord,
    trap: &TrapSetup,
    law: &DecayLaw,
    t: f64,
) -> Result<f64> {
    require_time(t)?;
    let a = f64::from(isotope.mass_number);
    Ok(law.survival_unchecked(t)
        * couplings.pion_nucleon_g
        * a
        * couplings.epsilon_n
        * geometric_factor(trap))
}

/// Nuclear mass shift under the given reading, MeV.
pub fn mass_shift_with(
    reading: MassShiftReading,
    couplings: &NonlinearCouplings,
    isotope: &IsotopeRecord,
    trap: &TrapSetup,
    law: &DecayLaw,
    t: f64,
) -> Result<f64> {
    let per_nucleon = couplings.pion_nucleon_g * pion_field(couplings, isotope, trap, law, t)?;
    Ok(match reading {
        MassShiftReading::TotalNuclear => f64::from(isotope.mass_number) * per_nucleon,
        MassShiftReading::PerNucleon => per_nucleon,
    })
}

/// Total nuclear mass shift `e^{-Γt} g² A² ε_N / (l³ m_π²)`, MeV.
pub fn mass_shift(
    couplings: &NonlinearCouplings,
    isotope: &IsotopeRecord,
    trap: &TrapSetup,
    law: &DecayLaw,
    t: f64,
) -> Result<f64> {
    mass_shift_with(MassShiftReading::TotalNuclear, couplings, isotope, trap, law, t)
}

pub fn isotopic_detectability(
    couplings: &NonlinearCouplings,
    isotope: &IsotopeRecord,
    trap: &TrapSetup,
    clock_sensitivity: f64,
    isotope_shift_scale: f64,
) -> Result<QcdShiftResult> {
    isotopic_detectability_with(
        MassShiftReading::TotalNuclear,
        couplings,
        isotope,
        trap,
        clock_sensitivity,
        isotope_shift_scale,
    )
}

/// Compare the fresh-ion (t = 0) mass shift, transferred to the clock line as
/// `relative mass shift × isotope-shift scale`, against the clock sensitivity.
pub fn isotopic_detectability_with(
    reading: MassShiftReading,
    couplings: &NonlinearCouplings,
    isotope: &IsotopeRecord,
    trap: &TrapSetup,
    clock_sensitivity: f64,
    isotope_shift_scale: f64,
) -> Result<QcdShiftResult> {
    if !(clock_sensitivity.is_finite() && clock_sensitivity > 0.0) {
        return Err(Error::Domain("clock sensitivity must be > 0".into()));
    }
    if !(isotope_shift_scale.is_finite() && isotope_shift_scale > 0.0) {
        return Err(Error::Domain("isotope shift scale must be > 0".into()));
    }
    // The shift is taken at t = 0, so the decay law does not matter.
    let law = DecayLaw::stable();
    let pion = pion_field(couplings, isotope, trap, &law, 0.0)?;
    let shift = mass_shift_with(reading, couplings, isotope, trap, &law, 0.0)?;
    let reference_mass = match reading {
        MassShiftReading::TotalNuclear => f64::from(isotope.mass_number) * NUCLEON_MASS_MEV,
        MassShiftReading::PerNucleon => NUCLEON_MASS_MEV,
    };
    let relative = shift / reference_mass;
    let freq = relative * isotope_shift_scale;
    Ok(QcdShiftResult {
        pion_field: pion,
        mass_shift: shift,
        relative_mass_shift: relative,
        isotopic_frequency_shift: freq,
        verdict: if freq.abs() >= clock_sensitivity {
            Verdict::Detectable
        } else {
            Verdict::NotDetectable
        },
        reading,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decay::decay_law;
    use crate::isotope::builtin_registry;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn lu177() -> IsotopeRecord {
        builtin_registry().lookup("Lu-177").unwrap().clone()
    }

    fn trap(l_nm: f64) -> TrapSetup {
        TrapSetup::with_size_nm(l_nm).unwrap()
    }

    #[test]
    fn pion_field_examples() {
        let iso = lu177();
        let law = decay_law(&iso);
        assert_eq!(pion_field(&NonlinearCouplings::default(), &iso, &trap(10.0), &law, 0.0).unwrap(), 0.0);
        let c = NonlinearCouplings::nuclear(1.0);
        let p = pion_field(&c, &iso, &trap(10.0), &law, 0.0).unwrap();
        // 13.1 × 177 / ((1e7/197.327)³ × 134.977²), mpmath
        assert_relative_eq!(p, 9.778_777_380_592_820e-16, max_relative = 1e-12);
        let p2 = pion_field(&c, &iso, &trap(20.0), &law, 0.0).unwrap();
        assert_relative_eq!(p2, p / 8.0, max_relative = 1e-14);
    }

    #[test]
    fn mass_shift_examples() {
        let iso = lu177();
        let law = decay_law(&iso);
        let c = NonlinearCouplings::nuclear(1.0);
        let m0 = mass_shift(&c, &iso, &trap(10.0), &law, 0.0).unwrap();
        assert_relative_eq!(m0, 2.267_405_111_238_057e-12, max_relative = 1e-12);
        let mh = mass_shift(&c, &iso, &trap(10.0), &law, law.half_life).unwrap();
        assert_relative_eq!(mh, 0.5 * m0, max_relative = 1e-12);
        let mut heavy = iso.clone();
        heavy.mass_number = 354;
        let m2 = mass_shift(&c, &heavy, &trap(10.0), &law, 0.0).unwrap();
        assert_relative_eq!(m2, 4.0 * m0, max_relative = 1e-14);
        let per = mass_shift_with(MassShiftReading::PerNucleon, &c, &iso, &trap(10.0), &law, 0.0).unwrap();
        assert_relative_eq!(m0 / per, 177.0, max_relative = 1e-14);
    }

    #[test]
    fn detectability_examples() {
        let iso = lu177();
        let c = NonlinearCouplings::nuclear(1.0);
        let r = isotopic_detectability(&c, &iso, &trap(10.0), DEFAULT_CLOCK_SENSITIVITY_HZ, DEFAULT_ISOTOPE_SHIFT_SCALE_HZ).unwrap();
        // 2.2674e-12 MeV / (177 × 931.494 MeV) × 1e9 Hz, mpmath
        assert_relative_eq!(r.isotopic_frequency_shift, 1.375_231_442_025_026e-8, max_relative = 1e-12);
        assert_eq!(r.verdict, Verdict::NotDetectable);
        assert_relative_eq!(r.mass_shift, 13.1 * r.pion_field * 177.0, max_relative = 1e-12);

        // Scale ε_N so the shift lands at twice the sensitivity.
        let boost = 2.0 * DEFAULT_CLOCK_SENSITIVITY_HZ / r.isotopic_frequency_shift;
        let c2 = NonlinearCouplings::nuclear(boost);
        let r2 = isotopic_detectability(&c2, &iso, &trap(10.0), DEFAULT_CLOCK_SENSITIVITY_HZ, DEFAULT_ISOTOPE_SHIFT_SCALE_HZ).unwrap();
        assert_eq!(r2.verdict, Verdict::Detectable);

        let r0 = isotopic_detectability(&NonlinearCouplings::default(), &iso, &trap(10.0), 1e-3, 1e9).unwrap();
        assert_eq!(r0.isotopic_frequency_shift, 0.0);
        assert_eq!(r0.verdict, Verdict::NotDetectable);
    }

    #[test]
    fn readings_agree_on_relative_shift() {
        let iso = lu177();
        let c = NonlinearCouplings::nuclear(3.0);
        let a = isotopic_detectability_with(MassShiftReading::TotalNuclear, &c, &iso, &trap(10.0), 1e-3, 1e9).unwrap();
        let b = isotopic_detectability_with(MassShiftReading::PerNucleon, &c, &iso, &trap(10.0), 1e-3, 1e9).unwrap();
        assert_relative_eq!(a.relative_mass_shift, b.relative_mass_shift, max_relative = 1e-14);
        assert_eq!(a.verdict, b.verdict);
    }

    #[test]
    fn non_positive_inputs_are_rejected() {
        let iso = lu177();
        let c = NonlinearCouplings::nuclear(1.0);
        assert!(isotopic_detectability(&c, &iso, &trap(10.0), 0.0, 1e9).is_err());
        assert!(isotopic_detectability(&c, &iso, &trap(10.0), 1e-3, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn scaling_identities(eps in 1e-6f64..1e3, k in 0.1f64..10.0, l_nm in 1.0f64..1e3, t in 0.0f64..3e6) {
            let iso = lu177();
            let law = decay_law(&iso);
            let c = NonlinearCouplings::nuclear(eps);
            let ck = NonlinearCouplings::nuclear(k * eps);
            let p = pion_field(&c, &iso, &trap(l_nm), &law, t).unwrap();
            let m = mass_shift(&c, &iso, &trap(l_nm), &law, t).unwrap();
            prop_assert!((m / p - 13.1 * 177.0).abs() <= 1e-12 * 13.1 * 177.0);
            let pk = pion_field(&ck, &iso, &trap(l_nm), &law, t).unwrap();
            prop_assert!((pk / p - k).abs() <= 1e-13 * k);
            let p2 = pion_field(&c, &iso, &trap(2.0 * l_nm), &law, t).unwrap();
            prop_assert!((p / p2 - 8.0).abs() <= 1e-13 * 8.0);
            let p0 = pion_field(&c, &iso, &trap(l_nm), &law, 0.0).unwrap();
            let expect = (-law.gamma * t).exp();
            prop_assert!((p / p0 - expect).abs() <= 1e-12 * expect);
        }
    }
}
