//! Closed-form observables of the electromagnetic nonlinearity.
//!
//! The trapped parent's charge expectation sources a Coulomb potential
//! `⟨A₀⟩ = e^{-Γt} e / (4πε₀ l)` over the trap size `l`. The nonlinear
//! coupling turns it into a background field `E_NL = ε_γ e^{-Γt} e / (4πε₀ l²)`,
//! and each clock level picks up a second-order Stark shift `κ α E_NL²`.
//! The clock observable is the differential shift, so everything downstream
//! of the field decays as `e^{-2Γt}`.
//!
//! `ε_γ` is applied exactly once, in [`e_field_nl`]; [`coulomb_expectation`]
//! is the bare expectation.

use crate::decay::DecayLaw;
use crate::error::{require_time, Error, Result};
use crate::units::{
    coulomb_constant, wavelength_nm_to_hz, ATOMIC_POLARIZABILITY_UNIT, ELEMENTARY_CHARGE, HBAR,
    PLANCK_H, VACUUM_PERMITTIVITY,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Typical blackbody field scale, V/m.
pub const DEFAULT_BLACKBODY_FIELD: f64 = 1e3;
/// Pion-nucleon coupling used when none is given.
pub const DEFAULT_PION_NUCLEON_G: f64 = 13.1;

/// Idealized trap: the ion is confined within `size` metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapSetup {
    pub size: f64,
    pub blackbody_field: f64,
}

impl TrapSetup {
    pub fn new(size: f64, blackbody_field: f64) -> Result<Self> {
        if !(size.is_finite() && size > 0.0) {
            return Err(Error::Domain(format!("trap size must be > 0, got {size}")));
        }
        if !(blackbody_field.is_finite() && blackbody_field >= 0.0) {
            return Err(Error::Domain(format!(
                "blackbody field must be >= 0, got {blackbody_field}"
            )));
        }
        Ok(Self {
            size,
            blackbody_field,
        })
    }

    pub fn with_size_nm(size_nm: f64) -> Result<Self> {
        Self::new(size_nm * 1e-9, DEFAULT_BLACKBODY_FIELD)
    }
}

/// Two clock levels with static polarizabilities in atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockSystem {
    /// Hz.
    pub transition_frequency: f64,
    pub polarizability_lower: f64,
    pub polarizability_upper: f64,
    /// Ramsey free-evolution time, s.
    pub interrogation_time: f64,
}

impl ClockSystem {
    pub fn new(
        transition_frequency: f64,
        polarizability_lower: f64,
        polarizability_upper: f64,
        interrogation_time: f64,
    ) -> Result<Self> {
        if !(transition_frequency.is_finite() && transition_frequency > 0.0) {
            return Err(Error::Domain("transition frequency must be > 0".into()));
        }
        if !(interrogation_time.is_finite() && interrogation_time > 0.0) {
            return Err(Error::Domain("interrogation time must be > 0".into()));
        }
        if !(polarizability_lower.is_finite() && polarizability_upper.is_finite()) {
            return Err(Error::Domain("polarizabilities must be finite".into()));
        }
        Ok(Self {
            transition_frequency,
            polarizability_lower,
            polarizability_upper,
            interrogation_time,
        })
    }

    pub fn from_wavelength_nm(
        wavelength_nm: f64,
        polarizability_lower: f64,
        polarizability_upper: f64,
        interrogation_time: f64,
    ) -> Result<Self> {
        Self::new(
            wavelength_nm_to_hz(wavelength_nm),
            polarizability_lower,
            polarizability_upper,
            interrogation_time,
        )
    }

    /// Δα_P = upper − lower, atomic units.
    pub fn delta_alpha(&self) -> f64 {
        self.polarizability_upper - self.polarizability_lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearCouplings {
    pub epsilon_gamma: f64,
    pub epsilon_n: f64,
    pub pion_nucleon_g: f64,
    /// Convention factor on the Stark estimator (1 = literal `E² α`).
    pub stark_kappa: f64,
}

impl Default for NonlinearCouplings {
    fn default() -> Self {
        Self {
            epsilon_gamma: 0.0,
            epsilon_n: 0.0,
            pion_nucleon_g: DEFAULT_PION_NUCLEON_G,
            stark_kappa: 1.0,
        }
    }
}

impl NonlinearCouplings {
    pub fn electromagnetic(epsilon_gamma: f64) -> Self {
        Self {
            epsilon_gamma,
            ..Self::default()
        }
    }

    pub fn nuclear(epsilon_n: f64) -> Self {
        Self {
            epsilon_n,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.stark_kappa.is_finite() && self.stark_kappa > 0.0) {
            return Err(Error::Domain("stark_kappa must be > 0".into()));
        }
        if !(self.epsilon_gamma.is_finite()
            && self.epsilon_n.is_finite()
            && self.pion_nucleon_g.is_finite())
        {
            return Err(Error::Domain("couplings must be finite".into()));
        }
        Ok(())
    }
}

/// Bare Coulomb expectation `e^{-Γt} e / (4πε₀ l)`, volts.
pub fn coulomb_expectation(trap: &TrapSetup, law: &DecayLaw, t: f64) -> Result<f64> {
    require_time(t)?;
    Ok(law.survival_unchecked(t) * coulomb_constant() * ELEMENTARY_CHARGE / trap.size)
}

/// Field at unit survival and unit ε_γ, V/m.
fn field_scale(trap: &TrapSetup) -> f64 {
    coulomb_constant() * ELEMENTARY_CHARGE / (trap.size * trap.size)
}

/// Nonlinear background field `E_NL(t)`, V/m.
pub fn e_field_nl(
    couplings: &NonlinearCouplings,
    trap: &TrapSetup,
    law: &DecayLaw,
    t: f64,
) -> Result<f64> {
    require_time(t)?;
    Ok(couplings.epsilon_gamma * law.survival_unchecked(t) * field_scale(trap))
}

/// Second-order Stark shift `κ α E²`, joules, with `alpha` in atomic units.
pub fn stark_shift(field: f64, alpha: f64, kappa: f64) -> f64 {
    kappa * alpha * ATOMIC_POLARIZABILITY_UNIT * field * field
}

/// `∫_{start}^{start+T} e^{-2Γt'} dt'`, continuous through Γ = 0.
fn squared_survival_integral(gamma: f64, start: f64, duration: f64) -> f64 {
    let head = (-2.0 * gamma * start).exp();
    if gamma == 0.0 {
        duration * head
    } else {
        head * -(-2.0 * gamma * duration).exp_m1() / (2.0 * gamma)
    }
}

/// Differential Ramsey phase accumulated over `[start, start + T]`, radians.
pub fn clock_phase_shift(
    couplings: &NonlinearCouplings,
    trap: &TrapSetup,
    law: &DecayLaw,
    clock: &ClockSystem,
    start: f64,
) -> Result<f64> {
    require_time(start)?;
    let e0 = couplings.epsilon_gamma * field_scale(trap);
    let rate0 = stark_shift(e0, clock.delta_alpha(), couplings.stark_kappa) / HBAR;
    Ok(rate0 * squared_survival_integral(law.gamma, start, clock.interrogation_time))
}

/// Smallest ε_γ whose t = 0 field reaches the trap's blackbody field.
pub fn blackbody_bound(trap: &TrapSetup) -> Result<f64> {
    if trap.blackbody_field <= 0.0 {
        return Err(Error::Domain(
            "blackbody field must be > 0 to set a bound".into(),
        ));
    }
    Ok(trap.blackbody_field * 4.0 * PI * VACUUM_PERMITTIVITY * trap.size * trap.size
        / ELEMENTARY_CHARGE)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgingRow {
    pub t: f64,
    pub survival: f64,
    pub e_nl: f64,
    pub delta_e_upper: f64,
    pub delta_e_lower: f64,
    /// Clock frequency shift, upper minus lower, Hz.
    pub delta_nu: f64,
    /// Ramsey phase over `[t, t + T]`, radians.
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct AgingSeries {
    pub rows: Vec<AgingRow>,
}

impl AgingSeries {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Clock frequency shift `κ Δα E_NL(t)² / h`, Hz.
pub fn frequency_shift(
    couplings: &NonlinearCouplings,
    trap: &TrapSetup,
    law: &DecayLaw,
    clock: &ClockSystem,
    t: f64,
) -> Result<f64> {
    let e = e_field_nl(couplings, trap, law, t)?;
    let upper = stark_shift(e, clock.polarizability_upper, couplings.stark_kappa);
    let lower = stark_shift(e, clock.polarizability_lower, couplings.stark_kappa);
    Ok((upper - lower) / PLANCK_H)
}

/// Evaluate the aging observables at each epoch of an ascending schedule.
pub fn aging_series(
    couplings: &NonlinearCouplings,
    trap: &TrapSetup,
    law: &DecayLaw,
    clock: &ClockSystem,
    schedule: &[f64],
) -> Result<AgingSeries> {
    if let Some(w) = schedule.windows(2).find(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument(format!(
            "schedule must be sorted ascending ({} precedes {})",
            w[0], w[1]
        )));
    }
    let rows = schedule
        .iter()
        .map(|&t| {
            let e_nl = e_field_nl(couplings, trap, law, t)?;
            let delta_e_upper = stark_shift(e_nl, clock.polarizability_upper, couplings.stark_kappa);
            let delta_e_lower = stark_shift(e_nl, clock.polarizability_lower, couplings.stark_kappa);
            Ok(AgingRow {
                t,
                survival: law.survival_unchecked(t),
                e_nl,
                delta_e_upper,
                delta_e_lower,
                delta_nu: (delta_e_upper - delta_e_lower) / PLANCK_H,
                phase: clock_phase_shift(couplings, trap, law, clock, t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AgingSeries { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decay::decay_law;
    use crate::isotope::builtin_registry;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn lu177() -> DecayLaw {
        decay_law(builtin_registry().lookup("Lu-177").unwrap())
    }

    fn trap10() -> TrapSetup {
        TrapSetup::with_size_nm(10.0).unwrap()
    }

    fn clock(delta_alpha: f64, t: f64) -> ClockSystem {
        ClockSystem::from_wavelength_nm(804.0, 0.0, delta_alpha, t).unwrap()
    }

    #[test]
    fn coulomb_expectation_examples() {
        let law = lu177();
        let v0 = coulomb_expectation(&trap10(), &law, 0.0).unwrap();
        // k e / l, mpmath
        assert_relative_eq!(v0, 0.143_996_454_784_256_7, max_relative = 1e-12);
        let vh = coulomb_expectation(&trap10(), &law, law.half_life).unwrap();
        assert_relative_eq!(vh, 0.5 * v0, max_relative = 1e-12);
        let stable = DecayLaw::stable();
        assert_eq!(
            coulomb_expectation(&trap10(), &stable, 0.0).unwrap(),
            coulomb_expectation(&trap10(), &stable, 1e9).unwrap()
        );
    }

    #[test]
    fn field_examples() {
        let law = lu177();
        assert_eq!(e_field_nl(&NonlinearCouplings::default(), &trap10(), &law, 0.0).unwrap(), 0.0);
        let c = NonlinearCouplings::electromagnetic(1e-5);
        assert_relative_eq!(
            e_field_nl(&c, &trap10(), &law, 0.0).unwrap(),
            143.996_454_784_256_7,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            e_field_nl(&c, &trap10(), &law, law.half_life).unwrap(),
            71.998_227_392_128_36,
            max_relative = 1e-12
        );
    }

    #[test]
    fn stark_examples() {
        assert_eq!(stark_shift(0.0, 5.0, 1.0), 0.0);
        let de = stark_shift(1e3, 1.0, 1.0);
        assert_relative_eq!(de, 1.648_78e-35, max_relative = 1e-12);
        assert_relative_eq!(de / PLANCK_H, 0.024_883_225_843_903_87, max_relative = 1e-12);
        assert_relative_eq!(stark_shift(2e3, 1.0, 1.0), 4.0 * de, max_relative = 1e-15);
    }

    #[test]
    fn phase_examples() {
        let c = NonlinearCouplings::electromagnetic(1e-5);
        let law = lu177();
        assert_eq!(clock_phase_shift(&c, &trap10(), &law, &clock(0.0, 1.0), 0.0).unwrap(), 0.0);

        // E_NL = 1 kV/m held constant: choose ε_γ so the t = 0 field is 1e3.
        let trap = trap10();
        let eps = blackbody_bound(&trap).unwrap();
        let c = NonlinearCouplings::electromagnetic(eps);
        let phi = clock_phase_shift(&c, &trap, &DecayLaw::stable(), &clock(1.0, 1.0), 0.0).unwrap();
        assert_relative_eq!(phi, 0.156_345_919_017_648_2, max_relative = 1e-12);

        let c = NonlinearCouplings::electromagnetic(1e-5);
        let p0 = clock_phase_shift(&c, &trap, &law, &clock(1.0, 100.0), 0.0).unwrap();
        let late = clock_phase_shift(&c, &trap, &law, &clock(1.0, 100.0), 1e3 / law.gamma).unwrap();
        assert!(late.abs() <= 1e-12 * p0.abs());
    }

    #[test]
    fn phase_over_one_half_life() {
        // 2π α_au E0² / h × (1 − e^{−2Γ t½}) / (2Γ), mpmath
        let law = lu177();
        let c = NonlinearCouplings::electromagnetic(1e-5);
        let phi = clock_phase_shift(&c, &trap10(), &law, &clock(1.0, law.half_life), 0.0).unwrap();
        assert_relative_eq!(phi, 1007.700_197_727_449, max_relative = 1e-11);
    }

    #[test]
    fn phase_continuous_at_stable_limit() {
        let c = NonlinearCouplings::electromagnetic(1e-5);
        let clk = clock(1.0, 3600.0);
        let limit = clock_phase_shift(&c, &trap10(), &DecayLaw::stable(), &clk, 50.0).unwrap();
        let tiny = clock_phase_shift(&c, &trap10(), &DecayLaw::from_gamma(1e-30), &clk, 50.0).unwrap();
        assert_relative_eq!(limit, tiny, max_relative = 1e-9);
    }

    #[test]
    fn bound_examples() {
        let b = blackbody_bound(&trap10()).unwrap();
        assert_relative_eq!(b, 6.944_615_417_777_154e-5, max_relative = 1e-12);
        let b2 = blackbody_bound(&TrapSetup::with_size_nm(20.0).unwrap()).unwrap();
        assert_relative_eq!(b2, 4.0 * b, max_relative = 1e-15);
        let b3 = blackbody_bound(&TrapSetup::new(1e-8, 2e3).unwrap()).unwrap();
        assert_relative_eq!(b3, 2.0 * b, max_relative = 1e-15);
        assert!(matches!(blackbody_bound(&TrapSetup::new(1e-8, 0.0).unwrap()), Err(Error::Domain(_))));
    }

    #[test]
    fn bound_inverts_the_field() {
        for l_nm in [1.0, 10.0, 37.5, 1e3] {
            let trap = TrapSetup::new(l_nm * 1e-9, 850.0).unwrap();
            let c = NonlinearCouplings::electromagnetic(blackbody_bound(&trap).unwrap());
            let e = e_field_nl(&c, &trap, &lu177(), 0.0).unwrap();
            assert_relative_eq!(e, 850.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn series_examples() {
        let law = lu177();
        let sched: Vec<f64> = (0..50).map(|k| k as f64 * 3.0e4).collect();
        let zero = aging_series(&NonlinearCouplings::default(), &trap10(), &law, &clock(1.0, 1.0), &sched).unwrap();
        assert!(zero.rows.iter().all(|r| r.delta_nu == 0.0 && r.phase == 0.0 && r.e_nl == 0.0));

        let c = NonlinearCouplings::electromagnetic(1e-5);
        let s = aging_series(&c, &trap10(), &law, &clock(1.0, 1.0), &sched).unwrap();
        assert_eq!(s.len(), 50);
        // (143.996 V/m)² × α_au / h, mpmath
        assert_relative_eq!(s.rows[0].delta_nu, 5.159_531_650_875_833e-4, max_relative = 1e-12);
        for r in &s.rows {
            let expect = (-2.0 * law.gamma * r.t).exp();
            assert_relative_eq!(r.delta_nu / s.rows[0].delta_nu, expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn series_rejects_unsorted_schedule() {
        let c = NonlinearCouplings::electromagnetic(1e-5);
        let err = aging_series(&c, &trap10(), &lu177(), &clock(1.0, 1.0), &[0.0, 2.0, 1.0]);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
        assert!(aging_series(&c, &trap10(), &lu177(), &clock(1.0, 1.0), &[]).unwrap().is_empty());
    }

    #[test]
    fn constructor_validation() {
        assert!(TrapSetup::new(0.0, 1e3).is_err());
        assert!(TrapSetup::new(1e-8, -1.0).is_err());
        assert!(ClockSystem::new(0.0, 0.0, 1.0, 1.0).is_err());
        assert!(ClockSystem::new(1e14, 0.0, 1.0, 0.0).is_err());
        let mut c = NonlinearCouplings::default();
        c.stark_kappa = 0.0;
        assert!(c.validate().is_err());
    }

    proptest! {
        #[test]
        fn epsilon_scaling(eps in 1e-8f64..1e-2, k in 0.1f64..10.0, t in 0.0f64..2e6) {
            let law = lu177();
            let trap = trap10();
            let clk = clock(2.5, 10.0);
            let a = NonlinearCouplings::electromagnetic(eps);
            let b = NonlinearCouplings::electromagnetic(k * eps);
            let ea = e_field_nl(&a, &trap, &law, t).unwrap();
            let eb = e_field_nl(&b, &trap, &law, t).unwrap();
            prop_assert!((eb / ea - k).abs() <= 1e-14 * k);
            let sa = stark_shift(ea, 2.5, 1.0);
            let sb = stark_shift(eb, 2.5, 1.0);
            prop_assert!((sb / sa - k * k).abs() <= 1e-13 * k * k);
            let pa = clock_phase_shift(&a, &trap, &law, &clk, t).unwrap();
            let pb = clock_phase_shift(&b, &trap, &law, &clk, t).unwrap();
            prop_assert!((pb / pa - k * k).abs() <= 1e-13 * k * k);
        }

        #[test]
        fn aging_law_between_epochs(t1 in 0.0f64..3e6, t2 in 0.0f64..3e6) {
            let law = lu177();
            let c = NonlinearCouplings::electromagnetic(1e-5);
            let clk = clock(1.0, 1.0);
            let d1 = frequency_shift(&c, &trap10(), &law, &clk, t1).unwrap();
            let d2 = frequency_shift(&c, &trap10(), &law, &clk, t2).unwrap();
            let expect = (-2.0 * law.gamma * (t1 - t2)).exp();
            prop_assert!((d1 / d2 - expect).abs() <= 1e-12 * expect);
        }
    }
}
