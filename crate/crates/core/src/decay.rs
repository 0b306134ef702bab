//! Survival of the trapped parent ion.
//!
//! The decayed state is a two-branch superposition: a trapped parent with
//! amplitude `e^{-Γt/2}` and an aggregate escaped-daughter branch with
//! amplitude `√(1 - e^{-Γt})`. The daughter's internal structure is never
//! resolved.

use crate::error::{require_time, Result};
use crate::isotope::{HalfLife, IsotopeRecord};
use serde::Serialize;
use std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayLaw {
    /// Decay rate Γ, s⁻¹. Zero for stable species.
    pub gamma: f64,
    /// Seconds; infinite for stable species.
    pub half_life: f64,
}

impl DecayLaw {
    pub fn from_half_life(half_life: HalfLife) -> Self {
        match half_life {
            HalfLife::Stable => Self::stable(),
            HalfLife::Finite(s) => Self {
                gamma: LN_2 / s,
                half_life: s,
            },
        }
    }

    pub fn from_gamma(gamma: f64) -> Self {
        if gamma == 0.0 {
            Self::stable()
        } else {
            Self {
                gamma,
                half_life: LN_2 / gamma,
            }
        }
    }

    pub fn stable() -> Self {
        Self {
            gamma: 0.0,
            half_life: f64::INFINITY,
        }
    }

    pub fn is_stable(&self) -> bool {
        self.gamma == 0.0
    }

    /// `e^{-Γt}` without the domain check, for internal hot paths.
    pub(crate) fn survival_unchecked(&self, t: f64) -> f64 {
        (-self.gamma * t).exp()
    }
}

pub fn decay_law(isotope: &IsotopeRecord) -> DecayLaw {
    DecayLaw::from_half_life(isotope.half_life)
}

/// Trapped-branch amplitude `e^{-Γt/2}`.
pub fn survival_amplitude(law: &DecayLaw, t: f64) -> Result<f64> {
    require_time(t)?;
    Ok((-0.5 * law.gamma * t).exp())
}

/// Escaped-branch amplitude `√(1 - e^{-Γt})`.
pub fn escaped_amplitude(law: &DecayLaw, t: f64) -> Result<f64> {
    require_time(t)?;
    Ok((-(-law.gamma * t).exp_m1()).sqrt())
}

/// Trapped-branch probability `e^{-Γt}`.
pub fn survival_probability(law: &DecayLaw, t: f64) -> Result<f64> {
    require_time(t)?;
    Ok(law.survival_unchecked(t))
}
