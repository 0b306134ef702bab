//! Simulation and sensitivity tools for "atom aging": a slow drift of a
//! trapped radioactive ion's clock frequency as its parent nucleus decays,
//! driven by a state-dependent (nonlinear) modification of the
//! electromagnetic and pion-nucleon interactions.
//!
//! * [`units`]: constants and unit conversion.
//! * [`isotope`]: built-in and file-loaded isotope records.
//! * [`decay`]: survival amplitudes of the trapped parent.
//! * [`em`]: closed-form field, Stark shift, clock phase and blackbody bound.
//! * [`qcd`]: pion field, nuclear mass shift, isotope-shift detectability.
//! * [`dynamics`]: self-consistent RK4 integration of the nonlinear evolution.
//! * [`campaign`]: simulated measurement campaigns, fitting and reach.

pub mod campaign;
pub mod decay;
pub mod dynamics;
pub mod em;
mod error;
pub mod isotope;
pub mod qcd;
pub mod units;

pub use campaign::{
    epsilon_reach, fit_aging, simulate_campaign, CampaignPlan, CampaignReport, CampaignResult,
    FitPoint, FitResult,
};
pub use decay::{decay_law, survival_amplitude, survival_probability, DecayLaw};
pub use dynamics::{convergence_order, evolve, LevelModel, StateVector, TrajectoryRecord};
pub use em::{
    aging_series, blackbody_bound, clock_phase_shift, coulomb_expectation, e_field_nl,
    stark_shift, AgingRow, AgingSeries, ClockSystem, NonlinearCouplings, TrapSetup,
};
pub use error::{Error, Result};
pub use isotope::{builtin_registry, load_registry, IsotopeRecord, Registry};
pub use qcd::{isotopic_detectability, mass_shift, pion_field, QcdShiftResult, Verdict};
pub use units::{convert, PhysicalConstants, Unit};
