//! Self-consistent integrator for the nonlinear two-level evolution.
//!
//! The trapped parent carries two clock-level amplitudes. Each step
//!
//! * drains trapped norm through the anti-Hermitian `-iΓ/2` term and books the
//!   drained amount in `escaped_norm`, so the total norm is conserved by
//!   construction;
//! * recomputes the Coulomb expectation from the *current* trapped norm
//!   `|a_l|² + |a_u|²`, not from the closed-form `e^{-Γt}`;
//! * applies the Stark shift `κ α_i E_NL²` to each level and accumulates the
//!   differential phase `(δE_u - δE_l)/ħ`.
//!
//! Amplitudes are propagated in the interaction picture with the optical
//! frequency removed. The generator is diagonal in the clock basis, so each
//! amplitude is carried as a population and a phase and the resulting real
//! system is stepped with classical fixed-step RK4. The common-mode nonlinear
//! potential `ε_γ e ⟨A₀⟩` is part of the evolution, but it is fast (GHz for
//! nm traps) and level-independent, so it gets its own phase accumulator.

use crate::decay::DecayLaw;
use crate::em::{ClockSystem, NonlinearCouplings, TrapSetup};
use crate::error::{Error, Result};
use crate::units::{coulomb_constant, ATOMIC_POLARIZABILITY_UNIT, ELEMENTARY_CHARGE, HBAR};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::ops::{Add, Mul};

/// Largest relative trapped-norm error tolerated in one step.
const STEP_NORM_TOLERANCE: f64 = 1e-6;
/// Initial states must be normalized to this accuracy.
const INITIAL_NORM_TOLERANCE: f64 = 1e-9;
/// Coarse-step errors below this, relative to the largest accumulated phase
/// (or 1), are round-off and reported as exact by [`convergence_order`].
const EXACT_ERROR_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelModel {
    pub clock: ClockSystem,
    pub law: DecayLaw,
    pub trap: TrapSetup,
    pub couplings: NonlinearCouplings,
    /// Energy added to both levels, J. Zero for the physical model; nonzero
    /// values probe common-mode rejection.
    pub common_level_shift: f64,
}

impl LevelModel {
    pub fn new(
        clock: ClockSystem,
        law: DecayLaw,
        trap: TrapSetup,
        couplings: NonlinearCouplings,
    ) -> Result<Self> {
        couplings.validate()?;
        Ok(Self {
            clock,
            law,
            trap,
            couplings,
            common_level_shift: 0.0,
        })
    }

    /// Coulomb expectation sourced by a given trapped norm, V.
    pub fn coulomb_potential(&self, trapped_norm: f64) -> f64 {
        trapped_norm * coulomb_constant() * ELEMENTARY_CHARGE / self.trap.size
    }

    /// Nonlinear field sourced by a given trapped norm, V/m.
    pub fn field(&self, trapped_norm: f64) -> f64 {
        self.couplings.epsilon_gamma * self.coulomb_potential(trapped_norm) / self.trap.size
    }

    /// (lower, upper) level shifts for a given trapped norm, J.
    pub fn level_shifts(&self, trapped_norm: f64) -> (f64, f64) {
        let e = self.field(trapped_norm);
        let scale = self.couplings.stark_kappa * ATOMIC_POLARIZABILITY_UNIT * e * e;
        (
            scale * self.clock.polarizability_lower + self.common_level_shift,
            scale * self.clock.polarizability_upper + self.common_level_shift,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateVector {
    pub amp_lower: Complex64,
    pub amp_upper: Complex64,
    pub escaped_norm: f64,
}

impl StateVector {
    pub fn new(amp_lower: Complex64, amp_upper: Complex64, escaped_norm: f64) -> Self {
        Self {
            amp_lower,
            amp_upper,
            escaped_norm,
        }
    }

    /// Equal superposition of the clock levels, as after a Ramsey π/2 pulse.
    pub fn ramsey() -> Self {
        let a = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::new(a, a, 0.0)
    }

    pub fn lower() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 0.0)
    }

    pub fn trapped_norm(&self) -> f64 {
        self.amp_lower.norm_sqr() + self.amp_upper.norm_sqr()
    }

    pub fn total_norm(&self) -> f64 {
        self.trapped_norm() + self.escaped_norm
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// Differential phase accumulated since the start, per sample.
    pub differential_phase: Vec<f64>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_phase(&self) -> f64 {
        self.differential_phase.last().copied().unwrap_or(0.0)
    }

    pub fn final_state(&self) -> Option<&StateVector> {
        self.states.last()
    }
}

/// RK4 state. The generator is diagonal in the clock basis, so each level
/// amplitude is `√p · e^{-iθ}` and the populations and phases are stepped
/// directly. The common-mode phase is kept apart from the level phases.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Frame {
    pop_lower: f64,
    pop_upper: f64,
    phase_lower: f64,
    phase_upper: f64,
    common_phase: f64,
    differential_phase: f64,
}

impl Add for Frame {
    type Output = Frame;
    fn add(self, o: Frame) -> Frame {
        Frame {
            pop_lower: self.pop_lower + o.pop_lower,
            pop_upper: self.pop_upper + o.pop_upper,
            phase_lower: self.phase_lower + o.phase_lower,
            phase_upper: self.phase_upper + o.phase_upper,
            common_phase: self.common_phase + o.common_phase,
            differential_phase: self.differential_phase + o.differential_phase,
        }
    }
}

impl Mul<f64> for Frame {
    type Output = Frame;
    fn mul(self, s: f64) -> Frame {
        Frame {
            pop_lower: self.pop_lower * s,
            pop_upper: self.pop_upper * s,
            phase_lower: self.phase_lower * s,
            phase_upper: self.phase_upper * s,
            common_phase: self.common_phase * s,
            differential_phase: self.differential_phase * s,
        }
    }
}

impl Frame {
    fn from_state(s: &StateVector) -> Self {
        Frame {
            pop_lower: s.amp_lower.norm_sqr(),
            pop_upper: s.amp_upper.norm_sqr(),
            phase_lower: -s.amp_lower.arg(),
            phase_upper: -s.amp_upper.arg(),
            common_phase: 0.0,
            differential_phase: 0.0,
        }
    }

    fn trapped_norm(&self) -> f64 {
        self.pop_lower + self.pop_upper
    }

    fn is_finite(&self) -> bool {
        [
            self.pop_lower,
            self.pop_upper,
            self.phase_lower,
            self.phase_upper,
            self.common_phase,
            self.differential_phase,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    fn amplitude(pop: f64, phase: f64) -> Complex64 {
        Complex64::from_polar(pop.max(0.0).sqrt(), -phase.rem_euclid(TAU))
    }

    fn to_state(self, escaped_norm: f64) -> StateVector {
        let common = self.common_phase.rem_euclid(TAU);
        StateVector::new(
            Self::amplitude(self.pop_lower, self.phase_lower + common),
            Self::amplitude(self.pop_upper, self.phase_upper + common),
            escaped_norm,
        )
    }
}

/// Right-hand side of `i da_j/dt = (δE_j/ħ - iΓ/2) a_j` in population/phase
/// form, with the common-mode potential and differential phase alongside.
fn derivative(model: &LevelModel, y: &Frame) -> Frame {
    let norm = y.trapped_norm();
    let (shift_l, shift_u) = model.level_shifts(norm);
    let gamma = model.law.gamma;
    Frame {
        pop_lower: -gamma * y.pop_lower,
        pop_upper: -gamma * y.pop_upper,
        phase_lower: shift_l / HBAR,
        phase_upper: shift_u / HBAR,
        common_phase: model.couplings.epsilon_gamma
            * ELEMENTARY_CHARGE
            * model.coulomb_potential(norm)
            / HBAR,
        differential_phase: (shift_u - shift_l) / HBAR,
    }
}

fn rk4_step(model: &LevelModel, y: &Frame, h: f64) -> Frame {
    let k1 = derivative(model, y);
    let k2 = derivative(model, &(*y + k1 * (0.5 * h)));
    let k3 = derivative(model, &(*y + k2 * (0.5 * h)));
    let k4 = derivative(model, &(*y + k3 * h));
    *y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

fn check_inputs(initial: &StateVector, t_span: (f64, f64), dt: f64) -> Result<usize> {
    let (start, end) = t_span;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }
    if !(start.is_finite() && end.is_finite() && end > start) {
        return Err(Error::InvalidArgument(format!(
            "time span must satisfy end > start, got ({start}, {end})"
        )));
    }
    if !(initial.escaped_norm >= 0.0
        && (initial.total_norm() - 1.0).abs() <= INITIAL_NORM_TOLERANCE)
    {
        return Err(Error::InvalidArgument(format!(
            "initial state must have unit total norm, got {}",
            initial.total_norm()
        )));
    }
    let steps = ((end - start) / dt * (1.0 - 1e-12)).ceil().max(1.0);
    if steps > 1e9 {
        return Err(Error::ResourceLimit(format!("{steps} steps requested")));
    }
    Ok(steps as usize)
}

/// Integrate `steps` equal steps across `t_span`, handing every sample to
/// `observe(step_index, time, frame, escaped_norm)`.
fn integrate(
    model: &LevelModel,
    initial: &StateVector,
    t_span: (f64, f64),
    steps: usize,
    mut observe: impl FnMut(usize, f64, &Frame, f64),
) -> Result<(Frame, f64)> {
    let (start, end) = t_span;
    let h = (end - start) / steps as f64;
    let decay = (-model.law.gamma * h).exp();
    let mut y = Frame::from_state(initial);
    let mut escaped = initial.escaped_norm;
    observe(0, start, &y, escaped);
    for k in 1..=steps {
        let before = y.trapped_norm();
        let next = rk4_step(model, &y, h);
        let after = next.trapped_norm();
        let drift = (after - before * decay).abs();
        if !next.is_finite() || drift > STEP_NORM_TOLERANCE * before.max(f64::MIN_POSITIVE) {
            return Err(Error::IntegrationFailure(format!(
                "trapped-norm drift {:.3e} at step {k} (t = {:.6e} s) exceeds {STEP_NORM_TOLERANCE:e}; use a smaller dt than {h:e} s",
                drift / before.max(f64::MIN_POSITIVE),
                start + (k as f64) * h,
            )));
        }
        escaped += (before - after).max(0.0);
        y = next;
        let t = if k == steps { end } else { start + k as f64 * h };
        observe(k, t, &y, escaped);
    }
    Ok((y, escaped))
}

/// Integrate the nonlinear evolution from `initial` over `t_span`.
///
/// The span is divided into `ceil(span / dt)` equal steps, so the step used
/// is at most `dt`. Every step is recorded.
pub fn evolve(
    model: &LevelModel,
    initial: &StateVector,
    t_span: (f64, f64),
    dt: f64,
) -> Result<TrajectoryRecord> {
    let steps = check_inputs(initial, t_span, dt)?;
    let mut rec = TrajectoryRecord {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        differential_phase: Vec::with_capacity(steps + 1),
    };
    integrate(model, initial, t_span, steps, |_, t, y, escaped| {
        rec.times.push(t);
        rec.states.push(y.to_state(escaped));
        rec.differential_phase.push(y.differential_phase);
    })?;
    Ok(rec)
}

/// Final differential phase and trapped norm without storing the trajectory.
pub fn evolve_final(
    model: &LevelModel,
    initial: &StateVector,
    t_span: (f64, f64),
    dt: f64,
) -> Result<(f64, StateVector)> {
    let steps = check_inputs(initial, t_span, dt)?;
    let (y, escaped) = integrate(model, initial, t_span, steps, |_, _, _, _| {})?;
    Ok((y.differential_phase, y.to_state(escaped)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// Observed order `log₂(err_dt / err_{dt/2})`; `None` when skipped.
    pub order: Option<f64>,
    pub error_coarse: f64,
    pub error_fine: f64,
    /// True when the problem is integrated exactly and no order is defined.
    pub skipped: bool,
}

fn frame_error(a: &Frame, b: &Frame) -> f64 {
    [
        a.pop_lower - b.pop_lower,
        a.pop_upper - b.pop_upper,
        a.phase_lower - b.phase_lower,
        a.phase_upper - b.phase_upper,
        a.differential_phase - b.differential_phase,
    ]
    .iter()
    .fold(0.0, |m, d| m.max(d.abs()))
}

/// Observed convergence order from runs at `dt` and `dt/2` against a `dt/8`
/// reference.
pub fn convergence_order(
    model: &LevelModel,
    initial: &StateVector,
    t_span: (f64, f64),
    dt: f64,
) -> Result<ConvergenceReport> {
    let steps = check_inputs(initial, t_span, dt)?;
    let run = |n: usize| integrate(model, initial, t_span, n, |_, _, _, _| {}).map(|r| r.0);
    let coarse = run(steps)?;
    let fine = run(2 * steps)?;
    let reference = run(8 * steps)?;
    let error_coarse = frame_error(&coarse, &reference);
    let error_fine = frame_error(&fine, &reference);
    let scale = [
        1.0,
        reference.phase_lower.abs(),
        reference.phase_upper.abs(),
        reference.differential_phase.abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if error_coarse < EXACT_ERROR_FLOOR * scale {
        return Ok(ConvergenceReport {
            order: None,
            error_coarse,
            error_fine,
            skipped: true,
        });
    }
    Ok(ConvergenceReport {
        order: Some((error_coarse / error_fine).log2()),
        error_coarse,
        error_fine,
        skipped: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decay::decay_law;
    use crate::em::clock_phase_shift;
    use crate::isotope::builtin_registry;
    use approx::assert_relative_eq;

    fn model(eps: f64, law: DecayLaw) -> LevelModel {
        let clock = ClockSystem::from_wavelength_nm(804.0, 0.0, 1.0, law.half_life.min(1e6)).unwrap();
        LevelModel::new(
            clock,
            law,
            TrapSetup::with_size_nm(10.0).unwrap(),
            NonlinearCouplings::electromagnetic(eps),
        )
        .unwrap()
    }

    fn lu177() -> DecayLaw {
        decay_law(builtin_registry().lookup("Lu-177").unwrap())
    }

    #[test]
    fn free_evolution_is_static() {
        let m = model(0.0, DecayLaw::stable());
        let init = StateVector::ramsey();
        let rec = evolve(&m, &init, (0.0, 1e4), 10.0).unwrap();
        assert_eq!(rec.len(), 1001);
        let last = rec.final_state().unwrap();
        assert_eq!(last.amp_lower, init.amp_lower);
        assert_eq!(last.amp_upper, init.amp_upper);
        assert_eq!(rec.final_phase(), 0.0);
    }

    #[test]
    fn pure_decay_matches_exponential() {
        let law = lu177();
        let m = model(0.0, law);
        let (_, s) = evolve_final(&m, &StateVector::ramsey(), (0.0, law.half_life), law.half_life / 1e4).unwrap();
        assert_relative_eq!(s.trapped_norm(), 0.5, max_relative = 1e-8);
        assert_relative_eq!(s.total_norm(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn phase_matches_closed_form_over_half_life() {
        let law = lu177();
        let mut m = model(1e-5, law);
        m.clock.interrogation_time = law.half_life;
        let (phase, _) = evolve_final(&m, &StateVector::ramsey(), (0.0, law.half_life), law.half_life / 1e5).unwrap();
        let closed = clock_phase_shift(&m.couplings, &m.trap, &law, &m.clock, 0.0).unwrap();
        assert_relative_eq!(phase, closed, max_relative = 1e-3);
    }

    #[test]
    fn escaped_norm_is_monotone_and_total_conserved() {
        let law = DecayLaw::from_gamma(1e-3);
        let m = model(1e-5, law);
        let rec = evolve(&m, &StateVector::ramsey(), (0.0, 5e3), 5.0).unwrap();
        for w in rec.states.windows(2) {
            assert!(w[1].escaped_norm >= w[0].escaped_norm);
        }
        for s in &rec.states {
            assert!((s.total_norm() - 1.0).abs() < 1e-7);
        }
        assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(rec.times.len(), rec.differential_phase.len());
    }

    #[test]
    fn state_sourced_potential_tracks_closed_form() {
        let law = lu177();
        let m = model(1e-5, law);
        let rec = evolve(&m, &StateVector::ramsey(), (0.0, 2.0 * law.half_life), law.half_life / 2e4).unwrap();
        let v0 = m.coulomb_potential(1.0);
        for (t, s) in rec.times.iter().zip(&rec.states) {
            let closed = v0 * (-law.gamma * t).exp();
            assert_relative_eq!(m.coulomb_potential(s.trapped_norm()), closed, max_relative = 1e-6);
        }
    }

    #[test]
    fn common_shift_cancels_in_differential_phase() {
        let law = lu177();
        let m = model(1e-5, law);
        let mut shifted = m;
        shifted.common_level_shift = 1e-37;
        let span = (0.0, law.half_life);
        let dt = law.half_life / 1e5;
        let (a, _) = evolve_final(&m, &StateVector::ramsey(), span, dt).unwrap();
        let (b, _) = evolve_final(&shifted, &StateVector::ramsey(), span, dt).unwrap();
        assert!((a - b).abs() < 1e-12, "{}", (a - b).abs());
    }

    #[test]
    fn disagreement_with_closed_form_shrinks_as_dt4() {
        // Fast decay so the quadrature error sits well above rounding.
        let law = DecayLaw::from_gamma(1e-2);
        let mut m = model(1e-7, law);
        m.clock.interrogation_time = 200.0;
        let closed = clock_phase_shift(&m.couplings, &m.trap, &law, &m.clock, 0.0).unwrap();
        let err = |dt: f64| {
            let (p, _) = evolve_final(&m, &StateVector::ramsey(), (0.0, 200.0), dt).unwrap();
            (p - closed).abs() / closed.abs()
        };
        let (e1, e2) = (err(2.0), err(1.0));
        assert!(e1 < 1e-3);
        let ratio = e1 / e2;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}, errors {e1:e} {e2:e}");
    }

    #[test]
    fn reference_case_is_fourth_order() {
        let law = lu177();
        let m = model(1e-5, law);
        let rep = convergence_order(&m, &StateVector::ramsey(), (0.0, law.half_life), law.half_life / 100.0).unwrap();
        let p = rep.order.unwrap();
        assert!((3.5..=4.5).contains(&p), "{rep:?}");
    }

    #[test]
    fn exact_case_skips_order() {
        let m = model(0.0, DecayLaw::stable());
        let rep = convergence_order(&m, &StateVector::ramsey(), (0.0, 100.0), 1.0).unwrap();
        assert!(rep.skipped);
        assert!(rep.order.is_none());
        assert_eq!(rep.error_coarse, 0.0);
    }

    #[test]
    fn oversized_step_fails() {
        let law = lu177();
        let m = model(1e-5, law);
        let span = (0.0, 3.0 * law.half_life);
        let err = evolve(&m, &StateVector::ramsey(), span, law.half_life).unwrap_err();
        assert!(matches!(err, Error::IntegrationFailure(_)), "{err:?}");
        assert!(convergence_order(&m, &StateVector::ramsey(), span, law.half_life).is_err());
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let m = model(1e-5, lu177());
        let init = StateVector::ramsey();
        assert!(evolve(&m, &init, (0.0, 10.0), 0.0).is_err());
        assert!(evolve(&m, &init, (10.0, 10.0), 1.0).is_err());
        let unnormalized = StateVector::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), 0.0);
        assert!(matches!(evolve(&m, &unnormalized, (0.0, 10.0), 1.0), Err(Error::InvalidArgument(_))));
    }
}
