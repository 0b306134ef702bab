//! End-to-end measurement campaigns.
//!
//! A campaign interrogates the clock at a schedule of epochs spanning the
//! parent's half-life, adds white Gaussian frequency noise, and fits
//! `ν(t) = c + A e^{-2Γt}` with Γ fixed at the isotope value. The aging
//! signal is the amplitude `A`; its significance is `|A| / σ_A`.
//!
//! Noise comes from ChaCha20 seeded with a `u64` through `seed_from_u64`,
//! mapped through the `rand_distr` ziggurat standard normal. Given the seed
//! the noise sequence is bit-reproducible on every platform.

use crate::decay::DecayLaw;
use crate::dynamics::LevelModel;
use crate::em::{aging_series, frequency_shift, NonlinearCouplings};
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

pub const DEFAULT_N_SIGMA: f64 = 5.0;
/// Recorded in every report so results can be regenerated.
pub const GENERATOR_ALGORITHM: &str =
    "ChaCha20Rng::seed_from_u64 (rand_chacha 0.9) + StandardNormal ziggurat (rand_distr 0.5)";
/// Fits whose basis decorrelation `1 - cos²(1, e^{-2Γt})` falls below this
/// are flagged as ill-conditioned.
const CONDITION_THRESHOLD: f64 = 1e-3;
/// Below this relative decorrelation the normal equations are singular.
const SINGULAR_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignPlan {
    pub isotope: String,
    /// Measurement epochs, s since the ion was produced.
    pub schedule: Vec<f64>,
    /// Ramsey time per interrogation, s.
    pub interrogation_time: f64,
    /// Frequency noise per epoch, Hz (1σ).
    pub sigma_nu: f64,
    pub seed: u64,
    pub n_sigma_detect: f64,
    /// When false the measured values equal the true shifts, while the fit
    /// still weights by `sigma_nu` (nominal, noiseless error bars).
    pub inject_noise: bool,
}

impl CampaignPlan {
    pub fn new(isotope: impl Into<String>, schedule: Vec<f64>, interrogation_time: f64, sigma_nu: f64) -> Self {
        Self {
            isotope: isotope.into(),
            schedule,
            interrogation_time,
            sigma_nu,
            seed: 0,
            n_sigma_detect: DEFAULT_N_SIGMA,
            inject_noise: true,
        }
    }

    /// `samples` evenly spaced epochs over `[0, duration]`.
    pub fn uniform_schedule(duration: f64, samples: usize) -> Vec<f64> {
        match samples {
            0 => Vec::new(),
            1 => vec![0.0],
            n => (0..n)
                .map(|k| duration * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schedule.is_empty() {
            return Err(Error::InvalidArgument("schedule is empty".into()));
        }
        if self.schedule.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidArgument("schedule epochs must be finite and >= 0".into()));
        }
        if self.schedule.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("schedule must be strictly increasing".into()));
        }
        if !(self.sigma_nu.is_finite() && self.sigma_nu >= 0.0) {
            return Err(Error::InvalidArgument("sigma_nu must be >= 0".into()));
        }
        if !(self.interrogation_time.is_finite() && self.interrogation_time > 0.0) {
            return Err(Error::InvalidArgument("interrogation time must be > 0".into()));
        }
        if !(self.n_sigma_detect.is_finite() && self.n_sigma_detect > 0.0) {
            return Err(Error::InvalidArgument("n_sigma_detect must be > 0".into()));
        }
        Ok(())
    }

    fn span(&self) -> f64 {
        match (self.schedule.first(), self.schedule.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitPoint {
    pub t: f64,
    pub y: f64,
    /// 1σ uncertainty; all zero selects an unweighted fit.
    pub sigma: f64,
}

impl FitPoint {
    pub fn new(t: f64, y: f64, sigma: f64) -> Self {
        Self { t, y, sigma }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub offset: f64,
    pub amplitude: f64,
    pub offset_sigma: f64,
    pub amplitude_sigma: f64,
    /// Basis functions nearly collinear (schedule too short for Γ).
    pub ill_conditioned: bool,
}

/// Weighted sums of the centered normal equations.
struct Design {
    weight_sum: f64,
    mean_basis: f64,
    /// `Σ w (f - f̄)²`
    spread: f64,
}

impl Design {
    fn new(points: &[FitPoint], weights: &[f64], gamma: f64) -> Result<Self> {
        let basis = |t: f64| (-2.0 * gamma * t).exp();
        let weight_sum: f64 = weights.iter().sum();
        let mean_basis = points
            .iter()
            .zip(weights)
            .map(|(p, w)| w * basis(p.t))
            .sum::<f64>()
            / weight_sum;
        let (spread, raw) = points.iter().zip(weights).fold((0.0, 0.0), |(s, r), (p, w)| {
            let f = basis(p.t);
            (s + w * (f - mean_basis).powi(2), r + w * f * f)
        });
        let decorrelation = spread / raw;
        if !(decorrelation > SINGULAR_THRESHOLD) {
            return Err(Error::DegenerateSchedule(format!(
                "basis {{1, exp(-2Γt)}} is rank-deficient on this schedule (decorrelation {decorrelation:.3e})"
            )));
        }
        Ok(Self {
            weight_sum,
            mean_basis,
            spread,
        })
    }

    fn decorrelation(&self) -> f64 {
        self.spread / (self.spread + self.weight_sum * self.mean_basis * self.mean_basis)
    }
}

fn fit_weights(points: &[FitPoint]) -> Result<(Vec<f64>, bool)> {
    let all_zero = points.iter().all(|p| p.sigma == 0.0);
    if all_zero {
        return Ok((vec![1.0; points.len()], false));
    }
    if points.iter().any(|p| !(p.sigma.is_finite() && p.sigma > 0.0)) {
        return Err(Error::InvalidArgument(
            "uncertainties must be all > 0 or all 0".into(),
        ));
    }
    Ok((points.iter().map(|p| 1.0 / (p.sigma * p.sigma)).collect(), true))
}

/// Weighted linear least squares of `y = c + A e^{-2Γt}` with Γ known.
///
/// With known uncertainties the covariance is the inverse normal matrix;
/// with all-zero uncertainties it is scaled by the residual variance.
pub fn fit_aging(points: &[FitPoint], gamma: f64) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let (weights, known_sigma) = fit_weights(points)?;
    let design = Design::new(points, &weights, gamma)?;
    let basis = |t: f64| (-2.0 * gamma * t).exp();

    let mean_y = points.iter().zip(&weights).map(|(p, w)| w * p.y).sum::<f64>() / design.weight_sum;
    let cross: f64 = points
        .iter()
        .zip(&weights)
        .map(|(p, w)| w * (basis(p.t) - design.mean_basis) * (p.y - mean_y))
        .sum();
    let amplitude = cross / design.spread;
    let offset = mean_y - amplitude * design.mean_basis;

    let var_a = 1.0 / design.spread;
    let var_c = 1.0 / design.weight_sum + design.mean_basis * design.mean_basis / design.spread;
    let scale = if known_sigma {
        1.0
    } else {
        let rss: f64 = points
            .iter()
            .map(|p| (p.y - offset - amplitude * basis(p.t)).powi(2))
            .sum();
        rss / (points.len() - 2) as f64
    };
    Ok(FitResult {
        offset,
        amplitude,
        offset_sigma: (var_c * scale).sqrt(),
        amplitude_sigma: (var_a * scale).sqrt(),
        ill_conditioned: design.decorrelation() < CONDITION_THRESHOLD,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignResult {
    pub seed: u64,
    /// (epoch s, measured shift Hz).
    pub measured_shifts: Vec<(f64, f64)>,
    /// Noise-free shift at each epoch, Hz.
    pub true_shifts: Vec<f64>,
    pub fitted_amplitude: f64,
    pub fitted_offset: f64,
    pub amplitude_sigma: f64,
    pub significance: f64,
    pub detected: bool,
    /// `None` when the clock has no field sensitivity or no noise is set.
    pub epsilon_gamma_reach: Option<f64>,
    pub ill_conditioned: bool,
    pub warnings: Vec<String>,
}

fn significance(amplitude: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        amplitude.abs() / sigma
    } else if amplitude == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Simulate one campaign. Identical inputs give bit-identical results.
pub fn simulate_campaign(plan: &CampaignPlan, model: &LevelModel, seed: u64) -> Result<CampaignResult> {
    plan.validate()?;
    if plan.schedule.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "a campaign needs at least 3 epochs, got {}",
            plan.schedule.len()
        )));
    }
    let mut clock = model.clock;
    clock.interrogation_time = plan.interrogation_time;
    let series = aging_series(&model.couplings, &model.trap, &model.law, &clock, &plan.schedule)?;

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let measured: Vec<(f64, f64)> = series
        .rows
        .iter()
        .map(|r| {
            let noise = if plan.inject_noise {
                let z: f64 = StandardNormal.sample(&mut rng);
                plan.sigma_nu * z
            } else {
                0.0
            };
            (r.t, r.delta_nu + noise)
        })
        .collect();
    let points: Vec<FitPoint> = measured
        .iter()
        .map(|&(t, y)| FitPoint::new(t, y, plan.sigma_nu))
        .collect();
    let fit = fit_aging(&points, model.law.gamma)?;

    let mut warnings = Vec::new();
    if plan.span() < 0.1 * model.law.half_life {
        warnings.push(format!(
            "ill-conditioned: schedule span {:.3e} s is below 0.1 half-life ({:.3e} s)",
            plan.span(),
            0.1 * model.law.half_life
        ));
    }
    let sig = significance(fit.amplitude, fit.amplitude_sigma);
    let reach = if model.clock.delta_alpha() != 0.0 && plan.sigma_nu > 0.0 {
        Some(epsilon_reach(plan, model)?)
    } else {
        None
    };
    Ok(CampaignResult {
        seed,
        measured_shifts: measured,
        true_shifts: series.rows.iter().map(|r| r.delta_nu).collect(),
        fitted_amplitude: fit.amplitude,
        fitted_offset: fit.offset,
        amplitude_sigma: fit.amplitude_sigma,
        significance: sig,
        detected: sig >= plan.n_sigma_detect,
        epsilon_gamma_reach: reach,
        ill_conditioned: fit.ill_conditioned,
        warnings,
    })
}

/// Nominal amplitude standard error for the plan's schedule and noise.
pub fn nominal_amplitude_sigma(plan: &CampaignPlan, law: &DecayLaw) -> Result<f64> {
    if plan.schedule.len() < 3 {
        return Err(Error::InsufficientData("need at least 3 epochs".into()));
    }
    let points: Vec<FitPoint> = plan.schedule.iter().map(|&t| FitPoint::new(t, 0.0, 1.0)).collect();
    let weights = vec![1.0; points.len()];
    let design = Design::new(&points, &weights, law.gamma)?;
    Ok(plan.sigma_nu / design.spread.sqrt())
}

/// Smallest ε_γ whose noiseless amplitude reaches `n_sigma_detect` standard
/// errors. Uses `δν(0) ∝ ε_γ²`.
pub fn epsilon_reach(plan: &CampaignPlan, model: &LevelModel) -> Result<f64> {
    plan.validate()?;
    if model.clock.delta_alpha() == 0.0 {
        return Err(Error::NoSensitivity(
            "clock levels have equal polarizability; the field shift cancels".into(),
        ));
    }
    let eps_ref = if model.couplings.epsilon_gamma != 0.0 {
        model.couplings.epsilon_gamma
    } else {
        1e-5
    };
    let couplings = NonlinearCouplings {
        epsilon_gamma: eps_ref,
        ..model.couplings
    };
    let amp_ref = frequency_shift(&couplings, &model.trap, &model.law, &model.clock, 0.0)?;
    let sigma_a = nominal_amplitude_sigma(plan, &model.law)?;
    Ok(eps_ref.abs() * (plan.n_sigma_detect * sigma_a / amp_ref.abs()).sqrt())
}

/// Run one campaign per seed in parallel; results come back in seed order.
pub fn monte_carlo(
    plan: &CampaignPlan,
    model: &LevelModel,
    seeds: std::ops::Range<u64>,
) -> Result<Vec<CampaignResult>> {
    seeds
        .into_par_iter()
        .map(|s| simulate_campaign(plan, model, s))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub trials: usize,
    pub detections: usize,
    pub mean_amplitude: f64,
    /// Sample standard deviation of the fitted amplitudes.
    pub amplitude_scatter: f64,
    pub mean_amplitude_sigma: f64,
}

impl MonteCarloSummary {
    pub fn detection_rate(&self) -> f64 {
        self.detections as f64 / self.trials as f64
    }

    /// Aggregate results in seed order, whatever order they arrive in.
    pub fn from_results(results: &[CampaignResult]) -> Self {
        let mut sorted: Vec<&CampaignResult> = results.iter().collect();
        sorted.sort_by_key(|r| r.seed);
        let n = sorted.len() as f64;
        let mean_amplitude = sorted.iter().map(|r| r.fitted_amplitude).sum::<f64>() / n;
        let var = sorted
            .iter()
            .map(|r| (r.fitted_amplitude - mean_amplitude).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        Self {
            trials: sorted.len(),
            detections: sorted.iter().filter(|r| r.detected).count(),
            mean_amplitude,
            amplitude_scatter: var.sqrt(),
            mean_amplitude_sigma: sorted.iter().map(|r| r.amplitude_sigma).sum::<f64>() / n,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorInfo {
    pub algorithm: &'static str,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignInput {
    pub plan: CampaignPlan,
    pub model: LevelModel,
}

/// JSON report: input echo, generator metadata, the campaign, and a control
/// campaign with ε_γ forced to zero.
#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub schema: &'static str,
    pub generator: GeneratorInfo,
    pub input: CampaignInput,
    pub result: CampaignResult,
    pub control: CampaignResult,
}

impl CampaignReport {
    pub fn build(plan: &CampaignPlan, model: &LevelModel) -> Result<Self> {
        let result = simulate_campaign(plan, model, plan.seed)?;
        let mut null_model = *model;
        null_model.couplings.epsilon_gamma = 0.0;
        let mut control = simulate_campaign(plan, &null_model, plan.seed)?;
        // The control's reach is the same quantity as the main run's.
        control.epsilon_gamma_reach = result.epsilon_gamma_reach;
        Ok(Self {
            schema: "ionage.campaign.v1",
            generator: GeneratorInfo {
                algorithm: GENERATOR_ALGORITHM,
                seed: plan.seed,
            },
            input: CampaignInput {
                plan: plan.clone(),
                model: *model,
            },
            result,
            control,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
