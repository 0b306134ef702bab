//! Parameter grids over (ε_γ, trap size, Δα).
//!
//! Points are evaluated in parallel, but rows always come out in
//! lexicographic grid order: ε_γ outermost, Δα innermost.

use crate::config::ScanMetric;
use crate::error::{CliError, CliResult};
use crate::output::Table;
use ionage_core::campaign::CampaignPlan;
use ionage_core::{
    blackbody_bound, epsilon_reach, ClockSystem, DecayLaw, LevelModel, NonlinearCouplings,
    TrapSetup,
};
use rayon::prelude::*;

pub const MAX_AXIS_POINTS: usize = 10_000;
pub const MAX_GRID_POINTS: usize = 1_000_000;

/// Parse `a,b,c`, `lin:start:stop:n` or `log:start:stop:n`.
pub fn parse_axis(spec: &str) -> CliResult<Vec<f64>> {
    let bad = |msg: String| CliError::Usage(format!("bad grid `{spec}`: {msg}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(e.to_string()));
    let values = if let Some(rest) = spec.strip_prefix("lin:").or_else(|| spec.strip_prefix("log:")) {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected kind:start:stop:n".into()));
        }
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|e| bad(format!("{e}")))?;
        if n > MAX_AXIS_POINTS {
            return Err(CliError::Validation(format!(
                "resource limit: axis has {n} points, at most {MAX_AXIS_POINTS} allowed"
            )));
        }
        let log = spec.starts_with("log:");
        if log && !(a > 0.0 && b > 0.0) {
            return Err(bad("log axis needs positive bounds".into()));
        }
        let at = |k: usize| {
            if n == 1 {
                return a;
            }
            let f = k as f64 / (n - 1) as f64;
            if log {
                10f64.powf(a.log10() + f * (b.log10() - a.log10()))
            } else {
                a + f * (b - a)
            }
        };
        (0..n).map(at).collect()
    } else {
        spec.split(',').map(num).collect::<CliResult<Vec<f64>>>()?
    };
    if values.is_empty() {
        return Err(bad("no points".into()));
    }
    if values.len() > MAX_AXIS_POINTS {
        return Err(CliError::Validation(format!(
            "resource limit: axis has {} points, at most {MAX_AXIS_POINTS} allowed",
            values.len()
        )));
    }
    Ok(values)
}

/// Everything a scan point needs besides its three grid coordinates.
#[derive(Debug, Clone)]
pub struct ScanBase {
    pub blackbody_field: f64,
    pub law: DecayLaw,
    pub transition_frequency: f64,
    pub couplings: NonlinearCouplings,
    /// Required for [`ScanMetric::Reach`].
    pub plan: Option<CampaignPlan>,
}

#[derive(Debug, Clone)]
pub struct ScanSpec {
    pub metric: ScanMetric,
    pub epsilon_gamma: Vec<f64>,
    pub trap_size_nm: Vec<f64>,
    pub delta_alpha: Vec<f64>,
    pub base: ScanBase,
}

fn evaluate(spec: &ScanSpec, eps: f64, l_nm: f64, d_alpha: f64) -> CliResult<f64> {
    let base = &spec.base;
    let trap = TrapSetup::new(l_nm * 1e-9, base.blackbody_field)?;
    match spec.metric {
        ScanMetric::Bound => Ok(blackbody_bound(&trap)?),
        ScanMetric::Reach => {
            let plan = base
                .plan
                .as_ref()
                .ok_or_else(|| CliError::Usage("reach scan needs a campaign plan".into()))?;
            let clock = ClockSystem::new(base.transition_frequency, 0.0, d_alpha, plan.interrogation_time)?;
            let couplings = NonlinearCouplings {
                epsilon_gamma: eps,
                ..base.couplings
            };
            let model = LevelModel::new(clock, base.law, trap, couplings)?;
            Ok(epsilon_reach(plan, &model)?)
        }
    }
}

pub fn run_scan(spec: &ScanSpec) -> CliResult<Table> {
    let (ne, nl, na) = (
        spec.epsilon_gamma.len(),
        spec.trap_size_nm.len(),
        spec.delta_alpha.len(),
    );
    if ne == 0 || nl == 0 || na == 0 {
        return Err(CliError::Usage("scan grid is empty".into()));
    }
    for n in [ne, nl, na] {
        if n > MAX_AXIS_POINTS {
            return Err(CliError::Validation(format!(
                "resource limit: axis has {n} points, at most {MAX_AXIS_POINTS} allowed"
            )));
        }
    }
    let total = ne * nl * na;
    if total > MAX_GRID_POINTS {
        return Err(CliError::Validation(format!(
            "resource limit: grid has {total} points, at most {MAX_GRID_POINTS} allowed"
        )));
    }
    let rows = (0..total)
        .into_par_iter()
        .map(|idx| {
            let (i, rem) = (idx / (nl * na), idx % (nl * na));
            let (j, k) = (rem / na, rem % na);
            let (eps, l, da) = (spec.epsilon_gamma[i], spec.trap_size_nm[j], spec.delta_alpha[k]);
            Ok(vec![eps, l, da, evaluate(spec, eps, l, da)?])
        })
        .collect::<CliResult<Vec<_>>>()?;
    let value_col = match spec.metric {
        ScanMetric::Bound => "bound_epsilon_gamma",
        ScanMetric::Reach => "reach_epsilon_gamma",
    };
    let mut table = Table::new(&["epsilon_gamma", "trap_size_nm", "delta_alpha_au", value_col]);
    table.rows = rows;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ionage_core::units::wavelength_nm_to_hz;
    use ionage_core::{builtin_registry, decay_law};

    fn base() -> ScanBase {
        let law = decay_law(builtin_registry().lookup("Lu-177").unwrap());
        ScanBase {
            blackbody_field: 1e3,
            law,
            transition_frequency: wavelength_nm_to_hz(804.0),
            couplings: NonlinearCouplings::default(),
            plan: Some(CampaignPlan::new(
                "Lu-177",
                CampaignPlan::uniform_schedule(30.0 * 86_400.0, 31),
                1.0,
                1e-3,
            )),
        }
    }

    fn spec(metric: ScanMetric, eps: Vec<f64>, l: Vec<f64>, da: Vec<f64>) -> ScanSpec {
        ScanSpec {
            metric,
            epsilon_gamma: eps,
            trap_size_nm: l,
            delta_alpha: da,
            base: base(),
        }
    }

    #[test]
    fn axis_syntax() {
        assert_eq!(parse_axis("10,20,40").unwrap(), vec![10.0, 20.0, 40.0]);
        assert_eq!(parse_axis("lin:0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        let log = parse_axis("log:1e-6:1e-3:4").unwrap();
        assert_eq!(log.len(), 4);
        assert!((log[1] / 1e-5 - 1.0).abs() < 1e-12);
        assert!(parse_axis("log:0:1:3").is_err());
        assert!(parse_axis("1,x").is_err());
        assert!(parse_axis("lin:0:1:20000").is_err());
    }

    #[test]
    fn bound_scan_has_quadratic_ratios() {
        let t = run_scan(&spec(ScanMetric::Bound, vec![1e-5], vec![10.0, 20.0, 40.0], vec![1.0])).unwrap();
        let v: Vec<f64> = t.rows.iter().map(|r| r[3]).collect();
        assert!((v[1] / v[0] - 4.0).abs() < 1e-14);
        assert!((v[2] / v[0] - 16.0).abs() < 1e-14);
    }

    #[test]
    fn single_point_equals_direct_call() {
        let t = run_scan(&spec(ScanMetric::Bound, vec![1e-5], vec![10.0], vec![1.0])).unwrap();
        let direct = blackbody_bound(&TrapSetup::new(10.0 * 1e-9, 1e3).unwrap()).unwrap();
        assert_eq!(t.rows[0][3].to_bits(), direct.to_bits());
    }

    #[test]
    fn rows_are_lexicographic() {
        let t = run_scan(&spec(ScanMetric::Reach, vec![1e-6, 1e-5], vec![10.0, 20.0], vec![1.0, 2.0, 3.0])).unwrap();
        assert_eq!(t.rows.len(), 12);
        let keys: Vec<(f64, f64, f64)> = t.rows.iter().map(|r| (r[0], r[1], r[2])).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(keys, sorted);
    }

    #[test]
    fn oversized_grid_is_rejected() {
        let big: Vec<f64> = (1..=200).map(f64::from).collect();
        let err = run_scan(&spec(ScanMetric::Bound, big.clone(), big.clone(), big)).unwrap_err();
        assert!(err.to_string().contains("resource limit"));
        assert_eq!(err.exit_code(), 1);
    }
}
