//! Command execution. Every command renders its output to a string first and
//! writes it once, to `--out` or stdout.

use crate::config::{require, Command, Format, IsotopesAction, Params, RunConfig, ScanMetric};
use crate::error::{CliError, CliResult};
use crate::output::{emit_series, sci, write_output, Series, Table};
use crate::scan::{parse_axis, run_scan, ScanBase, ScanSpec};
use ionage_core::campaign::{CampaignPlan, DEFAULT_N_SIGMA};
use ionage_core::isotope::TransitionRole;
use ionage_core::qcd::{
    isotopic_detectability_with, MassShiftReading, DEFAULT_CLOCK_SENSITIVITY_HZ,
    DEFAULT_ISOTOPE_SHIFT_SCALE_HZ,
};
use ionage_core::units::{days_to_seconds, wavelength_nm_to_hz};
use ionage_core::{
    aging_series, blackbody_bound, builtin_registry, decay_law, evolve, load_registry,
    CampaignReport, ClockSystem, IsotopeRecord, LevelModel, NonlinearCouplings, Registry,
    StateVector, TrapSetup,
};
use ionage_core::em::DEFAULT_BLACKBODY_FIELD;
use serde_json::json;
use std::path::Path;

const DEFAULT_ISOTOPE: &str = "Lu-177";
const DEFAULT_INTERROGATION_TIME: f64 = 1.0;

pub fn run(config: &RunConfig) -> CliResult<()> {
    let p = &config.params;
    match &config.command {
        Command::Simulate => simulate(p),
        Command::Dynamics => dynamics(p),
        Command::Bound => bound(p),
        Command::Qcd => qcd(p),
        Command::Campaign => campaign(p),
        Command::Scan => scan(p),
        Command::Isotopes { action } => isotopes(p, action),
    }
}

fn registry(p: &Params) -> CliResult<Registry> {
    match &p.registry {
        Some(path) => Ok(load_registry(path)?),
        None => Ok(builtin_registry()),
    }
}

fn isotope(p: &Params) -> CliResult<IsotopeRecord> {
    let name = p.isotope.as_deref().unwrap_or(DEFAULT_ISOTOPE);
    Ok(registry(p)?.lookup(name)?.clone())
}

fn out(p: &Params) -> Option<&Path> {
    p.out.as_deref()
}

fn trap(p: &Params, command: &str) -> CliResult<TrapSetup> {
    let l_nm = require(&p.trap_size_nm, "trap-size-nm", command)?;
    Ok(TrapSetup::new(
        l_nm * 1e-9,
        p.blackbody_field.unwrap_or(DEFAULT_BLACKBODY_FIELD),
    )?)
}

fn couplings(p: &Params) -> CliResult<NonlinearCouplings> {
    let d = NonlinearCouplings::default();
    let c = NonlinearCouplings {
        epsilon_gamma: p.epsilon_gamma.unwrap_or(0.0),
        epsilon_n: p.epsilon_n.unwrap_or(0.0),
        pion_nucleon_g: p.pion_g.unwrap_or(d.pion_nucleon_g),
        stark_kappa: p.stark_kappa.unwrap_or(d.stark_kappa),
    };
    c.validate()?;
    Ok(c)
}

fn transition_frequency(p: &Params, iso: &IsotopeRecord, command: &str) -> CliResult<f64> {
    let nm = match p.transition_nm {
        Some(nm) => nm,
        None => iso
            .transitions
            .iter()
            .find(|t| t.role == TransitionRole::Clock)
            .map(|t| t.wavelength_nm)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "`{command}`: {} has no clock transition; pass --transition-nm",
                    iso.name
                ))
            })?,
    };
    if !(nm.is_finite() && nm > 0.0) {
        return Err(CliError::Validation(format!("transition wavelength must be > 0, got {nm}")));
    }
    Ok(wavelength_nm_to_hz(nm))
}

fn clock(p: &Params, iso: &IsotopeRecord, command: &str) -> CliResult<ClockSystem> {
    Ok(ClockSystem::new(
        transition_frequency(p, iso, command)?,
        require(&p.alpha_lower, "alpha-lower", command)?,
        require(&p.alpha_upper, "alpha-upper", command)?,
        p.interrogation_time.unwrap_or(DEFAULT_INTERROGATION_TIME),
    )?)
}

fn duration_seconds(p: &Params, command: &str) -> CliResult<f64> {
    let days = require(&p.duration_days, "duration-days", command)?;
    if !(days.is_finite() && days > 0.0) {
        return Err(CliError::Validation(format!("--duration-days must be > 0, got {days}")));
    }
    Ok(days_to_seconds(days))
}

fn simulate(p: &Params) -> CliResult<()> {
    let iso = isotope(p)?;
    let schedule = CampaignPlan::uniform_schedule(
        duration_seconds(p, "simulate")?,
        require(&p.samples, "samples", "simulate")?,
    );
    let series = aging_series(
        &couplings(p)?,
        &trap(p, "simulate")?,
        &decay_law(&iso),
        &clock(p, &iso, "simulate")?,
        &schedule,
    )?;
    emit_series(Series::Aging(&series), out(p), p.format.unwrap_or(Format::Csv))
}

fn dynamics(p: &Params) -> CliResult<()> {
    let iso = isotope(p)?;
    let model = LevelModel::new(
        clock(p, &iso, "dynamics")?,
        decay_law(&iso),
        trap(p, "dynamics")?,
        couplings(p)?,
    )?;
    let span = (0.0, duration_seconds(p, "dynamics")?);
    let dt = require(&p.dt_seconds, "dt-seconds", "dynamics")?;
    let record = evolve(&model, &StateVector::ramsey(), span, dt)?;
    emit_series(
        Series::Trajectory {
            model: &model,
            record: &record,
            stride: p.stride.unwrap_or(1),
        },
        out(p),
        p.format.unwrap_or(Format::Csv),
    )
}

fn bound(p: &Params) -> CliResult<()> {
    let trap = trap(p, "bound")?;
    let value = blackbody_bound(&trap)?;
    let text = match p.format.unwrap_or(Format::Csv) {
        Format::Csv => format!("{}\n", sci(value)),
        Format::Json => {
            let v = json!({
                "trap_size_m": trap.size,
                "blackbody_field_v_per_m": trap.blackbody_field,
                "epsilon_gamma_bound": value,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
    };
    write_output(&text, out(p))
}

fn qcd(p: &Params) -> CliResult<()> {
    let iso = isotope(p)?;
    let couplings = NonlinearCouplings {
        epsilon_n: require(&p.epsilon_n, "epsilon-n", "qcd")?,
        ..couplings(p)?
    };
    let reading = if p.per_nucleon.unwrap_or(false) {
        MassShiftReading::PerNucleon
    } else {
        MassShiftReading::TotalNuclear
    };
    let trap = trap(p, "qcd")?;
    let result = isotopic_detectability_with(
        reading,
        &couplings,
        &iso,
        &trap,
        p.clock_sensitivity_hz.unwrap_or(DEFAULT_CLOCK_SENSITIVITY_HZ),
        p.isotope_shift_hz.unwrap_or(DEFAULT_ISOTOPE_SHIFT_SCALE_HZ),
    )?;
    let text = match p.format.unwrap_or(Format::Json) {
        Format::Json => {
            let v = json!({
                "isotope": iso.name,
                "mass_number": iso.mass_number,
                "trap_size_m": trap.size,
                "couplings": couplings,
                "result": result,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
        Format::Csv => {
            let verdict = serde_json::to_value(result.verdict).expect("json");
            format!(
                "pion_field_mev,mass_shift_mev,relative_mass_shift,isotopic_frequency_shift_hz,verdict\n{},{},{},{},{}\n",
                sci(result.pion_field),
                sci(result.mass_shift),
                sci(result.relative_mass_shift),
                sci(result.isotopic_frequency_shift),
                verdict.as_str().unwrap_or_default(),
            )
        }
    };
    write_output(&text, out(p))
}

fn campaign_plan(p: &Params, iso: &IsotopeRecord) -> CliResult<CampaignPlan> {
    let schedule = CampaignPlan::uniform_schedule(
        duration_seconds(p, "campaign")?,
        require(&p.samples, "samples", "campaign")?,
    );
    let sigma_mhz = require(&p.sigma_nu_mhz, "sigma-nu-mhz", "campaign")?;
    let mut plan = CampaignPlan::new(
        iso.name.clone(),
        schedule,
        p.interrogation_time.unwrap_or(DEFAULT_INTERROGATION_TIME),
        sigma_mhz * 1e-3,
    );
    plan.seed = p.seed.unwrap_or(0);
    plan.n_sigma_detect = p.n_sigma.unwrap_or(DEFAULT_N_SIGMA);
    plan.validate()?;
    Ok(plan)
}

fn campaign(p: &Params) -> CliResult<()> {
    let iso = isotope(p)?;
    let plan = campaign_plan(p, &iso)?;
    let model = LevelModel::new(
        clock(p, &iso, "campaign")?,
        decay_law(&iso),
        trap(p, "campaign")?,
        couplings(p)?,
    )?;
    let report = CampaignReport::build(&plan, &model)?;
    let mut epochs = Table::new(&["t_seconds", "true_delta_nu_hz", "measured_delta_nu_hz", "sigma_hz"]);
    epochs.rows = report
        .result
        .measured_shifts
        .iter()
        .zip(&report.result.true_shifts)
        .map(|(&(t, y), &truth)| vec![t, truth, y, plan.sigma_nu])
        .collect();
    if let Some(path) = &p.series_out {
        write_output(&epochs.to_csv(), Some(path))?;
    }
    let text = match p.format.unwrap_or(Format::Json) {
        Format::Json => format!("{}\n", report.to_json()),
        Format::Csv => epochs.to_csv(),
    };
    write_output(&text, out(p))
}

fn scan(p: &Params) -> CliResult<()> {
    let metric = p.metric.unwrap_or(ScanMetric::Bound);
    let l_axis = match (&p.trap_size_nm_grid, p.trap_size_nm) {
        (Some(g), _) => parse_axis(g)?,
        (None, Some(l)) => vec![l],
        (None, None) => return Err(CliError::Usage("`scan` requires --trap-size-nm-grid or --trap-size-nm".into())),
    };
    let eps_axis = match &p.epsilon_gamma_grid {
        Some(g) => parse_axis(g)?,
        None => vec![p.epsilon_gamma.unwrap_or(0.0)],
    };
    let alpha_axis = match (&p.delta_alpha_grid, p.alpha_lower, p.alpha_upper) {
        (Some(g), _, _) => parse_axis(g)?,
        (None, Some(lo), Some(hi)) => vec![hi - lo],
        (None, _, _) if metric == ScanMetric::Bound => vec![0.0],
        _ => {
            return Err(CliError::Usage(
                "`scan --metric reach` requires --delta-alpha-grid or both polarizabilities".into(),
            ))
        }
    };
    let iso = isotope(p)?;
    let plan = match metric {
        ScanMetric::Reach => Some(campaign_plan(p, &iso).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(m.replace("`campaign`", "`scan --metric reach`")),
            other => other,
        })?),
        ScanMetric::Bound => None,
    };
    let base = ScanBase {
        blackbody_field: p.blackbody_field.unwrap_or(DEFAULT_BLACKBODY_FIELD),
        law: decay_law(&iso),
        transition_frequency: match metric {
            ScanMetric::Reach => transition_frequency(p, &iso, "scan")?,
            ScanMetric::Bound => p.transition_nm.map_or(1.0, wavelength_nm_to_hz),
        },
        couplings: couplings(p)?,
        plan,
    };
    let table = run_scan(&ScanSpec {
        metric,
        epsilon_gamma: eps_axis,
        trap_size_nm: l_axis,
        delta_alpha: alpha_axis,
        base,
    })?;
    write_output(&table.render(p.format.unwrap_or(Format::Csv)), out(p))
}

fn isotopes(p: &Params, action: &IsotopesAction) -> CliResult<()> {
    let text = match action {
        IsotopesAction::List => list_table(&registry(p)?),
        IsotopesAction::Show { name } => {
            let reg = registry(p)?;
            format!("{}\n", Registry::record_json(reg.lookup(name)?))
        }
        IsotopesAction::Validate { file } => {
            let reg = load_registry(file)?;
            format!("ok: {} ({} records after merging with built-ins)\n", file.display(), reg.len())
        }
    };
    write_output(&text, out(p))
}

fn list_table(reg: &Registry) -> String {
    let mut out = String::from("name,element,A,half_life_days,decay_mode,daughter,spin,charge,clock_nm\n");
    for r in reg.iter() {
        let half_life = if r.half_life.is_stable() {
            "inf".to_string()
        } else {
            format!("{}", r.half_life.days())
        };
        let mode = serde_json::to_value(r.decay_mode).expect("json");
        let clocks: Vec<String> = r.clock_transitions().map(|t| t.wavelength_nm.to_string()).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.name,
            r.element,
            r.mass_number,
            half_life,
            mode.as_str().unwrap_or_default(),
            r.daughter.as_deref().unwrap_or("-"),
            r.nuclear_spin,
            r.charge_state,
            clocks.join(";"),
        ));
    }
    out
}
