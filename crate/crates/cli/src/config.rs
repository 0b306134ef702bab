//! Command-line flags and JSON config files.
//!
//! A config file (`--config run.json`) holds defaults using the flag names in
//! snake_case (`trap_size_nm`, `epsilon_gamma`, ...). Flags given on the
//! command line win.

use crate::error::{CliError, CliResult};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMetric {
    /// Blackbody-comparison ε_γ threshold.
    Bound,
    /// Campaign ε_γ reach.
    Reach,
}

/// Every tunable value. All optional so config files and flags can be merged.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Isotope name, e.g. Lu-177.
    #[arg(long, global = true)]
    pub isotope: Option<String>,
    /// Isotope registry JSON merged over the built-ins.
    #[arg(long, global = true)]
    pub registry: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true)]
    pub trap_size_nm: Option<f64>,
    /// Blackbody comparison field, V/m.
    #[arg(long, global = true)]
    pub blackbody_field: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub epsilon_gamma: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub epsilon_n: Option<f64>,
    /// Pion-nucleon coupling g.
    #[arg(long, global = true)]
    pub pion_g: Option<f64>,
    #[arg(long, global = true)]
    pub stark_kappa: Option<f64>,
    /// Lower clock-level polarizability, atomic units.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha_lower: Option<f64>,
    /// Upper clock-level polarizability, atomic units.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha_upper: Option<f64>,
    /// Clock transition wavelength; defaults to the isotope's first clock line.
    #[arg(long, global = true)]
    pub transition_nm: Option<f64>,
    /// Ramsey interrogation time, s.
    #[arg(long, global = true)]
    pub interrogation_time: Option<f64>,
    #[arg(long, global = true)]
    pub duration_days: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,

    /// Integrator step, s.
    #[arg(long, global = true)]
    pub dt_seconds: Option<f64>,
    /// Write every n-th integrator step.
    #[arg(long, global = true)]
    pub stride: Option<usize>,

    /// Frequency noise per epoch, mHz.
    #[arg(long, global = true)]
    pub sigma_nu_mhz: Option<f64>,
    /// Detection threshold in standard errors.
    #[arg(long, global = true)]
    pub n_sigma: Option<f64>,
    /// Per-epoch campaign CSV.
    #[arg(long, global = true)]
    pub series_out: Option<PathBuf>,

    #[arg(long, global = true)]
    pub clock_sensitivity_hz: Option<f64>,
    #[arg(long, global = true)]
    pub isotope_shift_hz: Option<f64>,
    /// Read the nuclear mass shift per nucleon instead of per nucleus.
    #[arg(long, global = true)]
    pub per_nucleon: Option<bool>,

    #[arg(long, global = true, value_enum)]
    pub metric: Option<ScanMetric>,
    /// ε_γ axis: `a,b,c`, `lin:start:stop:n` or `log:start:stop:n`.
    #[arg(long, global = true)]
    pub epsilon_gamma_grid: Option<String>,
    /// Trap-size axis in nm, same syntax.
    #[arg(long, global = true)]
    pub trap_size_nm_grid: Option<String>,
    /// Δα axis in atomic units, same syntax.
    #[arg(long, global = true)]
    pub delta_alpha_grid: Option<String>,
}

macro_rules! merge_fields {
    ($dst:ident, $src:ident; $($f:ident),* $(,)?) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f; } )*
    };
}

impl Params {
    /// Fill every unset field from `defaults`.
    pub fn or(mut self, defaults: Params) -> Params {
        merge_fields!(self, defaults;
            isotope, registry, out, format, seed, trap_size_nm, blackbody_field,
            epsilon_gamma, epsilon_n, pion_g, stark_kappa, alpha_lower, alpha_upper,
            transition_nm, interrogation_time, duration_days, samples, dt_seconds, stride,
            sigma_nu_mhz, n_sigma, series_out, clock_sensitivity_hz, isotope_shift_hz,
            per_nucleon, metric, epsilon_gamma_grid, trap_size_nm_grid, delta_alpha_grid,
        );
        self
    }
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum IsotopesAction {
    /// Table of all known records.
    List,
    /// One record in registry-file JSON.
    Show { name: String },
    /// Check a registry file.
    Validate { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Closed-form aging series.
    Simulate,
    /// Self-consistent integrator trajectory.
    Dynamics,
    /// Blackbody-comparison ε_γ threshold.
    Bound,
    /// Pion field, nuclear mass shift and isotope-shift verdict.
    Qcd,
    /// Simulated measurement campaign with fit and significance.
    Campaign,
    /// Parameter grid over ε_γ, trap size and Δα.
    Scan,
    /// Built-in and file registries.
    Isotopes {
        #[command(subcommand)]
        action: IsotopesAction,
    },
}

#[derive(Debug, Parser)]
#[command(name = "ionage", version, about = "Atom-aging signals in radioactive ion clocks")]
pub struct Cli {
    /// JSON file with default parameter values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub params: Params,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: Params,
}

/// Outcome of argument parsing that is not a runnable config.
#[derive(Debug)]
pub enum ParseOutcome {
    Run(RunConfig),
    /// `--help` or `--version`: print and exit 0.
    Info(String),
}

pub fn parse_args<I, T>(argv: I) -> CliResult<ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => return Ok(ParseOutcome::Info(e.render().to_string())),
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    let params = match &cli.config {
        Some(path) => cli.params.or(load_config(path)?),
        None => cli.params,
    };
    Ok(ParseOutcome::Run(RunConfig {
        command: cli.command,
        params,
    }))
}

pub fn load_config(path: &std::path::Path) -> CliResult<Params> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

/// Value of a flag the current command needs.
pub fn require<T: Clone>(value: &Option<T>, flag: &str, command: &str) -> CliResult<T> {
    value
        .clone()
        .ok_or_else(|| CliError::Usage(format!("`{command}` requires --{flag}")))
}
