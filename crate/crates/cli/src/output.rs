//! Tabular output: fixed 12-significant-digit scientific CSV and a JSON
//! mirror with one array per column.

use crate::config::Format;
use crate::error::{CliError, CliResult};
use ionage_core::dynamics::TrajectoryRecord;
use ionage_core::units::PLANCK_H;
use ionage_core::{AgingSeries, LevelModel};
use serde_json::{Map, Value};
use std::io::Write;
use std::path::Path;

pub const SERIES_COLUMNS: [&str; 7] = [
    "t_seconds",
    "survival_prob",
    "e_nl_v_per_m",
    "delta_e_upper_j",
    "delta_e_lower_j",
    "delta_nu_hz",
    "phase_rad",
];

/// `d.ddddddddddde±x`, 12 significant digits. Negative zero prints as zero.
pub fn sci(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// The value `sci` would print, as a number.
pub fn round12(x: f64) -> f64 {
    sci(x).parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| sci(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut obj = Map::new();
        for (i, name) in self.columns.iter().enumerate() {
            let col = self
                .rows
                .iter()
                .map(|r| serde_json::Number::from_f64(round12(r[i])).map_or(Value::Null, Value::Number))
                .collect();
            obj.insert(name.clone(), Value::Array(col));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Parse CSV written by [`Table::to_csv`].
    pub fn from_csv(text: &str) -> CliResult<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| CliError::Validation("empty CSV".into()))?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let rows = lines
            .map(|line| {
                line.split(',')
                    .map(|c| {
                        c.parse::<f64>()
                            .map_err(|e| CliError::Validation(format!("bad cell `{c}`: {e}")))
                    })
                    .collect::<CliResult<Vec<f64>>>()
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(Self { columns, rows })
    }
}

pub fn aging_table(series: &AgingSeries) -> Table {
    let mut t = Table::new(&SERIES_COLUMNS);
    t.rows = series
        .rows
        .iter()
        .map(|r| {
            vec![
                r.t,
                r.survival,
                r.e_nl,
                r.delta_e_upper,
                r.delta_e_lower,
                r.delta_nu,
                r.phase,
            ]
        })
        .collect();
    t
}

/// Same columns as the closed-form series, derived from the integrated
/// state. `phase_rad` is the differential phase accumulated since the start.
pub fn trajectory_table(model: &LevelModel, record: &TrajectoryRecord, stride: usize) -> Table {
    let mut t = Table::new(&SERIES_COLUMNS);
    let stride = stride.max(1);
    let last = record.len().saturating_sub(1);
    t.rows = (0..record.len())
        .filter(|&i| i % stride == 0 || i == last)
        .map(|i| {
            let norm = record.states[i].trapped_norm();
            let (lower, upper) = model.level_shifts(norm);
            vec![
                record.times[i],
                norm,
                model.field(norm),
                upper,
                lower,
                (upper - lower) / PLANCK_H,
                record.differential_phase[i],
            ]
        })
        .collect();
    t
}

pub enum Series<'a> {
    Aging(&'a AgingSeries),
    Trajectory {
        model: &'a LevelModel,
        record: &'a TrajectoryRecord,
        stride: usize,
    },
}

/// Write a series to `path` (stdout when `None`) in the given format.
pub fn emit_series(series: Series<'_>, path: Option<&Path>, format: Format) -> CliResult<()> {
    let table = match series {
        Series::Aging(s) => aging_table(s),
        Series::Trajectory {
            model,
            record,
            stride,
        } => trajectory_table(model, record, stride),
    };
    write_output(&table.render(format), path)
}

pub fn write_output(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
        }
    }
}
