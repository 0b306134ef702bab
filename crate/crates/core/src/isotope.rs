//! Nuclear and spectroscopic records for candidate clock radioisotopes.
//!
//! The built-in table covers the lutetium, ytterbium, erbium and radium
//! species discussed for radioactive ion clocks. A JSON registry file can
//! add species or replace built-ins by name.
//!
//! Hyperfine structure is not modeled. The aging observable lives at the
//! clock-transition level, so isotopes that share an element share its ionic
//! transitions here.

use crate::error::{Error, Result};
use crate::units::SECONDS_PER_DAY;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayMode {
    Beta,
    Alpha,
    Stable,
}

/// Half-life with an explicit sentinel for stable species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HalfLife {
    /// Seconds.
    Finite(f64),
    Stable,
}

impl HalfLife {
    pub fn from_days(days: f64) -> Self {
        HalfLife::Finite(days * SECONDS_PER_DAY)
    }

    pub fn seconds(self) -> f64 {
        match self {
            HalfLife::Finite(s) => s,
            HalfLife::Stable => f64::INFINITY,
        }
    }

    pub fn days(self) -> f64 {
        self.seconds() / SECONDS_PER_DAY
    }

    pub fn is_stable(self) -> bool {
        matches!(self, HalfLife::Stable)
    }
}

/// Nuclear spin as an exact half-integer rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NuclearSpin(Ratio<u32>);

impl NuclearSpin {
    pub fn new(numer: u32, denom: u32) -> Result<Self> {
        if denom == 0 {
            return Err(Error::Parse("nuclear spin has zero denominator".into()));
        }
        let r = Ratio::new(numer, denom);
        if *r.denom() > 2 {
            return Err(Error::Domain(format!(
                "nuclear spin {r} is not a multiple of 1/2"
            )));
        }
        Ok(Self(r))
    }

    pub fn numer(self) -> u32 {
        *self.0.numer()
    }

    pub fn denom(self) -> u32 {
        *self.0.denom()
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.numer()) / f64::from(self.denom())
    }
}

impl fmt::Display for NuclearSpin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for NuclearSpin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let r: Ratio<u32> = s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad nuclear spin `{s}`")))?;
        Self::new(*r.numer(), *r.denom())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Multipole {
    E1,
    M1,
    E2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionRole {
    Clock,
    Detection,
    Pumping,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionRecord {
    pub wavelength_nm: f64,
    pub multipole: Multipole,
    pub role: TransitionRole,
}

impl TransitionRecord {
    pub fn new(wavelength_nm: f64, multipole: Multipole, role: TransitionRole) -> Self {
        Self {
            wavelength_nm,
            multipole,
            role,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotopeRecord {
    pub name: String,
    pub element: String,
    pub mass_number: u32,
    pub half_life: HalfLife,
    pub decay_mode: DecayMode,
    pub daughter: Option<String>,
    pub nuclear_spin: NuclearSpin,
    pub charge_state: i32,
    pub transitions: Vec<TransitionRecord>,
    pub notes: String,
}

impl IsotopeRecord {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: String| Error::Invariant {
            record: self.name.clone(),
            field: field.to_string(),
            reason,
        };
        match (self.decay_mode, self.half_life) {
            (DecayMode::Stable, HalfLife::Stable) => {}
            (DecayMode::Stable, HalfLife::Finite(_)) => {
                return Err(bad("half_life", "stable species must have infinite half-life".into()))
            }
            (_, HalfLife::Stable) => {
                return Err(bad("half_life", "radioactive species needs a finite half-life".into()))
            }
            (_, HalfLife::Finite(s)) if !(s.is_finite() && s > 0.0) => {
                return Err(bad("half_life", format!("must be > 0, got {} s", s)))
            }
            _ => {}
        }
        if self.mass_number < 1 {
            return Err(bad("mass_number", "must be >= 1".into()));
        }
        if (self.decay_mode == DecayMode::Stable) != self.daughter.is_none() {
            return Err(bad(
                "daughter",
                "a daughter is required exactly when the species decays".into(),
            ));
        }
        for t in &self.transitions {
            if !(t.wavelength_nm > 100.0 && t.wavelength_nm < 10_000.0) {
                return Err(bad(
                    "transitions",
                    format!("wavelength {} nm outside (100, 10000)", t.wavelength_nm),
                ));
            }
        }
        Ok(())
    }

    pub fn clock_transitions(&self) -> impl Iterator<Item = &TransitionRecord> {
        self.transitions
            .iter()
            .filter(|t| t.role == TransitionRole::Clock)
    }
}

/// Name-keyed isotope table with deterministic iteration order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Registry(BTreeMap<String, IsotopeRecord>);

impl Registry {
    pub fn lookup(&self, name: &str) -> Result<&IsotopeRecord> {
        self.0
            .get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown isotope `{name}`")))
    }

    pub fn get(&self, name: &str) -> Option<&IsotopeRecord> {
        self.0.get(name)
    }

    pub fn insert(&mut self, record: IsotopeRecord) {
        self.0.insert(record.name.clone(), record);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &IsotopeRecord> {
        self.0.values()
    }

    /// One record in the registry-file schema, keyed by name.
    pub fn record_json(record: &IsotopeRecord) -> String {
        let map = BTreeMap::from([(record.name.as_str(), RegistryEntry::from(record))]);
        serde_json::to_string_pretty(&map).expect("registry entries always serialize")
    }

    /// Serialize in the registry-file schema.
    pub fn to_json(&self) -> String {
        let map: BTreeMap<&str, RegistryEntry> = self
            .0
            .iter()
            .map(|(k, v)| (k.as_str(), RegistryEntry::from(v)))
            .collect();
        serde_json::to_string_pretty(&map).expect("registry entries always serialize")
    }
}

fn lu_ion_transitions() -> Vec<TransitionRecord> {
    use Multipole::*;
    use TransitionRole::*;
    vec![
        TransitionRecord::new(804.0, E2, Clock),
        TransitionRecord::new(848.0, M1, Clock),
        TransitionRecord::new(646.0, E1, Detection),
        TransitionRecord::new(622.0, E1, Pumping),
        TransitionRecord::new(350.0, E1, Pumping),
    ]
}

fn ra_ion_transitions() -> Vec<TransitionRecord> {
    vec![
        TransitionRecord::new(728.0, Multipole::E2, TransitionRole::Clock),
        TransitionRecord::new(828.0, Multipole::E2, TransitionRole::Clock),
    ]
}

#[allow(clippy::too_many_arguments)]
fn record(
    name: &str,
    element: &str,
    mass_number: u32,
    half_life: HalfLife,
    decay_mode: DecayMode,
    daughter: Option<&str>,
    spin: (u32, u32),
    charge_state: i32,
    transitions: Vec<TransitionRecord>,
    notes: &str,
) -> IsotopeRecord {
    IsotopeRecord {
        name: name.into(),
        element: element.into(),
        mass_number,
        half_life,
        decay_mode,
        daughter: daughter.map(Into::into),
        nuclear_spin: NuclearSpin::new(spin.0, spin.1).expect("built-in spin"),
        charge_state,
        transitions,
        notes: notes.into(),
    }
}

/// The built-in species table.
pub fn builtin_registry() -> Registry {
    use DecayMode::*;
    let mut reg = Registry::default();
    for r in [
        record(
            "Lu-177",
            "Lu",
            177,
            HalfLife::from_days(6.65),
            Beta,
            Some("Hf-177"),
            (7, 2),
            1,
            lu_ion_transitions(),
            "Primary candidate. Hyperfine splitting differs from Lu-176 (spin and moment); not modeled.",
        ),
        record(
            "Lu-176",
            "Lu",
            176,
            HalfLife::Stable,
            Stable,
            None,
            (7, 1),
            1,
            lu_ion_transitions(),
            "Species used for existing Lu+ clock measurements. Half-life ~3.7e10 y, treated as stable.",
        ),
        record(
            "Lu-175",
            "Lu",
            175,
            HalfLife::Stable,
            Stable,
            None,
            (7, 2),
            1,
            lu_ion_transitions(),
            "Stable reference with the same nuclear spin as Lu-177; high natural abundance.",
        ),
        record(
            "Yb-177",
            "Yb",
            177,
            HalfLife::Finite(1.9 * 3_600.0),
            Beta,
            Some("Lu-177"),
            (9, 2),
            0,
            Vec::new(),
            "Precursor from neutron capture on Yb-176.",
        ),
        record(
            "Ra-223",
            "Ra",
            223,
            HalfLife::from_days(11.43),
            Alpha,
            Some("Rn-219"),
            (3, 2),
            1,
            ra_ion_transitions(),
            "Pure alpha emitter from the Ac-227 chain. Ra+ transitions as measured in Ra-226+.",
        ),
        record(
            "Er-169",
            "Er",
            169,
            HalfLife::from_days(9.375),
            Beta,
            Some("Tm-169"),
            (1, 2),
            1,
            Vec::new(),
            "Alternative radioisotope ion clock; no transition data tabulated.",
        ),
        record(
            "Yb-175",
            "Yb",
            175,
            HalfLife::from_days(4.185),
            Beta,
            Some("Lu-175"),
            (7, 2),
            1,
            Vec::new(),
            "Alternative radioisotope ion clock; no transition data tabulated.",
        ),
    ] {
        reg.insert(r);
    }
    reg
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum HalfLifeDays {
    Days(f64),
    Text(String),
}

impl HalfLifeDays {
    fn to_half_life(&self, name: &str) -> Result<HalfLife> {
        match self {
            HalfLifeDays::Days(d) => Ok(HalfLife::from_days(*d)),
            HalfLifeDays::Text(s) if s == "inf" => Ok(HalfLife::Stable),
            HalfLifeDays::Text(s) => Err(Error::Invariant {
                record: name.into(),
                field: "half_life_days".into(),
                reason: format!("expected a number or \"inf\", got \"{s}\""),
            }),
        }
    }
}

/// One entry of the on-disk registry format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryEntry {
    element: String,
    mass_number: u32,
    half_life_days: HalfLifeDays,
    decay_mode: DecayMode,
    daughter: Option<String>,
    nuclear_spin: String,
    charge_state: i32,
    transitions: Vec<TransitionRecord>,
    notes: String,
}

impl From<&IsotopeRecord> for RegistryEntry {
    fn from(r: &IsotopeRecord) -> Self {
        Self {
            element: r.element.clone(),
            mass_number: r.mass_number,
            half_life_days: match r.half_life {
                HalfLife::Stable => HalfLifeDays::Text("inf".into()),
                h => HalfLifeDays::Days(h.days()),
            },
            decay_mode: r.decay_mode,
            daughter: r.daughter.clone(),
            nuclear_spin: r.nuclear_spin.to_string(),
            charge_state: r.charge_state,
            transitions: r.transitions.clone(),
            notes: r.notes.clone(),
        }
    }
}

impl RegistryEntry {
    fn into_record(self, name: String) -> Result<IsotopeRecord> {
        let nuclear_spin = self.nuclear_spin.parse().map_err(|e: Error| Error::Invariant {
            record: name.clone(),
            field: "nuclear_spin".into(),
            reason: e.to_string(),
        })?;
        let half_life = self.half_life_days.to_half_life(&name)?;
        let rec = IsotopeRecord {
            name,
            element: self.element,
            mass_number: self.mass_number,
            half_life,
            decay_mode: self.decay_mode,
            daughter: self.daughter,
            nuclear_spin,
            charge_state: self.charge_state,
            transitions: self.transitions,
            notes: self.notes,
        };
        rec.validate()?;
        Ok(rec)
    }
}

/// Parse registry JSON text and merge it over the built-ins.
pub fn parse_registry(text: &str) -> Result<Registry> {
    let entries: BTreeMap<String, RegistryEntry> =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut reg = builtin_registry();
    for (name, entry) in entries {
        reg.insert(entry.into_record(name)?);
    }
    Ok(reg)
}

/// Read a registry file and merge it over the built-ins; file entries
/// replace built-ins with the same name.
pub fn load_registry(path: impl AsRef<Path>) -> Result<Registry> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_registry(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}
