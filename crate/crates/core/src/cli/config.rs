//! Scenario configuration files.
//!
//! A config is TOML. Every scenario starts from a built-in default table and
//! the user's file overrides it key by key. Physical quantities are either
//! bare numbers, read in the scenario's natural units (hbar = 1), or strings
//! with a unit such as `"60.8 ueV"`, `"2.5 kHz"`, `"116 eV/m"` or `"0.1 um"`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::geom::{Grid, Vec3};
use crate::propagators::FieldConfig;
use crate::scales::{make_scales, Constants, Dimension, PhysicalFields, Quantity, ScaleSystem};
use crate::sources::SourceKind;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Dotted key the problem belongs to, empty for whole-file errors.
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "`{}`: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

type CResult<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    FieldFringes,
    EbParallel,
    AtomLaser,
    DosCrossed,
    FreePoint,
    Custom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::FieldFringes,
        ScenarioKind::EbParallel,
        ScenarioKind::AtomLaser,
        ScenarioKind::DosCrossed,
        ScenarioKind::FreePoint,
        ScenarioKind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::FieldFringes => "field_fringes",
            ScenarioKind::EbParallel => "eb_parallel",
            ScenarioKind::AtomLaser => "atom_laser",
            ScenarioKind::DosCrossed => "dos_crossed",
            ScenarioKind::FreePoint => "free_point",
            ScenarioKind::Custom => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn summary(self) -> &'static str {
        match self {
            ScenarioKind::FieldFringes => "point source in a uniform field: fringes on a radial detector cut",
            ScenarioKind::EbParallel => "parallel electric and magnetic fields: current map in the x-z plane",
            ScenarioKind::AtomLaser => "Rb-87 Gaussian source under gravity: width sweep and transverse cuts",
            ScenarioKind::DosCrossed => "local density of states for crossed E and B fields",
            ScenarioKind::FreePoint => "free point source on a small grid (smoke test)",
            ScenarioKind::Custom => "any source and field on a user grid",
        }
    }

    /// Sections a config for this scenario may contain.
    fn sections(self) -> &'static [&'static str] {
        match self {
            ScenarioKind::FieldFringes => &["particle", "source", "field", "cut", "output"],
            ScenarioKind::EbParallel => &["particle", "source", "field", "grid", "output"],
            ScenarioKind::AtomLaser => &["particle", "source", "field", "cut", "grid", "output"],
            ScenarioKind::DosCrossed => &["particle", "field", "spectrum", "output"],
            ScenarioKind::FreePoint | ScenarioKind::Custom => &["particle", "source", "field", "grid", "output"],
        }
    }

    /// Built-in defaults, also shipped as `configs/<name>.toml`.
    pub fn default_toml(self) -> &'static str {
        match self {
            ScenarioKind::FieldFringes => FIELD_FRINGES,
            ScenarioKind::EbParallel => EB_PARALLEL,
            ScenarioKind::AtomLaser => ATOM_LASER,
            ScenarioKind::DosCrossed => DOS_CROSSED,
            ScenarioKind::FreePoint => FREE_POINT,
            ScenarioKind::Custom => CUSTOM,
        }
    }
}

const FIELD_FRINGES: &str = r#"scenario = "field_fringes"

[particle]
species = "electron"

[source]
kind = "point"
energies = ["100 ueV", "200 ueV"]

[field]
force_z = "300 eV/m"

[cut]
depth = "0.5 m"
span = 1.2
samples = 2001
"#;

const EB_PARALLEL: &str = r#"scenario = "eb_parallel"

[particle]
species = "electron"

[source]
kind = "point"
energy = "60.8 ueV"

[field]
force_z = "116 eV/m"
b = "0.001 T"

[grid]
lo = [0.35, 0.0, -4.0]
hi = [8.05, 0.0, 16.0]
shape = [78, 1, 201]
"#;

const ATOM_LASER: &str = r#"scenario = "atom_laser"

[particle]
species = "rb87"

[source]
kind = "gaussian"
energy = "2.5 kHz"
widths = ["0.1 um", "0.2 um", "0.4 um", "1.0 um"]

[field]
gravity = "9.81 m/s2"

[cut]
depth = "1 mm"
span = 1.1
samples = 1201

[grid]
lo = ["-0.08 mm", 0.0, "-0.01 mm"]
hi = ["0.08 mm", 0.0, "1.02 mm"]
shape = [81, 1, 104]
"#;

const DOS_CROSSED: &str = r#"scenario = "dos_crossed"

[particle]
species = "electron"

[field]
b = "0.5 T"
force_y = ["1 eV/m", "100 eV/m", "400 eV/m"]

[spectrum]
from = 0.0
to = 6.0
count = 1201
eta = 0.05
"#;

const FREE_POINT: &str = r#"scenario = "free_point"

[particle]
species = "natural"
mass = 1.0

[source]
kind = "point"
energy = 1.0

[grid]
lo = [-4.0, 0.0, 1.0]
hi = [4.0, 0.0, 9.0]
shape = [65, 1, 65]
"#;

const CUSTOM: &str = r#"scenario = "custom"

[particle]
species = "natural"
mass = 0.5

[source]
kind = "point"
energy = 2.0
position = [0.0, 0.0, 0.0]

[field]
force_z = 1.0

[grid]
lo = [-6.0, 0.0, 1.0]
hi = [6.0, 0.0, 13.0]
shape = [61, 1, 61]
"#;

/// A bare number (natural units) or a string with a unit.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum Q {
    Bare(f64),
    Tagged(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(Q),
    Many(Vec<Q>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    // read from the table before the typed parse
    #[allow(dead_code)]
    scenario: Option<String>,
    title: Option<String>,
    particle: Option<RawParticle>,
    source: Option<RawSource>,
    field: Option<RawField>,
    grid: Option<RawGrid>,
    cut: Option<RawCut>,
    spectrum: Option<RawSpectrum>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParticle {
    species: Option<String>,
    mass: Option<f64>,
    charge_sign: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    kind: Option<String>,
    energy: Option<Q>,
    energies: Option<Vec<Q>>,
    width: Option<Q>,
    widths: Option<Vec<Q>>,
    position: Option<[Q; 3]>,
    strength: Option<[f64; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    force_x: Option<Q>,
    force_y: Option<OneOrMany>,
    force_z: Option<Q>,
    gravity: Option<Q>,
    b: Option<Q>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    lo: Option<[Q; 3]>,
    hi: Option<[Q; 3]>,
    shape: Option<[usize; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCut {
    depth: Option<Q>,
    span: Option<f64>,
    samples: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    from: Option<Q>,
    to: Option<Q>,
    count: Option<usize>,
    eta: Option<Q>,
    position: Option<[Q; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    stem: Option<String>,
}

/// Detector cut below the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutSpec {
    pub depth: f64,
    /// Extent as a multiple of the classical radius at `depth`.
    pub span: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSpec {
    pub energies: Vec<f64>,
    pub eta: f64,
    pub position: Vec3,
}

/// A validated scenario, all quantities in natural units.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub title: Option<String>,
    pub species: String,
    pub units: ScaleSystem,
    pub field: FieldConfig,
    /// Perpendicular force values swept by `dos_crossed`.
    pub force_y_sweep: Vec<f64>,
    pub source_kind: SourceKind,
    pub position: Vec3,
    pub strength: Complex64,
    pub energies: Vec<f64>,
    pub widths: Vec<f64>,
    pub grid: Option<Grid>,
    pub cut: Option<CutSpec>,
    pub spectrum: Option<SpectrumSpec>,
    pub stem: String,
    /// Effective config entries as `(dotted key, TOML value)`, verbatim.
    pub params: Vec<(String, String)>,
}

/// Reads and validates a scenario file.
pub fn load_config(path: &Path) -> CResult<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Validates a scenario given as TOML text.
pub fn parse_config(text: &str) -> CResult<Scenario> {
    // typed parse of the user's text first: unknown keys and type errors
    // are reported with their line
    let user: toml::Table = toml::from_str(text).map_err(|e| ConfigError::new("", e.to_string()))?;
    let _: RawConfig = toml::from_str(text).map_err(|e| ConfigError::new("", e.to_string()))?;

    let name = match user.get("scenario") {
        Some(toml::Value::String(s)) => s.clone(),
        Some(_) => return Err(ConfigError::new("scenario", "must be a string")),
        None => return Err(ConfigError::new("scenario", "missing; one of the names from `list-scenarios`")),
    };
    let kind = ScenarioKind::from_name(&name).ok_or_else(|| {
        let names: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
        ConfigError::new("scenario", format!("unknown scenario {name:?}; expected one of {}", names.join(", ")))
    })?;
    for (key, value) in &user {
        if value.is_table() && !kind.sections().contains(&key.as_str()) {
            return Err(ConfigError::new(key, format!("section is not used by scenario {name}")));
        }
    }

    let mut merged: toml::Table = toml::from_str(kind.default_toml()).expect("built-in defaults parse");
    merge(&mut merged, &user);
    let params = flatten(&merged);
    let raw: RawConfig = toml::Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::new("", e.to_string()))?;
    build(kind, raw, params)
}

/// Keys that replace each other: setting one drops the defaults of the rest.
const EXCLUSIVE: [[&str; 2]; 2] = [["energy", "energies"], ["width", "widths"]];

fn merge(base: &mut toml::Table, over: &toml::Table) {
    for (key, value) in over {
        for group in EXCLUSIVE {
            if group.contains(&key.as_str()) {
                for other in group {
                    base.remove(other);
                }
            }
        }
        match (base.get_mut(key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(key.clone(), value.clone());
            }
        }
    }
}

fn flatten(table: &toml::Table) -> Vec<(String, String)> {
    fn walk(prefix: &str, t: &toml::Table, out: &mut Vec<(String, String)>) {
        for (k, v) in t {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            match v {
                toml::Value::Table(sub) => walk(&key, sub, out),
                other => out.push((key, other.to_string())),
            }
        }
    }
    let mut out = Vec::new();
    walk("", table, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Species {
    Electron,
    Rubidium87,
    Natural { mass: f64, charge_sign: f64 },
}

/// Parses `"<number> <unit>"` into SI for a given dimension.
fn si_value(key: &str, text: &str, kind: UnitKind, mass_kg: f64) -> CResult<f64> {
    let c = Constants::SI;
    let text = text.trim();
    let split = text.find(|ch: char| ch.is_whitespace()).unwrap_or(text.len());
    let (num, unit) = text.split_at(split);
    let value: f64 = num
        .parse()
        .map_err(|_| ConfigError::new(key, format!("cannot read a number from {text:?}")))?;
    let unit = unit.trim();
    let e = c.elementary_charge;
    let h = 2.0 * PI * c.hbar;
    let factor = match (kind, unit) {
        (UnitKind::Energy, "J") => 1.0,
        (UnitKind::Energy, "eV") => e,
        (UnitKind::Energy, "meV") => 1e-3 * e,
        (UnitKind::Energy, "ueV" | "μeV" | "µeV") => 1e-6 * e,
        (UnitKind::Energy, "neV") => 1e-9 * e,
        (UnitKind::Energy, "Hz") => h,
        (UnitKind::Energy, "kHz") => 1e3 * h,
        (UnitKind::Energy, "MHz") => 1e6 * h,
        (UnitKind::Length, "m") => 1.0,
        (UnitKind::Length, "cm") => 1e-2,
        (UnitKind::Length, "mm") => 1e-3,
        (UnitKind::Length, "um" | "μm" | "µm") => 1e-6,
        (UnitKind::Length, "nm") => 1e-9,
        (UnitKind::Force, "N") => 1.0,
        (UnitKind::Force, "eV/m") => e,
        (UnitKind::Force, "keV/m") => 1e3 * e,
        (UnitKind::Acceleration, "m/s2" | "m/s^2") => mass_kg,
        (UnitKind::Magnetic, "T") => 1.0,
        (UnitKind::Magnetic, "mT") => 1e-3,
        (UnitKind::Magnetic, "G") => 1e-4,
        _ => {
            return Err(ConfigError::new(
                key,
                format!("unit {unit:?} is not a {} unit (known: {})", kind.label(), kind.known()),
            ))
        }
    };
    Ok(value * factor)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum UnitKind {
    Energy,
    Length,
    Force,
    Acceleration,
    Magnetic,
}

impl UnitKind {
    fn label(self) -> &'static str {
        match self {
            UnitKind::Energy => "energy",
            UnitKind::Length => "length",
            UnitKind::Force => "force",
            UnitKind::Acceleration => "acceleration",
            UnitKind::Magnetic => "magnetic field",
        }
    }

    fn known(self) -> &'static str {
        match self {
            UnitKind::Energy => "J, eV, meV, ueV, neV, Hz, kHz, MHz",
            UnitKind::Length => "m, cm, mm, um, nm",
            UnitKind::Force => "N, eV/m, keV/m",
            UnitKind::Acceleration => "m/s2",
            UnitKind::Magnetic => "T, mT, G",
        }
    }

    fn dimension(self) -> Dimension {
        match self {
            UnitKind::Energy => Dimension::ENERGY,
            UnitKind::Length => Dimension::LENGTH,
            UnitKind::Force | UnitKind::Acceleration => Dimension::FORCE,
            UnitKind::Magnetic => Dimension::CHARGE_TIMES_B,
        }
    }
}

struct Ctx {
    species: Species,
    mass_kg: f64,
    charge_c: f64,
}

impl Ctx {
    fn physical(&self) -> bool {
        !matches!(self.species, Species::Natural { .. })
    }

    /// SI value of a field input; physical species need explicit units here
    /// because the natural units are derived from these very inputs.
    fn field_si(&self, key: &str, q: &Q, kind: UnitKind) -> CResult<f64> {
        match (q, self.physical()) {
            (Q::Tagged(s), true) => si_value(key, s, kind, self.mass_kg),
            (Q::Bare(_), true) => Err(ConfigError::new(
                key,
                format!("needs a unit for a physical species (e.g. {})", kind.known()),
            )),
            (Q::Bare(v), false) => Ok(*v),
            (Q::Tagged(_), false) => Err(ConfigError::new(key, "units need a physical species, not \"natural\"")),
        }
    }

    fn natural(&self, key: &str, q: &Q, kind: UnitKind, units: &ScaleSystem) -> CResult<f64> {
        let v = match q {
            Q::Bare(v) => *v,
            Q::Tagged(s) => {
                if !self.physical() {
                    return Err(ConfigError::new(key, "units need a physical species, not \"natural\""));
                }
                let si = si_value(key, s, kind, self.mass_kg)?;
                units.to_dimensionless(Quantity::new(si, kind.dimension()))
            }
        };
        if !v.is_finite() {
            return Err(ConfigError::new(key, "must be finite"));
        }
        Ok(v)
    }
}

fn positive(key: &str, v: f64) -> CResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(key, format!("must be positive, got {v}")))
    }
}

fn build(kind: ScenarioKind, raw: RawConfig, params: Vec<(String, String)>) -> CResult<Scenario> {
    let c = Constants::SI;
    let particle = raw.particle.unwrap_or_default();
    let species_name = particle.species.clone().unwrap_or_else(|| "natural".into());
    let species = match species_name.as_str() {
        "electron" => Species::Electron,
        "rb87" => Species::Rubidium87,
        "natural" => Species::Natural {
            mass: positive("particle.mass", particle.mass.unwrap_or(1.0))?,
            charge_sign: match particle.charge_sign.unwrap_or(-1.0) {
                s if s == 1.0 || s == -1.0 => s,
                s => return Err(ConfigError::new("particle.charge_sign", format!("must be 1 or -1, got {s}"))),
            },
        },
        other => {
            return Err(ConfigError::new(
                "particle.species",
                format!("unknown species {other:?}; expected electron, rb87 or natural"),
            ))
        }
    };
    if !matches!(species, Species::Natural { .. }) {
        if particle.mass.is_some() {
            return Err(ConfigError::new("particle.mass", "only used with species = \"natural\""));
        }
        if particle.charge_sign.is_some() {
            return Err(ConfigError::new("particle.charge_sign", "only used with species = \"natural\""));
        }
    }
    let (mass_kg, charge_c) = match species {
        Species::Electron => (c.electron_mass, -c.elementary_charge),
        Species::Rubidium87 => (c.rubidium87_mass, 0.0),
        Species::Natural { .. } => (1.0, 0.0),
    };
    let ctx = Ctx {
        species,
        mass_kg,
        charge_c,
    };

    // fields, then the scale system they imply
    let field = raw.field.unwrap_or_default();
    let fx = field.force_x.as_ref().map(|q| ctx.field_si("field.force_x", q, UnitKind::Force)).transpose()?;
    let fz = field.force_z.as_ref().map(|q| ctx.field_si("field.force_z", q, UnitKind::Force)).transpose()?;
    let g = field.gravity.as_ref().map(|q| ctx.field_si("field.gravity", q, UnitKind::Acceleration)).transpose()?;
    if g.is_some() && !ctx.physical() {
        return Err(ConfigError::new("field.gravity", "needs a physical species; use force_z instead"));
    }
    let fy_list: Vec<f64> = match &field.force_y {
        None => vec![],
        Some(OneOrMany::One(q)) => vec![ctx.field_si("field.force_y", q, UnitKind::Force)?],
        Some(OneOrMany::Many(qs)) => qs
            .iter()
            .map(|q| ctx.field_si("field.force_y", q, UnitKind::Force))
            .collect::<CResult<_>>()?,
    };
    let sweep = kind == ScenarioKind::DosCrossed;
    if !sweep && fy_list.len() > 1 {
        return Err(ConfigError::new("field.force_y", format!("a list is only swept by dos_crossed, not {}", kind.name())));
    }
    if sweep && fy_list.is_empty() {
        return Err(ConfigError::new("field.force_y", "dos_crossed needs at least one perpendicular force"));
    }
    let b = field.b.as_ref().map(|q| ctx.field_si("field.b", q, UnitKind::Magnetic)).transpose()?;
    if let Some(b) = b {
        if !(b > 0.0 && b.is_finite()) {
            return Err(ConfigError::new("field.b", format!("must be positive, got {b}")));
        }
        if ctx.physical() && ctx.charge_c == 0.0 {
            return Err(ConfigError::new("field.b", format!("{species_name} is neutral; a magnetic field has no effect")));
        }
    }
    let fy_fixed = if sweep { 0.0 } else { fy_list.first().copied().unwrap_or(0.0) };
    let force_si = [fx.unwrap_or(0.0), fy_fixed, fz.unwrap_or(0.0) + g.unwrap_or(0.0)];
    if force_si.iter().any(|f| !f.is_finite()) {
        return Err(ConfigError::new("field", "force components must be finite"));
    }

    let (units, cfg, sweep_natural) = match species {
        Species::Natural { mass, charge_sign } => {
            let cfg = match b {
                Some(b) => FieldConfig::magnetic(mass, b, charge_sign, force_si),
                None => FieldConfig::uniform(mass, force_si),
            };
            (ScaleSystem::unit(), cfg, fy_list.clone())
        }
        _ => {
            let phys = PhysicalFields {
                force: force_si,
                b_field: b.unwrap_or(0.0),
                charge: ctx.charge_c,
            };
            let units = make_scales(c.hbar, mass_kg, &phys, None).map_err(|e| {
                ConfigError::new("field", format!("{e}; a physical species needs a force or a magnetic field"))
            })?;
            let cfg = units.field_config(mass_kg, &phys);
            let sweep_natural = fy_list
                .iter()
                .map(|f| units.to_dimensionless(Quantity::new(*f, Dimension::FORCE)))
                .collect();
            (units, cfg, sweep_natural)
        }
    };
    if kind == ScenarioKind::DosCrossed && !cfg.has_magnetic() {
        return Err(ConfigError::new("field.b", "dos_crossed needs a magnetic field"));
    }
    if cfg.has_magnetic() && (cfg.force[0] != 0.0 || cfg.force[1] != 0.0) && kind != ScenarioKind::DosCrossed {
        return Err(ConfigError::new(
            "field.force_y",
            "wave maps in a magnetic field need the force along B (z); crossed fields are only supported by dos_crossed",
        ));
    }
    if matches!(kind, ScenarioKind::FieldFringes | ScenarioKind::AtomLaser) && (cfg.force[2] <= 0.0 || cfg.has_magnetic()) {
        return Err(ConfigError::new("field", format!("{} needs a force along +z and no magnetic field", kind.name())));
    }
    if kind == ScenarioKind::FieldFringes && (cfg.force[0] != 0.0 || cfg.force[1] != 0.0) {
        return Err(ConfigError::new("field", "field_fringes expects the force along z"));
    }

    // source
    let src = raw.source.unwrap_or_default();
    let source_kind = match src.kind.as_deref().unwrap_or("point") {
        "point" => SourceKind::Point,
        "gaussian" => SourceKind::Gaussian,
        other => return Err(ConfigError::new("source.kind", format!("unknown kind {other:?}; expected point or gaussian"))),
    };
    let energies: Vec<f64> = match (&src.energy, &src.energies) {
        (Some(_), Some(_)) => return Err(ConfigError::new("source.energies", "give either energy or energies")),
        (Some(q), None) => vec![ctx.natural("source.energy", q, UnitKind::Energy, &units)?],
        (None, Some(qs)) => qs
            .iter()
            .map(|q| ctx.natural("source.energies", q, UnitKind::Energy, &units))
            .collect::<CResult<_>>()?,
        (None, None) => vec![],
    };
    let widths: Vec<f64> = match (&src.width, &src.widths) {
        (Some(_), Some(_)) => return Err(ConfigError::new("source.widths", "give either width or widths")),
        (Some(q), None) => vec![positive("source.width", ctx.natural("source.width", q, UnitKind::Length, &units)?)?],
        (None, Some(qs)) => qs
            .iter()
            .map(|q| positive("source.widths", ctx.natural("source.widths", q, UnitKind::Length, &units)?))
            .collect::<CResult<_>>()?,
        (None, None) => vec![],
    };
    let uses_source = kind != ScenarioKind::DosCrossed;
    if uses_source {
        if energies.is_empty() {
            return Err(ConfigError::new("source.energy", "missing"));
        }
        if energies.len() > 1 && kind != ScenarioKind::FieldFringes {
            return Err(ConfigError::new("source.energies", format!("{} takes a single energy", kind.name())));
        }
        match source_kind {
            SourceKind::Point if !widths.is_empty() => {
                return Err(ConfigError::new("source.width", "a point source has no width"))
            }
            SourceKind::Gaussian if widths.is_empty() => {
                return Err(ConfigError::new("source.width", "a Gaussian source needs a width"))
            }
            SourceKind::Gaussian if widths.len() > 1 && kind != ScenarioKind::AtomLaser => {
                return Err(ConfigError::new("source.widths", "only atom_laser sweeps widths"))
            }
            _ => {}
        }
        if kind == ScenarioKind::AtomLaser && source_kind != SourceKind::Gaussian {
            return Err(ConfigError::new("source.kind", "atom_laser needs a gaussian source"));
        }
        if kind == ScenarioKind::FieldFringes && source_kind != SourceKind::Point {
            return Err(ConfigError::new("source.kind", "field_fringes needs a point source"));
        }
        if kind == ScenarioKind::FieldFringes {
            for &e in &energies {
                positive("source.energies", e)?;
            }
        }
        if source_kind == SourceKind::Gaussian && cfg.has_magnetic() {
            return Err(ConfigError::new("source.kind", "Gaussian sources in a magnetic field are not supported on grids"));
        }
    }
    let position = match &src.position {
        Some(p) => vec3(&ctx, "source.position", p, &units)?,
        None => [0.0; 3],
    };
    if matches!(kind, ScenarioKind::FieldFringes | ScenarioKind::AtomLaser) && position != [0.0; 3] {
        return Err(ConfigError::new("source.position", format!("{} places the source at the origin", kind.name())));
    }
    let strength = match src.strength {
        Some([re, im]) => Complex64::new(re, im),
        None => Complex64::new(1.0, 0.0),
    };
    if uses_source && (strength.norm() == 0.0 || !strength.is_finite()) {
        return Err(ConfigError::new("source.strength", "must be finite and nonzero"));
    }

    let grid = match raw.grid {
        Some(gr) => {
            let lo = vec3(&ctx, "grid.lo", gr.lo.as_ref().ok_or_else(|| ConfigError::new("grid.lo", "missing"))?, &units)?;
            let hi = vec3(&ctx, "grid.hi", gr.hi.as_ref().ok_or_else(|| ConfigError::new("grid.hi", "missing"))?, &units)?;
            let shape = gr.shape.ok_or_else(|| ConfigError::new("grid.shape", "missing"))?;
            for a in 0..3 {
                let flat = shape[a] == 1;
                if shape[a] == 0 || (!flat && shape[a] < 2) {
                    return Err(ConfigError::new("grid.shape", "every axis needs 1 point (flat) or at least 2"));
                }
                if flat && lo[a] != hi[a] {
                    return Err(ConfigError::new("grid.hi", format!("axis {a} is flat, so lo and hi must agree")));
                }
                if !flat && !(hi[a] > lo[a]) {
                    return Err(ConfigError::new("grid.hi", format!("must exceed grid.lo along axis {a}")));
                }
            }
            if shape.iter().filter(|&&n| n >= 2).count() == 0 {
                return Err(ConfigError::new("grid.shape", "at least one axis needs 2 or more points"));
            }
            Some(Grid::spanning(lo, hi, shape).map_err(|e| ConfigError::new("grid", e.to_string()))?)
        }
        None => None,
    };
    if matches!(kind, ScenarioKind::EbParallel | ScenarioKind::FreePoint | ScenarioKind::Custom) && grid.is_none() {
        return Err(ConfigError::new("grid", "missing"));
    }

    let cut = match raw.cut {
        Some(ct) => {
            let depth = ct.depth.as_ref().ok_or_else(|| ConfigError::new("cut.depth", "missing"))?;
            let depth = positive("cut.depth", ctx.natural("cut.depth", depth, UnitKind::Length, &units)?)?;
            let samples = ct.samples.unwrap_or(1001);
            if samples < 3 {
                return Err(ConfigError::new("cut.samples", "needs at least 3 samples"));
            }
            Some(CutSpec {
                depth,
                span: positive("cut.span", ct.span.unwrap_or(1.2))?,
                samples,
            })
        }
        None => None,
    };
    if matches!(kind, ScenarioKind::FieldFringes | ScenarioKind::AtomLaser) && cut.is_none() {
        return Err(ConfigError::new("cut", "missing"));
    }

    let spectrum = match raw.spectrum {
        Some(sp) => {
            let from = ctx.natural("spectrum.from", sp.from.as_ref().ok_or_else(|| ConfigError::new("spectrum.from", "missing"))?, UnitKind::Energy, &units)?;
            let to = ctx.natural("spectrum.to", sp.to.as_ref().ok_or_else(|| ConfigError::new("spectrum.to", "missing"))?, UnitKind::Energy, &units)?;
            if !(to > from) {
                return Err(ConfigError::new("spectrum.to", "must exceed spectrum.from"));
            }
            let count = sp.count.unwrap_or(601);
            if count < 3 {
                return Err(ConfigError::new("spectrum.count", "needs at least 3 energies"));
            }
            let eta = match &sp.eta {
                Some(q) => ctx.natural("spectrum.eta", q, UnitKind::Energy, &units)?,
                None => 0.05,
            };
            if !(eta >= 0.0) {
                return Err(ConfigError::new("spectrum.eta", format!("must be >= 0, got {eta}")));
            }
            let position = match &sp.position {
                Some(p) => vec3(&ctx, "spectrum.position", p, &units)?,
                None => [0.0; 3],
            };
            Some(SpectrumSpec {
                energies: (0..count).map(|i| from + (to - from) * i as f64 / (count - 1) as f64).collect(),
                eta,
                position,
            })
        }
        None => None,
    };
    if kind == ScenarioKind::DosCrossed && spectrum.is_none() {
        return Err(ConfigError::new("spectrum", "missing"));
    }

    let stem = raw.output.and_then(|o| o.stem).unwrap_or_else(|| kind.name().to_string());
    if stem.is_empty() || stem.contains(['/', '\\']) {
        return Err(ConfigError::new("output.stem", "must be a plain file name stem"));
    }

    Ok(Scenario {
        kind,
        title: raw.title,
        species: species_name,
        units,
        field: cfg,
        force_y_sweep: sweep_natural,
        source_kind,
        position,
        strength,
        energies,
        widths,
        grid,
        cut,
        spectrum,
        stem,
        params,
    })
}

fn vec3(ctx: &Ctx, key: &str, q: &[Q; 3], units: &ScaleSystem) -> CResult<Vec3> {
    Ok([
        ctx.natural(key, &q[0], UnitKind::Length, units)?,
        ctx.natural(key, &q[1], UnitKind::Length, units)?,
        ctx.natural(key, &q[2], UnitKind::Length, units)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_default_validates() {
        for kind in ScenarioKind::ALL {
            let s = parse_config(kind.default_toml()).unwrap_or_else(|e| panic!("{}: {e}", kind.name()));
            assert_eq!(s.kind, kind);
        }
    }

    #[test]
    fn scenario_defaults_convert() {
        let c = Constants::SI;
        let s = parse_config("scenario = \"eb_parallel\"").unwrap();
        let e_j = s.energies[0] * s.units.energy_scale;
        assert!((e_j / (60.8e-6 * c.elementary_charge) - 1.0).abs() < 1e-12);
        assert!((s.field.force[2] * s.units.energy_scale / s.units.length_scale / (116.0 * c.elementary_charge) - 1.0).abs() < 1e-12);
        assert!((s.field.mass - 0.5).abs() < 1e-12);

        let s = parse_config("scenario = \"atom_laser\"").unwrap();
        assert!((s.energies[0] * s.units.energy_scale / (2.0 * PI * c.hbar * 2500.0) - 1.0).abs() < 1e-12);
        let g = s.field.force[2] * s.units.energy_scale / s.units.length_scale / c.rubidium87_mass;
        assert!((g - 9.81).abs() < 1e-12);
        assert_eq!(s.widths.len(), 4);
        assert!((s.widths[0] * s.units.length_scale - 1e-7).abs() < 1e-20);

        let s = parse_config("scenario = \"dos_crossed\"").unwrap();
        assert!((s.field.omega() - 1.0).abs() < 1e-12);
        assert_eq!(s.force_y_sweep.len(), 3);
        assert!((s.force_y_sweep[0] - 6.3e-4).abs() < 0.05e-4);
        assert!((s.force_y_sweep[2] / s.force_y_sweep[0] - 400.0).abs() < 1e-9);
    }

    #[test]
    fn user_values_override_and_echo() {
        let s = parse_config("scenario = \"eb_parallel\"\n[source]\nenergy = \"70 ueV\"\n").unwrap();
        assert!(s.params.iter().any(|(k, v)| k == "source.energy" && v == "\"70 ueV\""));
        let s = parse_config("scenario = \"atom_laser\"\n[source]\nwidth = \"0.3 um\"\n").unwrap();
        assert_eq!(s.widths.len(), 1);
    }

    #[test]
    fn errors_name_the_key() {
        let e = parse_config("scenario = \"eb_parallel\"\n[source]\nenergie = 1.0\n").unwrap_err();
        assert!(e.to_string().contains("energie") && e.to_string().contains("line 3"), "{e}");
        let e = parse_config("scenario = \"eb_parallel\"\n[field]\nb = \"0.001 Tesla\"\n").unwrap_err();
        assert_eq!(e.key, "field.b");
        let e = parse_config("scenario = \"eb_parallel\"\n[field]\nforce_z = 3.0\n").unwrap_err();
        assert_eq!(e.key, "field.force_z");
        let e = parse_config("scenario = \"free_point\"\n[grid]\nshape = [0, 1, 4]\n").unwrap_err();
        assert_eq!(e.key, "grid.shape");
        let e = parse_config("scenario = \"dos_crossed\"\n[cut]\ndepth = 1.0\n").unwrap_err();
        assert_eq!(e.key, "cut");
        let e = parse_config("scenario = \"nope\"").unwrap_err();
        assert_eq!(e.key, "scenario");
        let e = parse_config("scenario = \"atom_laser\"\n[field]\nb = \"1 T\"\n").unwrap_err();
        assert_eq!(e.key, "field.b");
        let e = parse_config("scenario = [1").unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
    }
}
