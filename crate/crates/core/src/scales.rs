//! Physical constants, unit systems and nondimensionalization.
//!
//! All numerics run with hbar = 1 in a length/energy/time triple chosen per
//! scenario. A mass becomes the dimensionless `m L^2 eps / hbar^2`, which is
//! 1/2 in field units and 1 in cyclotron units.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::propagators::FieldConfig;

/// CODATA 2018 values in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub hbar: f64,
    pub electron_mass: f64,
    pub rubidium87_mass: f64,
    pub elementary_charge: f64,
    pub standard_gravity: f64,
    pub atomic_mass_unit: f64,
}

impl Constants {
    pub const SI: Constants = Constants {
        hbar: 1.054_571_817e-34,
        electron_mass: 9.109_383_701_5e-31,
        rubidium87_mass: 87.0 * 1.660_539_066_60e-27,
        elementary_charge: 1.602_176_634e-19,
        standard_gravity: 9.806_65,
        atomic_mass_unit: 1.660_539_066_60e-27,
    };
}

/// External fields in SI units, as read from a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhysicalFields {
    /// Force on the particle (N).
    pub force: [f64; 3],
    /// Magnetic induction along z (T).
    pub b_field: f64,
    /// Particle charge (C); only its product with `b_field` matters.
    pub charge: f64,
}

impl PhysicalFields {
    fn force_norm(&self) -> f64 {
        self.force.iter().map(|f| f * f).sum::<f64>().sqrt()
    }

    /// |q| B / m, zero without a magnetic field or charge.
    pub fn cyclotron_frequency(&self, mass: f64) -> f64 {
        (self.charge * self.b_field).abs() / mass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivation {
    FieldUnits,
    CyclotronUnits,
    Explicit,
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Derivation::FieldUnits => "field_units",
            Derivation::CyclotronUnits => "cyclotron_units",
            Derivation::Explicit => "explicit",
        })
    }
}

/// User-supplied length and energy scales, overriding the automatic choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitScales {
    pub length: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleSystem {
    pub length_scale: f64,
    pub energy_scale: f64,
    pub time_scale: f64,
    pub derivation: Derivation,
    pub hbar: f64,
}

/// Picks field or cyclotron units for a particle of `mass` in `fields`.
///
/// Field units win when `F beta > hbar omega_c`. `explicit` always overrides.
pub fn make_scales(
    hbar: f64,
    mass: f64,
    fields: &PhysicalFields,
    explicit: Option<ExplicitScales>,
) -> Result<ScaleSystem> {
    if !(hbar > 0.0 && mass > 0.0) || !hbar.is_finite() || !mass.is_finite() {
        return Err(Error::InvalidInput(format!(
            "hbar and mass must be positive and finite (got {hbar}, {mass})"
        )));
    }
    if let Some(e) = explicit {
        if !(e.length > 0.0 && e.energy > 0.0) {
            return Err(Error::InvalidInput("explicit scales must be positive".into()));
        }
        return Ok(ScaleSystem {
            length_scale: e.length,
            energy_scale: e.energy,
            time_scale: hbar / e.energy,
            derivation: Derivation::Explicit,
            hbar,
        });
    }
    let force = fields.force_norm();
    let omega = fields.cyclotron_frequency(mass);
    let field_units = (force > 0.0).then(|| {
        let beta = (hbar * hbar / (2.0 * mass * force)).cbrt();
        (beta, force * beta)
    });
    let cyclotron_units = (omega > 0.0).then(|| ((hbar / (mass * omega)).sqrt(), hbar * omega));
    let (length, energy, derivation) = match (field_units, cyclotron_units) {
        (Some((l, e)), Some((_, ec))) if e > ec => (l, e, Derivation::FieldUnits),
        (Some((l, e)), None) => (l, e, Derivation::FieldUnits),
        (_, Some((l, e))) => (l, e, Derivation::CyclotronUnits),
        (None, None) => return Err(Error::NoNaturalScale),
    };
    Ok(ScaleSystem {
        length_scale: length,
        energy_scale: energy,
        time_scale: hbar / energy,
        derivation,
        hbar,
    })
}

impl ScaleSystem {
    /// Unit scales with hbar = 1, for inputs that are already dimensionless.
    pub fn unit() -> Self {
        ScaleSystem {
            length_scale: 1.0,
            energy_scale: 1.0,
            time_scale: 1.0,
            derivation: Derivation::Explicit,
            hbar: 1.0,
        }
    }

    fn unit_of(&self, d: Dimension) -> f64 {
        self.length_scale.powi(d.length)
            * self.energy_scale.powi(d.energy)
            * self.time_scale.powi(d.time)
    }

    pub fn to_dimensionless(&self, q: Quantity) -> f64 {
        q.value / self.unit_of(q.dim)
    }

    pub fn to_physical(&self, value: f64, dim: Dimension) -> Quantity {
        Quantity {
            value: value * self.unit_of(dim),
            dim,
        }
    }

    /// Dimensionless field configuration for a particle of `mass` (kg).
    pub fn field_config(&self, mass: f64, fields: &PhysicalFields) -> FieldConfig {
        let qb = fields.charge * fields.b_field;
        FieldConfig {
            mass: self.to_dimensionless(Quantity::new(mass, Dimension::MASS)),
            force: fields
                .force
                .map(|f| self.to_dimensionless(Quantity::new(f, Dimension::FORCE))),
            b_field: self.to_dimensionless(Quantity::new(qb.abs(), Dimension::CHARGE_TIMES_B)),
            charge_sign: if qb == 0.0 { 0.0 } else { qb.signum() },
        }
    }
}

/// Power product `length^a energy^b time^c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimension {
    pub length: i32,
    pub energy: i32,
    pub time: i32,
}

impl Dimension {
    pub const fn new(length: i32, energy: i32, time: i32) -> Self {
        Dimension { length, energy, time }
    }
    pub const NONE: Dimension = Dimension::new(0, 0, 0);
    pub const LENGTH: Dimension = Dimension::new(1, 0, 0);
    pub const ENERGY: Dimension = Dimension::new(0, 1, 0);
    pub const TIME: Dimension = Dimension::new(0, 0, 1);
    pub const ACTION: Dimension = Dimension::new(0, 1, 1);
    pub const MASS: Dimension = Dimension::new(-2, 1, 2);
    pub const FORCE: Dimension = Dimension::new(-1, 1, 0);
    /// Charge times magnetic induction, i.e. mass per time.
    pub const CHARGE_TIMES_B: Dimension = Dimension::new(-2, 1, 1);
    pub const FREQUENCY: Dimension = Dimension::new(0, 0, -1);
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = [("length", self.length), ("energy", self.energy), ("time", self.time)]
            .iter()
            .filter(|(_, p)| *p != 0)
            .map(|(n, p)| if *p == 1 { n.to_string() } else { format!("{n}^{p}") })
            .collect();
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

impl FromStr for Dimension {
    type Err = Error;

    /// Parses tags like `length^2*energy^-1`, `mass` or `1`.
    fn from_str(s: &str) -> Result<Self> {
        let mut d = Dimension::NONE;
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(d);
        }
        for factor in s.split('*') {
            let (name, power) = match factor.trim().split_once('^') {
                Some((n, p)) => (
                    n.trim(),
                    p.trim()
                        .parse::<i32>()
                        .map_err(|_| Error::UnsupportedDimension(s.to_string()))?,
                ),
                None => (factor.trim(), 1),
            };
            let base = match name {
                "length" => Dimension::LENGTH,
                "energy" => Dimension::ENERGY,
                "time" => Dimension::TIME,
                "mass" => Dimension::MASS,
                "force" => Dimension::FORCE,
                "action" => Dimension::ACTION,
                _ => return Err(Error::UnsupportedDimension(s.to_string())),
            };
            d.length += base.length * power;
            d.energy += base.energy * power;
            d.time += base.time * power;
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub dim: Dimension,
}

impl Quantity {
    pub const fn new(value: f64, dim: Dimension) -> Self {
        Quantity { value, dim }
    }
}

pub fn to_dimensionless(q: Quantity, s: &ScaleSystem) -> f64 {
    s.to_dimensionless(q)
}

pub fn to_physical(value: f64, dim: Dimension, s: &ScaleSystem) -> Quantity {
    s.to_physical(value, dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: Constants = Constants::SI;

    fn electron_in_field() -> (PhysicalFields, ScaleSystem) {
        let fields = PhysicalFields {
            force: [0.0, 0.0, 116.0 * C.elementary_charge],
            b_field: 0.0,
            charge: -C.elementary_charge,
        };
        let s = make_scales(C.hbar, C.electron_mass, &fields, None).unwrap();
        (fields, s)
    }

    #[test]
    fn unit_inputs_give_cube_root_of_half() {
        let f = PhysicalFields {
            force: [0.0, 0.0, 1.0],
            ..Default::default()
        };
        let s = make_scales(1.0, 1.0, &f, None).unwrap();
        assert!((s.length_scale - 0.5f64.cbrt()).abs() < 1e-15);
        assert_eq!(s.derivation, Derivation::FieldUnits);
    }

    #[test]
    fn electron_field_units_golden() {
        // mpmath with CODATA 2018 inputs
        let (_, s) = electron_in_field();
        assert!((s.length_scale / 6.899_564_025_865_380_6e-8 - 1.0).abs() < 1e-13);
        assert!((s.energy_scale / 1.282_301_150_975_304_2e-24 - 1.0).abs() < 1e-13);
        let e = Quantity::new(60.8e-6 * C.elementary_charge, Dimension::ENERGY);
        assert!((s.to_dimensionless(e) - 7.596_681_892_791_661_5).abs() < 1e-12);
    }

    #[test]
    fn mass_is_one_half_in_field_units() {
        let (fields, s) = electron_in_field();
        let cfg = s.field_config(C.electron_mass, &fields);
        assert!((cfg.mass - 0.5).abs() < 1e-14);
        assert!((cfg.force[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn weak_magnetic_field_keeps_field_units() {
        let (mut fields, _) = electron_in_field();
        fields.b_field = 1e-3;
        let s = make_scales(C.hbar, C.electron_mass, &fields, None).unwrap();
        assert_eq!(s.derivation, Derivation::FieldUnits);
        let cfg = s.field_config(C.electron_mass, &fields);
        assert!((cfg.b_field / cfg.mass - 0.014_464_636_588_099_589).abs() < 1e-13);
        assert_eq!(cfg.charge_sign, -1.0);
    }

    #[test]
    fn strong_magnetic_field_switches_to_cyclotron_units() {
        let fields = PhysicalFields {
            force: [0.0, C.elementary_charge, 0.0],
            b_field: 0.5,
            charge: -C.elementary_charge,
        };
        let s = make_scales(C.hbar, C.electron_mass, &fields, None).unwrap();
        assert_eq!(s.derivation, Derivation::CyclotronUnits);
        let cfg = s.field_config(C.electron_mass, &fields);
        assert!((cfg.mass - 1.0).abs() < 1e-14);
        assert!((cfg.b_field - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rubidium_golden() {
        let m = C.rubidium87_mass;
        let fields = PhysicalFields {
            force: [0.0, 0.0, m * 9.81],
            ..Default::default()
        };
        let s = make_scales(C.hbar, m, &fields, None).unwrap();
        assert!((s.length_scale / 3.005_883_926_698_849e-7 - 1.0).abs() < 1e-13);
        let e = Quantity::new(2.0 * std::f64::consts::PI * C.hbar * 2500.0, Dimension::ENERGY);
        assert!((s.to_dimensionless(e) - 3.888_539_135_932_314).abs() < 1e-12);
        assert!((C.rubidium87_mass / (87.0 * C.atomic_mass_unit) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_fields_need_explicit_scales() {
        let f = PhysicalFields::default();
        assert_eq!(make_scales(1.0, 1.0, &f, None), Err(Error::NoNaturalScale));
        let s = make_scales(1.0, 1.0, &f, Some(ExplicitScales { length: 2.0, energy: 3.0 })).unwrap();
        assert_eq!(s.derivation, Derivation::Explicit);
        assert_eq!(s.to_dimensionless(Quantity::new(2.0, Dimension::LENGTH)), 1.0);
    }

    #[test]
    fn parses_dimension_tags() {
        assert_eq!("mass".parse::<Dimension>().unwrap(), Dimension::MASS);
        assert_eq!(
            "length^2*energy^-1".parse::<Dimension>().unwrap(),
            Dimension::new(2, -1, 0)
        );
        assert!(matches!(
            "kelvin".parse::<Dimension>(),
            Err(Error::UnsupportedDimension(_))
        ));
        assert_eq!(Dimension::new(2, -1, 0).to_string(), "length^2*energy^-1");
    }
}
