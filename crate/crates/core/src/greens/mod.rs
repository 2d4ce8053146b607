//! Energy-dependent Green functions G(r, r'; E) with outgoing-wave boundary
//! conditions, `(E - H) G = delta`, hbar = 1.
//!
//! Closed forms (free, uniform field, Landau-level sums) return the
//! `eta -> 0+` limit unless stated otherwise; [`g_laplace`] integrates the
//! kernel numerically at finite `eta` and [`g_laplace_extrapolated`] takes
//! the limit by Richardson extrapolation.

mod field;
mod landau;
mod laplace;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geom::{dist, is_finite, Vec3};
use crate::propagators::FieldConfig;

pub use field::{g1_field, g1_field_coincident_im, g_field, g_field_coincidence_im};
pub use landau::{g_landau, g_landau_row, landau_coincidence_im, landau_coincidence_im_with, LandauOptions};
pub use laplace::{
    g_laplace, g_laplace_extrapolated, g_laplace_with, Extrapolated, LaplaceOptions, LaplaceScheme,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    LaplaceQuadrature,
    LandauSum,
    Auto,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed_form",
            Method::LaplaceQuadrature => "laplace_quadrature",
            Method::LandauSum => "landau_sum",
            Method::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenRequest {
    pub r: Vec3,
    pub rp: Vec3,
    pub energy: f64,
    pub eta: f64,
    pub field: FieldConfig,
    pub method: Method,
}

impl GreenRequest {
    pub fn new(field: FieldConfig, r: Vec3, rp: Vec3, energy: f64) -> Self {
        GreenRequest {
            r,
            rp,
            energy,
            eta: 0.0,
            field,
            method: Method::Auto,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        self.field.validate()?;
        if !is_finite(self.r) || !is_finite(self.rp) {
            return Err(Error::NonFinite("position"));
        }
        if !self.energy.is_finite() || !self.eta.is_finite() {
            return Err(Error::NonFinite("energy"));
        }
        if self.eta < 0.0 {
            return Err(Error::InvalidInput(format!("eta must be >= 0, got {}", self.eta)));
        }
        if self.r == self.rp {
            return Err(Error::Coincident);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenValue {
    pub value: Complex64,
    pub method_used: Method,
    pub est_error: f64,
}

impl GreenValue {
    pub(crate) fn closed(value: Complex64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite("Green function value"));
        }
        Ok(GreenValue {
            value,
            method_used: Method::ClosedForm,
            est_error: 1e-12 * value.norm(),
        })
    }
}

/// Outgoing wave number `sqrt(2 m E)` with `Im k >= 0`.
pub(crate) fn wave_number(mass: f64, energy: Complex64) -> Complex64 {
    // +0.0 imaginary part keeps E < 0 on the decaying branch
    let e = Complex64::new(energy.re, energy.im.max(0.0));
    (2.0 * mass * e).sqrt()
}

/// Free Green function `-(m / 2 pi) exp(i k d) / d`.
pub fn g_free(mass: f64, r: Vec3, rp: Vec3, energy: f64) -> Result<GreenValue> {
    GreenRequest::new(FieldConfig::free(mass), r, rp, energy).validate()?;
    GreenValue::closed(g_free_complex(mass, dist(r, rp), Complex64::new(energy, 0.0)))
}

/// Free Green function at a complex energy `E + i eta` and distance `d > 0`.
pub fn g_free_complex(mass: f64, d: f64, energy: Complex64) -> Complex64 {
    let k = wave_number(mass, energy);
    -mass / (2.0 * PI) * (I * k * d).exp() / d
}

/// `Im G(r, r; E)` for the free particle: `-m k / 2 pi` above threshold.
pub fn g_free_coincidence_im(mass: f64, energy: f64) -> f64 {
    if energy > 0.0 {
        -mass * (2.0 * mass * energy).sqrt() / (2.0 * PI)
    } else {
        0.0
    }
}

/// Same with broadening: `-(m / 2 pi) Re sqrt(2 m (E + i eta))`.
pub fn g_free_coincidence_im_broadened(mass: f64, energy: f64, eta: f64) -> f64 {
    -mass / (2.0 * PI) * wave_number(mass, Complex64::new(energy, eta)).re
}

/// 1D free Green function `-i m exp(i k |z - z'|) / k`.
pub fn g1_free(mass: f64, z: f64, zp: f64, energy: Complex64) -> Complex64 {
    let k = wave_number(mass, energy);
    -I * mass * (I * k * (z - zp).abs()).exp() / k
}

/// Evaluates `req` with the requested method; `Auto` picks the closed form
/// for the field configuration.
pub fn green(req: &GreenRequest) -> Result<GreenValue> {
    req.validate()?;
    let f = &req.field;
    match req.method {
        Method::LaplaceQuadrature => g_laplace(req),
        Method::LandauSum => g_landau(req, &LandauOptions::default()),
        Method::ClosedForm | Method::Auto => {
            if f.has_magnetic() {
                if req.method == Method::ClosedForm {
                    return Err(Error::Unsupported(
                        "no closed form with a magnetic field; use the Landau sum".into(),
                    ));
                }
                // the level sum converges slowly near the source plane; the
                // time integral does not care
                g_laplace(req)
            } else if f.force == [0.0; 3] {
                g_free(f.mass, req.r, req.rp, req.energy)
            } else {
                g_field(f, req.r, req.rp, req.energy)
            }
        }
    }
}
