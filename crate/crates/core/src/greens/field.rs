//! Closed forms in a uniform force field.
//!
//! In field units (m = 1/2, F = 1, force along +zeta) the 3D Green function
//! is `(Ai'(u-) Ci(u+) - Ai(u-) Ci'(u+)) / (4 d)` with
//! `u+- = -(E + Z +- d/2)`, `Z` the mean coordinate of the two points along
//! the force and `d` their distance. The 1D one is
//! `-pi Ai(-(E + zeta_<)) Ci(-(E + zeta_>))`. Both are checked against the
//! Laplace quadrature of the kernel in the tests.

use num_complex::Complex64;

use super::{g1_free, g_laplace, GreenRequest, GreenValue, Method};
use crate::error::{Error, Result};
use crate::geom::{add, dist, dot, scale, Vec3};
use crate::propagators::FieldConfig;
use crate::specfun::{airy_scaled, ScaledAiry};

use std::f64::consts::PI;

/// Length and energy units of the linear potential.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FieldUnits {
    pub beta: f64,
    pub eps: f64,
    pub fhat: Vec3,
}

impl FieldUnits {
    pub(crate) fn new(mass: f64, force: Vec3) -> Result<Self> {
        let f = dot(force, force).sqrt();
        if f == 0.0 {
            return Err(Error::InvalidInput("uniform-field form needs a nonzero force".into()));
        }
        let beta = (1.0 / (2.0 * mass * f)).cbrt();
        Ok(FieldUnits {
            beta,
            eps: f * beta,
            fhat: scale(force, 1.0 / f),
        })
    }
}

/// `Ai(x) Ci(y)` for `x >= y`, with the exponential factors combined.
fn ai_ci(a: &ScaledAiry, c: &ScaledAiry, da: bool, dc: bool) -> Complex64 {
    let av = if da { a.ai_prime } else { a.ai };
    let (cb, ca) = if dc { (c.bi_prime, c.ai_prime) } else { (c.bi, c.ai) };
    let grow = (c.zeta - a.zeta).exp();
    let decay = (-c.zeta - a.zeta).exp();
    Complex64::new(av * cb * grow, av * ca * decay)
}

/// Uniform-field Green function (no magnetic field), any force direction.
pub fn g_field(cfg: &FieldConfig, r: Vec3, rp: Vec3, energy: f64) -> Result<GreenValue> {
    let req = GreenRequest::new(*cfg, r, rp, energy);
    req.validate()?;
    if cfg.has_magnetic() {
        return Err(Error::InvalidInput("g_field requires b_field = 0".into()));
    }
    let u = FieldUnits::new(cfg.mass, cfg.force)?;
    let d = dist(r, rp) / u.beta;
    let zbar = 0.5 * dot(u.fhat, add(r, rp)) / u.beta;
    let e = energy / u.eps;
    let (um, up) = (-(e + zbar - 0.5 * d), -(e + zbar + 0.5 * d));
    let a = airy_scaled(um)?;
    let c = airy_scaled(up)?;
    let value = (ai_ci(&a, &c, true, false) - ai_ci(&a, &c, false, true)) / (4.0 * d)
        / (u.eps * u.beta.powi(3));
    if value.is_finite() {
        return GreenValue::closed(value);
    }
    let mut fallback = g_laplace(&req.with_method(Method::LaplaceQuadrature))?;
    fallback.method_used = Method::LaplaceQuadrature;
    Ok(fallback)
}

/// `Im G(r, r; E)` in a uniform field: `(u Ai(u)^2 - Ai'(u)^2) / 4` in field
/// units with `u = -(E + zeta)`.
pub fn g_field_coincidence_im(cfg: &FieldConfig, r: Vec3, energy: f64) -> Result<f64> {
    cfg.validate()?;
    let u = FieldUnits::new(cfg.mass, cfg.force)?;
    let x = -(energy / u.eps + dot(u.fhat, r) / u.beta);
    let a = airy_scaled(x)?;
    let decay = (-2.0 * a.zeta).exp();
    Ok(0.25 * (x * a.ai * a.ai - a.ai_prime * a.ai_prime) * decay / (u.eps * u.beta.powi(3)))
}

/// 1D Green function of `-(1/2m) d^2/dz^2 - f z` (hbar = 1), real energy.
///
/// Falls back to the free form for `f = 0`.
pub fn g1_field(mass: f64, f: f64, z: f64, zp: f64, energy: f64) -> Result<Complex64> {
    if f == 0.0 {
        return Ok(g1_free(mass, z, zp, Complex64::new(energy, 0.0)));
    }
    let u = FieldUnits::new(mass, [0.0, 0.0, f])?;
    let (s, sp) = (f.signum() * z / u.beta, f.signum() * zp / u.beta);
    let e = energy / u.eps;
    let a = airy_scaled(-(e + s.min(sp)))?;
    let c = airy_scaled(-(e + s.max(sp)))?;
    Ok(-PI * ai_ci(&a, &c, false, false) / (u.eps * u.beta))
}

/// `Im G1(z, z; E) = -pi Ai(-(E + zeta))^2` in field units.
pub fn g1_field_coincident_im(mass: f64, f: f64, z: f64, energy: f64) -> Result<f64> {
    if f == 0.0 {
        return Ok(g1_free(mass, z, z, Complex64::new(energy, 0.0)).im);
    }
    let u = FieldUnits::new(mass, [0.0, 0.0, f])?;
    let a = airy_scaled(-(energy / u.eps + f.signum() * z / u.beta))?;
    Ok(-PI * a.ai * a.ai * (-2.0 * a.zeta).exp() / (u.eps * u.beta))
}
