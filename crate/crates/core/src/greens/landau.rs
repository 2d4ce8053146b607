//! Landau-level sums for a magnetic field along z.
//!
//! With the force parallel to B the Green function factorises into the
//! symmetric-gauge level projectors `P_n(r, r') = (m w / 2 pi) e^{i chi}
//! e^{-xi/2} L_n(xi)` times the 1D Green function along z at the shifted
//! energy `E - (n + 1/2) w`.
//!
//! For a force perpendicular to B only the local density of states is
//! provided. In the Landau gauge along the force every state is a shifted
//! oscillator with guiding centre `Y` and energy `(n + 1/2) w - F Y + m v_d^2 / 2`
//! (`v_d = F / m w`), so
//! `Im G(r, r) = sum_n (m w / 2 pi) int dt h_n(t)^2 Im G1(E - eps_n(y - l t))`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{g1_field, g1_field_coincident_im, g1_free, wave_number, GreenRequest, GreenValue, Method};
use crate::error::{Error, Result};
use crate::geom::{is_finite, Vec3};
use crate::propagators::FieldConfig;
use crate::quad::{adaptive_with_breaks, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandauOptions {
    pub max_levels: usize,
    pub rel_tol: f64,
    /// Levels kept beyond the last open channel before the tail test starts.
    pub evanescent_levels: usize,
}

impl Default for LandauOptions {
    fn default() -> Self {
        LandauOptions {
            max_levels: 200_000,
            rel_tol: 1e-10,
            evanescent_levels: 10,
        }
    }
}

const RESCALE: f64 = 1e150;

/// `e^{-x/2} L_n(x)` for n = 0..=n_max, with rescaling so that large `x`
/// neither overflows the polynomial nor underflows the exponential.
pub(crate) fn laguerre_weighted(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut log_scale = -0.5 * x;
    for n in 0..=n_max {
        out.push(cur * log_scale.exp());
        let next = ((2 * n + 1) as f64 - x) * cur - n as f64 * prev;
        prev = cur;
        cur = next / (n + 1) as f64;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    out
}

/// Normalised Hermite functions `h_n(t)`, `int h_n^2 dt = 1`.
pub(crate) fn hermite_functions(n_max: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut log_scale = -0.5 * t * t - 0.25 * PI.ln();
    for n in 0..=n_max {
        out.push(cur * log_scale.exp());
        let next = (2.0 / (n + 1) as f64).sqrt() * t * cur - (n as f64 / (n + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    out
}

fn check_parallel(cfg: &FieldConfig) -> Result<()> {
    cfg.validate()?;
    if !cfg.has_magnetic() {
        return Err(Error::InvalidInput("Landau sum needs a magnetic field".into()));
    }
    Ok(())
}

/// Number of levels that are open somewhere between the two heights, plus the
/// margin demanded by the options.
fn mandatory_levels(cfg: &FieldConfig, z: f64, zp: f64, energy: f64, eta: f64, opts: &LandauOptions) -> usize {
    let w = cfg.omega();
    let f = cfg.force[2];
    let top = energy + (f * z).max(f * zp).max(0.0) + 10.0 * eta.max(w);
    let open = if top > 0.5 * w { ((top / w) - 0.5).floor() as usize + 1 } else { 0 };
    open + opts.evanescent_levels
}

fn g1_level(cfg: &FieldConfig, z: f64, zp: f64, energy: f64, eta: f64) -> Result<Complex64> {
    let f = cfg.force[2];
    if f == 0.0 {
        Ok(g1_free(cfg.mass, z, zp, Complex64::new(energy, eta)))
    } else {
        g1_field(cfg.mass, f, z, zp, energy)
    }
}

/// Green function as a Landau-level sum, force parallel to B.
///
/// `eta` broadens the levels when the force vanishes; with a longitudinal
/// force the 1D Green function is taken at real energy.
pub fn g_landau(req: &GreenRequest, opts: &LandauOptions) -> Result<GreenValue> {
    req.validate()?;
    let cfg = &req.field;
    check_parallel(cfg)?;
    if cfg.force_perp() != 0.0 {
        return Err(Error::Unsupported(
            "crossed electric and magnetic fields: only the local density of states is available".into(),
        ));
    }
    let mut cache = Vec::new();
    landau_sum(cfg, req.r, req.rp, req.energy, req.eta, opts, &mut cache)
}

/// Green function at every `(x, y)` of one plane `z`, force parallel to B.
///
/// The 1D Green functions depend only on the level and the two heights, so
/// they are computed once for the whole row.
pub fn g_landau_row(
    cfg: &FieldConfig,
    rp: Vec3,
    z: f64,
    xy: &[[f64; 2]],
    energy: f64,
    eta: f64,
    opts: &LandauOptions,
) -> Result<Vec<GreenValue>> {
    check_parallel(cfg)?;
    if cfg.force_perp() != 0.0 {
        return Err(Error::Unsupported("Landau rows need the force parallel to B".into()));
    }
    let mut cache = Vec::new();
    xy.iter()
        .map(|p| {
            let req = GreenRequest::new(*cfg, [p[0], p[1], z], rp, energy).with_eta(eta);
            req.validate()?;
            landau_sum(cfg, req.r, rp, energy, eta, opts, &mut cache)
        })
        .collect()
}

fn landau_sum(
    cfg: &FieldConfig,
    r: Vec3,
    rp: Vec3,
    energy: f64,
    eta: f64,
    opts: &LandauOptions,
    cache: &mut Vec<Complex64>,
) -> Result<GreenValue> {
    let m = cfg.mass;
    let w = cfg.omega();
    let rho2 = (r[0] - rp[0]).powi(2) + (r[1] - rp[1]).powi(2);
    let xi = 0.5 * m * w * rho2;
    let chi = 0.5 * cfg.qb() * (rp[0] * r[1] - r[0] * rp[1]);
    let prefactor = Complex64::from_polar(m * w / (2.0 * PI), chi);

    let needed = mandatory_levels(cfg, r[2], rp[2], energy, eta, opts);
    let mut n_max = needed.min(opts.max_levels);
    let mut lag = laguerre_weighted(n_max, xi);
    let mut sum = Complex64::new(0.0, 0.0);
    // |e^{-x/2} L_n(x)| <= 1, so the 1D magnitudes bound the terms; a small
    // Laguerre factor near one of its zeros says nothing about the tail
    let mut bound = (0.0, 0.0);
    let mut tail = f64::INFINITY;
    let mut n = 0;
    loop {
        if n > n_max {
            if n_max >= opts.max_levels {
                return Err(Error::NonConvergence {
                    what: "Landau-level sum",
                    value: prefactor * sum,
                    est_error: prefactor.norm() * tail,
                });
            }
            n_max = (2 * n_max).min(opts.max_levels);
            lag = laguerre_weighted(n_max, xi);
        }
        if cache.len() <= n {
            let shifted = energy - (n as f64 + 0.5) * w;
            cache.push(g1_level(cfg, r[2], rp[2], shifted, eta)?);
        }
        sum += lag[n] * cache[n];
        bound = (bound.1, cache[n].norm());
        n += 1;
        if n >= needed && n >= 2 {
            let ratio = if bound.0 > 0.0 { bound.1 / bound.0 } else { 0.0 };
            tail = if ratio < 1.0 { bound.1 * ratio / (1.0 - ratio) } else { f64::INFINITY };
            if tail <= opts.rel_tol * sum.norm() {
                break;
            }
        }
    }
    let value = prefactor * sum;
    if !value.is_finite() {
        return Err(Error::NonFinite("Landau-level sum"));
    }
    Ok(GreenValue {
        value,
        method_used: Method::LandauSum,
        est_error: prefactor.norm() * tail + 1e-14 * value.norm() * (n as f64).sqrt(),
    })
}

/// `Im G(r, r; E)` in a magnetic field along z, for any uniform force.
///
/// `eta` broadens the levels when the longitudinal force vanishes and is
/// ignored otherwise (the Airy continuum needs no broadening).
pub fn landau_coincidence_im(cfg: &FieldConfig, r: Vec3, energy: f64, eta: f64) -> Result<f64> {
    landau_coincidence_im_with(cfg, r, energy, eta, &LandauOptions::default())
}

pub fn landau_coincidence_im_with(
    cfg: &FieldConfig,
    r: Vec3,
    energy: f64,
    eta: f64,
    opts: &LandauOptions,
) -> Result<f64> {
    check_parallel(cfg)?;
    if !is_finite(r) || !energy.is_finite() || !eta.is_finite() {
        return Err(Error::NonFinite("density-of-states input"));
    }
    if eta < 0.0 {
        return Err(Error::InvalidInput(format!("eta must be >= 0, got {eta}")));
    }
    let m = cfg.mass;
    let w = cfg.omega();
    let fz = cfg.force[2];
    let fp = cfg.force_perp();
    if fz == 0.0 && fp == 0.0 && eta == 0.0 {
        return Err(Error::InvalidInput(
            "density of states without a force needs eta > 0 (delta-like levels)".into(),
        ));
    }
    let im_g1 = |e: f64| -> Result<f64> {
        if fz == 0.0 {
            Ok(-m * wave_number(m, Complex64::new(e, eta)).inv().re)
        } else {
            g1_field_coincident_im(m, fz, r[2], e)
        }
    };

    // perpendicular force: guiding-centre average over h_n(t)^2
    let ell = 1.0 / (m * w).sqrt();
    let y = if fp > 0.0 { (cfg.force[0] * r[0] + cfg.force[1] * r[1]) / fp } else { 0.0 };
    let drift = if fp > 0.0 { 0.5 * m * (fp / (m * w)).powi(2) } else { 0.0 };
    let base = energy + fp * y - drift;
    let level = |n: usize| -> Result<f64> {
        let shifted = base - (n as f64 + 0.5) * w;
        if fp == 0.0 {
            return im_g1(shifted);
        }
        let half = (2.0 * n as f64 + 1.0).sqrt() + 10.0;
        let mut breaks = vec![-half];
        let t_star = shifted / (fp * ell);
        if t_star.abs() < half {
            breaks.push(t_star);
        }
        breaks.push(half);
        let err = std::cell::RefCell::new(None);
        let integrand = |t: f64| {
            let h = hermite_functions(n, t)[n];
            match im_g1(shifted - fp * ell * t) {
                Ok(v) => Complex64::new(h * h * v, 0.0),
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        };
        let out = adaptive_with_breaks(&integrand, &breaks, Tolerance::new(1e-300, 0.1 * opts.rel_tol));
        let value = out.into_result("guiding-centre average")?.value.re;
        match err.into_inner() {
            Some(e) => Err(e),
            None => Ok(value),
        }
    };

    let needed = mandatory_levels(cfg, r[2], r[2], base + 10.0 * fp * ell, eta, opts);
    let mut sum = 0.0;
    let mut quiet = 0;
    let mut n = 0;
    loop {
        if n >= opts.max_levels {
            return Err(Error::NonConvergence {
                what: "Landau density of states",
                value: Complex64::new(sum * m * w / (2.0 * PI), 0.0),
                est_error: f64::NAN,
            });
        }
        let term = level(n)?;
        sum += term;
        n += 1;
        if n >= needed {
            // the broadened tail falls off like X^{-3/2}: add it analytically
            if fz == 0.0 && eta > 0.0 {
                let x = (n as f64) * w - base;
                sum -= m * eta / (2.0 * (2.0 * m).sqrt()) * (2.0 / w) * x.powf(-0.5);
                break;
            }
            if term.abs() <= opts.rel_tol * sum.abs() {
                quiet += 1;
                if quiet >= 3 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
    }
    Ok(m * w / (2.0 * PI) * sum)
}
