//! Source terms and the scattering waves they emit.
//!
//! A Gaussian source `sigma = s (2 pi a^2)^{-3/2} exp(-|r - r0|^2 / 2a^2)` is
//! the free kernel at imaginary time `-i alpha`, `alpha = m a^2`. Rewriting it
//! as the field kernel from a shifted centre `r_v = r0 - alpha^2 F / 2m`
//! turns the convolution with G into a single Laplace integral that starts
//! at `T = -i alpha`:
//!
//! `psi(r) = s C (-i) int_{-i alpha}^{inf} dT e^{iET} K_F(r, T | r_v)`,
//! `C = exp(-E alpha - alpha F.r0 + alpha^3 F^2 / 3m)`.
//!
//! Away from the source the part of the path between `-i alpha` and 0 is
//! exponentially small and `psi = s C G(r, r_v; E)`: a point source shifted
//! against the force, equivalent to the energy `E - m F^2 a^4 / 2` at r0.
//! [`gaussian_wave_direct`] integrates the 3D convolution directly and serves
//! as the independent check.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{add, dist, dot, norm, scale, sub, Grid, Vec3};
use crate::greens::{green, GreenRequest};
use crate::propagators::{kernel_parts, FieldConfig};
use crate::quad::{adaptive, gauss_legendre, semi_infinite, Tolerance};
use crate::scales::ScaleSystem;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Point,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub position: Vec3,
    pub strength: Complex64,
    pub width: f64,
    pub energy: f64,
}

impl SourceSpec {
    pub fn point(position: Vec3, strength: Complex64, energy: f64) -> Self {
        SourceSpec {
            kind: SourceKind::Point,
            position,
            strength,
            width: 0.0,
            energy,
        }
    }

    pub fn gaussian(position: Vec3, strength: Complex64, width: f64, energy: f64) -> Self {
        SourceSpec {
            kind: SourceKind::Gaussian,
            position,
            strength,
            width,
            energy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !crate::geom::is_finite(self.position) || !self.strength.is_finite() || !self.energy.is_finite() {
            return Err(Error::NonFinite("source specification"));
        }
        if self.strength == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidInput("source strength must be nonzero".into()));
        }
        match self.kind {
            SourceKind::Point if self.width != 0.0 => {
                Err(Error::InvalidInput("a point source has width 0".into()))
            }
            SourceKind::Gaussian if !(self.width > 0.0 && self.width.is_finite()) => Err(
                Error::InvalidInput(format!("Gaussian width must be positive, got {}", self.width)),
            ),
            _ => Ok(()),
        }
    }
}

/// `sigma(r)` of a Gaussian source. Point sources are distributions and
/// cannot be sampled.
pub fn sigma_eval(s: &SourceSpec, r: Vec3) -> Result<Complex64> {
    s.validate()?;
    if s.kind == SourceKind::Point {
        return Err(Error::InvalidInput(
            "a point source is a delta distribution; use the Green function directly".into(),
        ));
    }
    let a2 = s.width * s.width;
    let d = sub(r, s.position);
    Ok(s.strength * (2.0 * PI * a2).powf(-1.5) * (-dot(d, d) / (2.0 * a2)).exp())
}

/// Shifted centre and log of the constant `C` for a Gaussian source.
fn gaussian_shift(s: &SourceSpec, cfg: &FieldConfig) -> (Vec3, f64, f64) {
    let m = cfg.mass;
    let alpha = m * s.width * s.width;
    let f = cfg.force;
    let rv = sub(s.position, scale(f, alpha * alpha / (2.0 * m)));
    let log_c = -s.energy * alpha - alpha * dot(f, s.position) + alpha.powi(3) * dot(f, f) / (3.0 * m);
    (rv, log_c, alpha)
}

/// The Gaussian source's wave at `r` with an error estimate.
pub fn gaussian_wave(s: &SourceSpec, cfg: &FieldConfig, r: Vec3) -> Result<(Complex64, f64)> {
    s.validate()?;
    cfg.validate()?;
    if s.kind != SourceKind::Gaussian {
        return Err(Error::InvalidInput("gaussian_wave needs a Gaussian source".into()));
    }
    if cfg.has_magnetic() {
        return gaussian_wave_direct(s, cfg, r, 48);
    }
    let (rv, log_c, alpha) = gaussian_shift(s, cfg);
    let m = cfg.mass;
    let e = s.energy;
    let f = cfg.force;
    let d = dist(r, rv);

    // far away the path piece from -i alpha to 0 is below roundoff
    if dist(r, s.position) > 9.0 * s.width && d > 0.0 {
        let g = green(&GreenRequest::new(*cfg, r, rv, e))?;
        let log_missing = e.max(0.0) * alpha + alpha * 0.5 * dot(f, add(r, rv)).max(0.0)
            - m * d * d / (2.0 * alpha)
            + 1.5 * (m / (2.0 * PI * alpha)).ln()
            + alpha.ln();
        if g.value.norm() > 0.0 && log_missing - g.value.norm().ln() < -36.0 {
            let c = s.strength * log_c.exp();
            return Ok((c * g.value, c.norm() * g.est_error));
        }
    }

    let start = Complex64::new(0.0, -alpha);
    let integrand = |t: Complex64| {
        let (pre, exponent) = kernel_parts(cfg, r, rv, t);
        let v = -I * pre * (exponent + I * e * t + log_c).exp();
        if v.is_finite() {
            v
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    // values this far below the wave at the source are roundoff, e.g. deep in
    // the classically forbidden region
    let floor = 1e-15 * log_c.exp() * m / (2.0 * PI * s.width);
    let tol = Tolerance::new(floor.max(1e-300), 1e-10);
    let f2 = dot(f, f);
    let mut pieces: Vec<(Complex64, Complex64, bool)> = Vec::new();
    let time = if f2 > 0.0 {
        let linear = e + 0.5 * dot(f, add(r, rv));
        let mut theta = PI / 6.0;
        let mut t_s = (24.0 * m * m / f2).cbrt();
        if linear > 0.0 {
            let s_star = (8.0 * m * linear / (3.0 * f2)).sqrt();
            theta = theta.min((3.0 / (2.0 / 3.0 * linear * s_star)).min(1.0).asin());
            t_s = t_s.max(s_star);
        }
        pieces.push((start, Complex64::from_polar(1.0, -theta), true));
        t_s
    } else if e > 0.0 {
        let tc = (d * (m / (2.0 * e)).sqrt()).max(alpha);
        let tan = (3.0 / (e * tc)).min(1.0);
        pieces.push((start, Complex64::new(tc, 0.0), false));
        pieces.push((Complex64::new(tc, 0.0), Complex64::from_polar(1.0, tan.atan()), true));
        tc
    } else {
        pieces.push((start, Complex64::new(0.0, -1.0), true));
        (m * d * d).max(alpha).max(1.0 / e.abs().max(1e-300)).min(1e6)
    };
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for (a, b, ray) in pieces {
        let part = if ray {
            semi_infinite(&|u: f64| integrand(a + b * u) * b, 0.0, 0.25 * time.max(alpha), tol)
        } else {
            let dir = b - a;
            adaptive(&|u: f64| integrand(a + dir * u) * dir, 0.0, 1.0, tol)
        };
        let part = part.into_result("Gaussian source contour")?;
        value += part.value;
        error += part.error;
    }
    Ok((s.strength * value, s.strength.norm() * error))
}

/// Direct 3D quadrature of `int G(r, r') sigma(r') d^3r'` in spherical
/// coordinates around `r`, truncated at 6a; the difference to an 8a
/// truncation is returned as the error estimate.
pub fn gaussian_wave_direct(s: &SourceSpec, cfg: &FieldConfig, r: Vec3, nodes: usize) -> Result<(Complex64, f64)> {
    let six = convolve_ball(s, cfg, r, 6.0 * s.width, nodes)?;
    let eight = convolve_ball(s, cfg, r, 8.0 * s.width, nodes)?;
    Ok((six, (six - eight).norm()))
}

fn convolve_ball(s: &SourceSpec, cfg: &FieldConfig, r: Vec3, radius: f64, n: usize) -> Result<Complex64> {
    s.validate()?;
    if s.kind != SourceKind::Gaussian {
        return Err(Error::InvalidInput("direct convolution needs a Gaussian source".into()));
    }
    let axis = sub(s.position, r);
    let dc = norm(axis);
    // orthonormal frame with e3 towards the source centre
    let e3 = if dc > 0.0 { scale(axis, 1.0 / dc) } else { [0.0, 0.0, 1.0] };
    let helper = if e3[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = {
        let p = sub(helper, scale(e3, dot(helper, e3)));
        scale(p, 1.0 / norm(p))
    };
    let e2 = [
        e3[1] * e1[2] - e3[2] * e1[1],
        e3[2] * e1[0] - e3[0] * e1[2],
        e3[0] * e1[1] - e3[1] * e1[0],
    ];
    let inside = dc < radius;
    let cos_min = if inside { -1.0 } else { (1.0 - (radius / dc).powi(2)).sqrt() };
    let gl_theta = gauss_legendre(n);
    let gl_u = gauss_legendre(2 * n);
    let n_phi = n;
    let mut total = Complex64::new(0.0, 0.0);
    for &(xc, wc) in gl_theta.iter() {
        let c = cos_min + (1.0 - cos_min) * 0.5 * (xc + 1.0);
        let wc = wc * 0.5 * (1.0 - cos_min);
        let sn = (1.0 - c * c).max(0.0).sqrt();
        let disc = (radius * radius - dc * dc * sn * sn).max(0.0).sqrt();
        let (u0, u1) = if inside { (0.0, dc * c + disc) } else { (dc * c - disc, dc * c + disc) };
        for ip in 0..n_phi {
            let phi = 2.0 * PI * ip as f64 / n_phi as f64;
            let dir = add(add(scale(e1, sn * phi.cos()), scale(e2, sn * phi.sin())), scale(e3, c));
            let mut radial = Complex64::new(0.0, 0.0);
            for &(xu, wu) in gl_u.iter() {
                let u = u0 + (u1 - u0) * 0.5 * (xu + 1.0);
                let rp = add(r, scale(dir, u));
                let g = green(&GreenRequest::new(*cfg, r, rp, s.energy))?.value;
                radial += wu * u * u * g * sigma_eval(s, rp)?;
            }
            total += radial * 0.5 * (u1 - u0) * wc * (2.0 * PI / n_phi as f64);
        }
    }
    Ok(total)
}

/// Point-source equivalent of a Gaussian source for the far field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualSource {
    /// Point source at the shifted centre, amplitude included.
    pub point: SourceSpec,
    /// Displacement of the virtual centre from the true one.
    pub shift: Vec3,
    /// Energy that gives the same far field for a point source at r0.
    pub effective_energy: f64,
    /// Minimum distance from r0 for which the replacement is accepted.
    pub valid_beyond: f64,
    pub field: FieldConfig,
}

pub fn virtual_point_source(s: &SourceSpec, cfg: &FieldConfig) -> Result<VirtualSource> {
    s.validate()?;
    cfg.validate()?;
    if s.kind != SourceKind::Gaussian {
        return Err(Error::InvalidInput("virtual source needs a Gaussian source".into()));
    }
    if cfg.has_magnetic() {
        return Err(Error::Unsupported("virtual source in a magnetic field".into()));
    }
    let (rv, log_c, _) = gaussian_shift(s, cfg);
    let f = cfg.force_norm();
    let beta = if f > 0.0 { (1.0 / (2.0 * cfg.mass * f)).cbrt() } else { 0.0 };
    Ok(VirtualSource {
        point: SourceSpec::point(rv, s.strength * log_c.exp(), s.energy),
        shift: sub(rv, s.position),
        effective_energy: s.energy - 0.5 * cfg.mass * f * f * s.width.powi(4),
        valid_beyond: 10.0 * s.width.max(beta),
        field: *cfg,
    })
}

impl VirtualSource {
    pub fn wave(&self, r: Vec3) -> Result<Complex64> {
        let centre = sub(self.point.position, self.shift);
        let distance = dist(r, centre);
        if distance < self.valid_beyond {
            return Err(Error::OutsideFarField {
                distance,
                required: self.valid_beyond,
            });
        }
        Ok(self.point.strength * green(&GreenRequest::new(self.field, r, self.point.position, self.point.energy))?.value)
    }
}

/// Scattering wave sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveGrid {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    /// Largest estimated error relative to the sample magnitude.
    pub max_rel_error: f64,
    pub source: SourceSpec,
    pub field: FieldConfig,
    pub scale: ScaleSystem,
}

impl WaveGrid {
    pub fn at(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.values[self.grid.index(i, j, k)]
    }
}

/// Wave of a single source at one point.
pub fn wave_at(s: &SourceSpec, cfg: &FieldConfig, r: Vec3) -> Result<(Complex64, f64)> {
    match s.kind {
        SourceKind::Point => {
            let g = green(&GreenRequest::new(*cfg, r, s.position, s.energy))?;
            Ok((s.strength * g.value, s.strength.norm() * g.est_error))
        }
        SourceKind::Gaussian => gaussian_wave(s, cfg, r),
    }
}

/// `psi_sc` on every grid point, evaluated in parallel in grid order.
pub fn scatter_wave(s: &SourceSpec, cfg: &FieldConfig, grid: &Grid) -> Result<WaveGrid> {
    s.validate()?;
    cfg.validate()?;
    if s.kind == SourceKind::Point {
        let standoff = if grid.min_spacing().is_finite() { grid.min_spacing() } else { 0.0 };
        for idx in 0..grid.len() {
            let distance = dist(grid.point_at(idx), s.position);
            if distance < standoff || distance == 0.0 {
                return Err(Error::InsideStandoff {
                    index: idx,
                    distance,
                    standoff,
                });
            }
        }
    }
    let samples: Vec<(Complex64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|idx| wave_at(s, cfg, grid.point_at(idx)))
        .collect::<Result<_>>()?;
    let max_rel_error = samples
        .iter()
        .filter(|(v, _)| v.norm() > 0.0)
        .map(|(v, e)| e / v.norm())
        .fold(0.0, f64::max);
    Ok(WaveGrid {
        grid: *grid,
        values: samples.into_iter().map(|(v, _)| v).collect(),
        max_rel_error,
        source: *s,
        field: *cfg,
        scale: ScaleSystem::unit(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_hermite;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn gaussian_peak_and_normalisation() {
        let s = SourceSpec::gaussian([0.3, -0.2, 1.0], Complex64::new(2.0, 1.0), 0.7, 1.0);
        let peak = sigma_eval(&s, s.position).unwrap();
        assert!((peak - s.strength * (2.0 * PI * 0.49f64).powf(-1.5)).norm() < 1e-15);
        // x = r0 + sqrt(2) a t turns the integral into a Gauss-Hermite product
        let gh = gauss_hermite(20);
        let mut total = Complex64::new(0.0, 0.0);
        for &(x, wx) in gh.iter() {
            for &(y, wy) in gh.iter() {
                for &(z, wz) in gh.iter() {
                    let t = [x, y, z];
                    let p = add(s.position, scale(t, 2f64.sqrt() * s.width));
                    let jac = (2f64.sqrt() * s.width).powi(3) * (x * x + y * y + z * z).exp();
                    total += wx * wy * wz * jac * sigma_eval(&s, p).unwrap();
                }
            }
        }
        assert!((total - s.strength).norm() < 1e-8 * s.strength.norm());
    }

    #[test]
    fn point_sources_cannot_be_sampled() {
        let s = SourceSpec::point([0.0; 3], one(), 1.0);
        assert!(sigma_eval(&s, [0.0; 3]).is_err());
        let bad = SourceSpec { width: 0.1, ..s };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn free_far_field_has_gaussian_form_factor() {
        let cfg = FieldConfig::free(1.0);
        let (a, e) = (0.4, 2.0);
        let s = SourceSpec::gaussian([0.0; 3], one(), a, e);
        let r = [0.0, 3.0, 4.0];
        let k2 = 2.0 * e;
        let want = (-k2 * a * a / 2.0).exp() * crate::greens::g_free(1.0, r, [0.0; 3], e).unwrap().value;
        let (got, _) = gaussian_wave(&s, &cfg, r).unwrap();
        assert!((got - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn contour_agrees_with_direct_quadrature() {
        let cases = [
            (FieldConfig::free(1.0), [0.0, 0.0, 0.0], 1.0),
            (FieldConfig::free(1.0), [0.3, 0.2, -0.5], 1.0),
            (FieldConfig::free(1.0), [0.1, 0.0, 0.4], -0.5),
            (FieldConfig::uniform(0.5, [0.0, 0.0, 1.0]), [0.2, 0.0, 0.6], 1.5),
            (FieldConfig::uniform(0.5, [0.0, 0.0, 1.0]), [0.0, 0.0, -0.5], 0.5),
            (FieldConfig::uniform(0.5, [0.0, 0.0, 1.0]), [1.5, 0.0, 2.0], 1.5),
        ];
        for (cfg, r, e) in cases {
            let s = SourceSpec::gaussian([0.0; 3], one(), 0.5, e);
            let (c, _) = gaussian_wave(&s, &cfg, r).unwrap();
            let (d, err) = gaussian_wave_direct(&s, &cfg, r, 32).unwrap();
            assert!((c - d).norm() < 1e-5 * c.norm(), "{r:?} {e}: {c} vs {d} ({err:e})");
            assert!(err < 1e-5 * c.norm());
        }
    }

    #[test]
    fn contour_joins_the_virtual_source_form() {
        // just inside 9a the contour runs; the shifted point form must agree
        let cfg = FieldConfig::uniform(0.5, [0.0, 0.0, 1.0]);
        let s = SourceSpec::gaussian([0.0; 3], one(), 0.3, 2.0);
        let r = [0.0, 0.0, 2.6];
        let contour = gaussian_wave(&s, &cfg, r).unwrap().0;
        let (rv, log_c, _) = gaussian_shift(&s, &cfg);
        let shifted = green(&GreenRequest::new(cfg, r, rv, 2.0)).unwrap().value * log_c.exp();
        assert!((contour - shifted).norm() < 1e-8 * contour.norm());
    }

    #[test]
    fn narrow_gaussian_matches_point_source() {
        let cfg = FieldConfig::uniform(0.5, [0.0, 0.0, 1.0]);
        let grid = Grid::spanning([-1.0, 0.0, 0.5], [1.0, 0.0, 2.5], [5, 1, 5]).unwrap();
        let p = scatter_wave(&SourceSpec::point([0.0; 3], one(), 1.0), &cfg, &grid).unwrap();
        let g = scatter_wave(&SourceSpec::gaussian([0.0; 3], one(), 1e-3, 1.0), &cfg, &grid).unwrap();
        for (a, b) in p.values.iter().zip(&g.values) {
            assert!((a - b).norm() < 1e-4 * a.norm());
        }
    }

    #[test]
    fn point_wave_ratio_and_standoff() {
        let cfg = FieldConfig::free(1.0);
        let s = SourceSpec::point([0.0; 3], one(), 0.8);
        let w1 = wave_at(&s, &cfg, [1.0, 0.0, 0.0]).unwrap().0;
        let w2 = wave_at(&s, &cfg, [0.0, 2.0, 0.0]).unwrap().0;
        assert!((w1.norm() / w2.norm() - 2.0).abs() < 1e-9);
        let grid = Grid::spanning([-1.0, -1.0, 0.0], [1.0, 1.0, 0.0], [5, 5, 1]).unwrap();
        assert!(matches!(scatter_wave(&s, &cfg, &grid), Err(Error::InsideStandoff { .. })));
    }

    #[test]
    fn linearity_and_superposition() {
        let cfg = FieldConfig::uniform(0.5, [0.0, 0.0, 1.0]);
        let grid = Grid::spanning([-1.0, 0.0, 1.0], [1.0, 0.0, 3.0], [3, 1, 3]).unwrap();
        let s = SourceSpec::gaussian([0.0; 3], one(), 0.4, 1.0);
        let c = Complex64::new(-0.3, 2.0);
        let a = scatter_wave(&s, &cfg, &grid).unwrap();
        let b = scatter_wave(&SourceSpec { strength: c, ..s }, &cfg, &grid).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x * c - y).norm() <= 1e-14 * y.norm());
        }
        let t = SourceSpec::point([0.5, 0.0, -2.0], one(), 1.0);
        let w = scatter_wave(&t, &cfg, &grid).unwrap();
        for idx in 0..grid.len() {
            let p = grid.point_at(idx);
            let sum = wave_at(&s, &cfg, p).unwrap().0 + wave_at(&t, &cfg, p).unwrap().0;
            assert!((a.values[idx] + w.values[idx] - sum).norm() <= 1e-10 * sum.norm());
        }
    }

    #[test]
    fn virtual_source_limits() {
        let cfg = FieldConfig::uniform(0.5, [0.0, 0.0, 1.0]);
        let tiny = virtual_point_source(&SourceSpec::gaussian([0.0; 3], one(), 1e-6, 2.0), &cfg).unwrap();
        assert!(norm(tiny.shift) < 1e-20 && (tiny.effective_energy - 2.0).abs() < 1e-20);
        let mut last = f64::INFINITY;
        for a in [0.3, 0.6, 1.2, 3.0] {
            let v = virtual_point_source(&SourceSpec::gaussian([0.0; 3], one(), a, 2.0), &cfg).unwrap();
            assert!(v.shift[2] < 0.0 && v.effective_energy < last);
            last = v.effective_energy;
        }
        let s = SourceSpec::gaussian([0.0; 3], one(), 0.5, 2.0);
        let v = virtual_point_source(&s, &cfg).unwrap();
        assert!(matches!(v.wave([0.0, 0.0, 3.0]), Err(Error::OutsideFarField { .. })));
        let r = [2.0, 0.0, 12.0];
        let full = gaussian_wave(&s, &cfg, r).unwrap().0;
        assert!((v.wave(r).unwrap() - full).norm() < 1e-10 * full.norm());
    }
}
