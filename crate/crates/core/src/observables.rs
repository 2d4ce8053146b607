//! Current density, total current, continuity check and density of states.
//!
//! `j = Im(psi* grad psi) / m - (qA / m) |psi|^2` (hbar = 1) and
//! `div j = -2 Im(sigma* psi)`; integrating the latter over a volume that
//! contains the source gives the emitted current `J = -2 Im <sigma|G|sigma>`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{add, cross, dist, dot, norm, scale, sub, Grid, Vec3};
use crate::greens::{g_field_coincidence_im, g_free_coincidence_im_broadened, landau_coincidence_im};
use crate::propagators::{kernel_parts, FieldConfig};
use crate::quad::{adaptive, gauss_hermite, gauss_legendre, semi_infinite, Tolerance};
use crate::sources::{sigma_eval, wave_at, SourceKind, SourceSpec, WaveGrid};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest accepted relative gap between 2nd- and 4th-order currents.
pub const COARSE_LIMIT: f64 = 0.05;

fn d4(fm2: Complex64, fm1: Complex64, fp1: Complex64, fp2: Complex64, h: f64) -> Complex64 {
    (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h)
}

fn d2(fm1: Complex64, fp1: Complex64, h: f64) -> Complex64 {
    (fp1 - fm1) / (2.0 * h)
}

fn current_from(psi: Complex64, grad: [Complex64; 3], cfg: &FieldConfig, r: Vec3) -> Vec3 {
    let qa = cfg.q_vector_potential(r);
    let rho = psi.norm_sqr();
    let m = cfg.mass;
    let mut j = [0.0; 3];
    for a in 0..3 {
        j[a] = (psi.conj() * grad[a]).im / m;
        if cfg.has_magnetic() {
            j[a] -= qa[a] * rho / m;
        }
    }
    j
}

/// Current density on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentField {
    pub grid: Grid,
    pub j: Vec<Vec3>,
    /// False in the two-point boundary layer where the stencil does not fit.
    pub valid: Vec<bool>,
    /// Axes with enough points for derivatives; other components are zero.
    pub active: [bool; 3],
    /// Relative gap between 2nd- and 4th-order currents.
    pub order_mismatch: f64,
}

/// A scalar sample field on a grid with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

impl ScalarField {
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.valid)
            .filter(|(_, &v)| v)
            .map(|(x, _)| x.abs())
            .fold(0.0, f64::max)
    }
}

impl CurrentField {
    pub fn max_norm(&self) -> f64 {
        self.j
            .iter()
            .zip(&self.valid)
            .filter(|(_, &v)| v)
            .map(|(j, _)| norm(*j))
            .fold(0.0, f64::max)
    }

    /// Tricubic Lagrange interpolation of j; fails outside the valid block.
    pub fn interpolate(&self, r: Vec3) -> Result<Vec3> {
        let g = &self.grid;
        let mut base = [0usize; 3];
        let mut weights = [[0.0; 4]; 3];
        for a in 0..3 {
            if !self.active[a] {
                return Err(Error::SurfaceOutsideGrid(format!("axis {a} has no extent")));
            }
            let x = (r[a] - g.origin[a]) / g.spacing[a];
            let i0 = x.floor() as isize - 1;
            if i0 < 2 || i0 + 3 > g.shape[a] as isize - 3 {
                return Err(Error::SurfaceOutsideGrid(format!("{r:?} leaves the interior along axis {a}")));
            }
            base[a] = i0 as usize;
            let t = x - i0 as f64;
            for (k, w) in weights[a].iter_mut().enumerate() {
                *w = (0..4)
                    .filter(|&l| l != k)
                    .map(|l| (t - l as f64) / (k as f64 - l as f64))
                    .product();
            }
        }
        let mut out = [0.0; 3];
        for (p, wx) in weights[0].iter().enumerate() {
            for (q, wy) in weights[1].iter().enumerate() {
                for (s, wz) in weights[2].iter().enumerate() {
                    let idx = g.index(base[0] + p, base[1] + q, base[2] + s);
                    out = add(out, scale(self.j[idx], wx * wy * wz));
                }
            }
        }
        Ok(out)
    }
}

/// j from 4th-order central differences of the sampled wave.
///
/// Points within four spacings of a point source are left out of the
/// 2nd-vs-4th-order comparison, since the wave is singular there.
pub fn current_density(w: &WaveGrid) -> Result<CurrentField> {
    let g = w.grid;
    if w.values.len() != g.len() {
        return Err(Error::GridMismatch("sample count differs from grid size".into()));
    }
    let active = [g.shape[0] >= 5, g.shape[1] >= 5, g.shape[2] >= 5];
    if !active.iter().any(|&a| a) {
        return Err(Error::InvalidInput("current density needs an axis with at least 5 points".into()));
    }
    let cfg = w.field;
    let exclusion = match w.source.kind {
        SourceKind::Point => 4.0 * g.min_spacing(),
        SourceKind::Gaussian => 0.0,
    };
    let rows: Vec<(Vec3, bool, f64, f64)> = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let ijk = g.unravel(idx);
            let r = g.point(ijk);
            let inside = (0..3).all(|a| !active[a] || (ijk[a] >= 2 && ijk[a] + 2 < g.shape[a]));
            if !inside {
                return ([0.0; 3], false, 0.0, 0.0);
            }
            let at = |a: usize, o: isize| {
                let mut p = ijk;
                p[a] = (p[a] as isize + o) as usize;
                w.values[g.index(p[0], p[1], p[2])]
            };
            let mut grad4 = [Complex64::new(0.0, 0.0); 3];
            let mut grad2 = grad4;
            for a in 0..3 {
                if active[a] {
                    let h = g.spacing[a];
                    grad4[a] = d4(at(a, -2), at(a, -1), at(a, 1), at(a, 2), h);
                    grad2[a] = d2(at(a, -1), at(a, 1), h);
                }
            }
            let psi = w.values[idx];
            let j4 = current_from(psi, grad4, &cfg, r);
            let j2 = current_from(psi, grad2, &cfg, r);
            let compared = dist(r, w.source.position) >= exclusion;
            let gap = if compared { norm(sub(j4, j2)) } else { 0.0 };
            let size = if compared { norm(j4) } else { 0.0 };
            (j4, true, gap, size)
        })
        .collect();
    let max_gap = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let max_j = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    let order_mismatch = if max_j > 0.0 { max_gap / max_j } else { 0.0 };
    if order_mismatch > COARSE_LIMIT {
        return Err(Error::GridTooCoarse {
            mismatch: order_mismatch,
        });
    }
    Ok(CurrentField {
        grid: g,
        j: rows.iter().map(|r| r.0).collect(),
        valid: rows.iter().map(|r| r.1).collect(),
        active,
        order_mismatch,
    })
}

/// `div j + 2 Im(sigma* psi)` on the interior of a 3D grid; zero up to
/// discretisation error wherever the continuity equation holds.
pub fn continuity_residual(w: &WaveGrid, c: &CurrentField, s: &SourceSpec) -> Result<ScalarField> {
    if w.grid != c.grid || w.values.len() != c.j.len() {
        return Err(Error::GridMismatch("wave and current grids differ".into()));
    }
    if !c.active.iter().all(|&a| a) || c.grid.shape.iter().any(|&n| n < 9) {
        return Err(Error::InvalidInput("continuity residual needs a 3D grid with 9+ points per axis".into()));
    }
    let g = c.grid;
    let rows: Vec<(f64, bool)> = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let ijk = g.unravel(idx);
            if (0..3).any(|a| ijk[a] < 4 || ijk[a] + 4 >= g.shape[a]) {
                return Ok((0.0, false));
            }
            let mut div = 0.0;
            for a in 0..3 {
                let comp = |o: isize| {
                    let mut p = ijk;
                    p[a] = (p[a] as isize + o) as usize;
                    Complex64::new(c.j[g.index(p[0], p[1], p[2])][a], 0.0)
                };
                div += d4(comp(-2), comp(-1), comp(1), comp(2), g.spacing[a]).re;
            }
            let source = match s.kind {
                SourceKind::Point => 0.0,
                SourceKind::Gaussian => 2.0 * (sigma_eval(s, g.point(ijk))?.conj() * w.values[idx]).im,
            };
            Ok((div + source, true))
        })
        .collect::<Result<_>>()?;
    Ok(ScalarField {
        grid: g,
        values: rows.iter().map(|r| r.0).collect(),
        valid: rows.iter().map(|r| r.1).collect(),
    })
}

/// Default finite-difference step for pointwise currents.
pub fn default_step(s: &SourceSpec, cfg: &FieldConfig, r: Vec3) -> f64 {
    let local = s.energy + dot(cfg.force, r);
    let k = (2.0 * cfg.mass * local.abs().max(s.energy.abs())).sqrt().max(1e-3);
    (0.02 / k).min(0.02 * dist(r, s.position).max(s.width))
}

/// j at one point from 4th-order differences of the directly evaluated wave.
pub fn current_at(s: &SourceSpec, cfg: &FieldConfig, r: Vec3, h: f64) -> Result<Vec3> {
    let psi = |p: Vec3| wave_at(s, cfg, p).map(|v| v.0);
    let mut grad = [Complex64::new(0.0, 0.0); 3];
    for (a, g) in grad.iter_mut().enumerate() {
        let shifted = |o: f64| {
            let mut p = r;
            p[a] += o * h;
            psi(p)
        };
        *g = d4(shifted(-2.0)?, shifted(-1.0)?, shifted(1.0)?, shifted(2.0)?, h);
    }
    Ok(current_from(psi(r)?, grad, cfg, r))
}

/// Closed surfaces and rectangles for flux integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surface {
    Sphere { center: Vec3, radius: f64 },
    /// Parallelogram `origin + s u + t v`, `s, t` in [0, 1], normal `u x v`.
    Rectangle { origin: Vec3, u: Vec3, v: Vec3 },
}

/// Anything that can report j at a point.
pub trait CurrentProvider: Sync {
    fn current(&self, r: Vec3) -> Result<Vec3>;
}

impl CurrentProvider for CurrentField {
    fn current(&self, r: Vec3) -> Result<Vec3> {
        self.interpolate(r)
    }
}

/// Current evaluated pointwise from a source.
pub struct PointwiseCurrent {
    pub source: SourceSpec,
    pub field: FieldConfig,
}

impl CurrentProvider for PointwiseCurrent {
    fn current(&self, r: Vec3) -> Result<Vec3> {
        current_at(&self.source, &self.field, r, default_step(&self.source, &self.field, r))
    }
}

fn surface_rule(surface: &Surface, n: usize) -> Vec<(Vec3, Vec3)> {
    let gl = gauss_legendre(n);
    let mut nodes = Vec::new();
    match *surface {
        Surface::Sphere { center, radius } => {
            let n_phi = 2 * n;
            for &(c, wc) in gl.iter() {
                let s = (1.0 - c * c).sqrt();
                for k in 0..n_phi {
                    let phi = 2.0 * PI * (k as f64 + 0.5) / n_phi as f64;
                    let nhat = [s * phi.cos(), s * phi.sin(), c];
                    let w = wc * 2.0 * PI / n_phi as f64 * radius * radius;
                    nodes.push((add(center, scale(nhat, radius)), scale(nhat, w)));
                }
            }
        }
        Surface::Rectangle { origin, u, v } => {
            let area_normal = cross(u, v);
            for &(x, wx) in gl.iter() {
                for &(y, wy) in gl.iter() {
                    let p = add(origin, add(scale(u, 0.5 * (x + 1.0)), scale(v, 0.5 * (y + 1.0))));
                    nodes.push((p, scale(area_normal, 0.25 * wx * wy)));
                }
            }
        }
    }
    nodes
}

/// Flux result with the rule order that met the tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flux {
    pub value: f64,
    /// Integral of |j| over the surface, the scale for a near-zero flux.
    pub absolute: f64,
    pub nodes: usize,
    pub change: f64,
}

/// `int j . n dA`, doubling the rule until the change is below `1e-5`
/// relative to `int |j| dA`.
pub fn flux_through_surface<P: CurrentProvider + ?Sized>(c: &P, surface: &Surface) -> Result<Flux> {
    let eval = |n: usize| -> Result<(f64, f64, usize)> {
        let nodes = surface_rule(surface, n);
        let parts: Vec<(f64, f64)> = nodes
            .par_iter()
            .map(|(p, w)| c.current(*p).map(|j| (dot(j, *w), norm(j) * norm(*w))))
            .collect::<Result<_>>()?;
        let total = crate::quad::pairwise_sum(&parts.iter().map(|x| x.0).collect::<Vec<_>>());
        let abs = crate::quad::pairwise_sum(&parts.iter().map(|x| x.1).collect::<Vec<_>>());
        Ok((total, abs, nodes.len()))
    };
    let mut n = 8;
    let mut prev = eval(n)?;
    loop {
        n *= 2;
        let next = eval(n)?;
        let change = (next.0 - prev.0).abs();
        if change <= 1e-5 * next.1 || n >= 256 {
            if change > 1e-5 * next.1 {
                return Err(Error::NonConvergence {
                    what: "surface flux",
                    value: Complex64::new(next.0, 0.0),
                    est_error: change,
                });
            }
            return Ok(Flux {
                value: next.0,
                absolute: next.1,
                nodes: next.2,
                change,
            });
        }
        prev = next;
    }
}

/// Emitted current `J = -2 Im <sigma|G|sigma>`.
///
/// Point sources use the coincidence limit of Im G (with broadening `eta`
/// for Landau levels without a longitudinal force). A Gaussian source folds
/// both source factors into the kernel at `T - 2 i alpha`.
pub fn total_current(s: &SourceSpec, cfg: &FieldConfig, eta: f64) -> Result<f64> {
    s.validate()?;
    cfg.validate()?;
    let s2 = s.strength.norm_sqr();
    match s.kind {
        SourceKind::Point => Ok(-2.0 * s2 * coincidence_im(cfg, s.position, s.energy, eta)?),
        SourceKind::Gaussian => {
            if cfg.has_magnetic() {
                return Err(Error::Unsupported("Gaussian total current in a magnetic field".into()));
            }
            Ok(-2.0 * s2 * gaussian_overlap(s, cfg)?.im)
        }
    }
}

fn coincidence_im(cfg: &FieldConfig, r: Vec3, e: f64, eta: f64) -> Result<f64> {
    if cfg.has_magnetic() {
        landau_coincidence_im(cfg, r, e, eta)
    } else if cfg.force == [0.0; 3] {
        Ok(g_free_coincidence_im_broadened(cfg.mass, e, eta))
    } else {
        g_field_coincidence_im(cfg, r, e)
    }
}

/// `<sigma|G|sigma> / |s|^2` for a Gaussian source.
fn gaussian_overlap(s: &SourceSpec, cfg: &FieldConfig) -> Result<Complex64> {
    let m = cfg.mass;
    let alpha = m * s.width * s.width;
    let f = cfg.force;
    let f2 = dot(f, f);
    let rv = sub(s.position, scale(f, alpha * alpha / (2.0 * m)));
    let log_c2 = 2.0 * (-s.energy * alpha - alpha * dot(f, s.position) + alpha.powi(3) * f2 / (3.0 * m));
    let e = s.energy;
    let integrand = |t: Complex64| {
        let (pre, exponent) = kernel_parts(cfg, rv, rv, t);
        let v = -I * pre * (exponent + I * e * t + log_c2).exp();
        if v.is_finite() {
            v
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let start = Complex64::new(0.0, -2.0 * alpha);
    let tol = Tolerance::new(1e-300, 1e-11);
    let linear = e + dot(f, rv);
    let (pieces, time): (Vec<(Complex64, Complex64, bool)>, f64) = if f2 > 0.0 {
        let mut theta = PI / 6.0;
        if linear > 0.0 {
            let s_star = (8.0 * m * linear / (3.0 * f2)).sqrt();
            theta = theta.min((3.0 / (2.0 / 3.0 * linear * s_star)).min(1.0).asin());
        }
        (vec![(start, Complex64::from_polar(1.0, -theta), true)], (24.0 * m * m / f2).cbrt().max(alpha))
    } else if e > 0.0 {
        let tc = 2.0 * alpha;
        let tan = (3.0 / (e * tc)).min(1.0);
        (
            vec![
                (start, Complex64::new(tc, 0.0), false),
                (Complex64::new(tc, 0.0), Complex64::from_polar(1.0, tan.atan()), true),
            ],
            tc.max(1.0 / e),
        )
    } else {
        (vec![(start, Complex64::new(0.0, -1.0), true)], alpha.max(1.0 / e.abs().max(1e-300)).min(1e6))
    };
    let mut value = Complex64::new(0.0, 0.0);
    for (a, b, ray) in pieces {
        let part = if ray {
            semi_infinite(&|u: f64| integrand(a + b * u) * b, 0.0, 0.25 * time, tol)
        } else {
            let dir = b - a;
            adaptive(&|u: f64| integrand(a + dir * u) * dir, 0.0, 1.0, tol)
        };
        value += part.into_result("Gaussian total current")?.value;
    }
    Ok(value)
}

/// `-2 int Im(sigma* psi) d^3r`, the source term of the continuity
/// equation integrated over all space.
///
/// Gaussian sources use a Gauss-Hermite product rule with `n` nodes per
/// axis. For a point source the integral reduces to `-2 Im(s* psi(r0))`,
/// taken as the limit of off-source samples (the real part diverges, the
/// imaginary part does not).
pub fn volume_source_current(s: &SourceSpec, cfg: &FieldConfig, n: usize) -> Result<f64> {
    s.validate()?;
    match s.kind {
        SourceKind::Point => {
            let im = |d: f64| -> Result<f64> {
                let p = add(s.position, [0.6 * d, 0.0, 0.8 * d]);
                Ok((s.strength.conj() * wave_at(s, cfg, p)?.0).im)
            };
            let (a, b) = (im(2e-3)?, im(1e-3)?);
            Ok(-2.0 * (4.0 * b - a) / 3.0)
        }
        SourceKind::Gaussian => {
            let gh = gauss_hermite(n);
            let h = 2f64.sqrt() * s.width;
            let mut nodes = Vec::with_capacity(n * n * n);
            for &(x, wx) in gh.iter() {
                for &(y, wy) in gh.iter() {
                    for &(z, wz) in gh.iter() {
                        nodes.push(([x, y, z], wx * wy * wz));
                    }
                }
            }
            // sigma = s exp(-t^2) / (pi^{3/2} h^3) at r0 + h t; the weight
            // supplies exp(-t^2) and the Jacobian h^3 cancels
            let parts: Vec<f64> = nodes
                .par_iter()
                .map(|(t, w)| {
                    let p = add(s.position, scale(*t, h));
                    let psi = wave_at(s, cfg, p)?.0;
                    Ok(w * (s.strength.conj() * psi).im)
                })
                .collect::<Result<_>>()?;
            Ok(-2.0 * crate::quad::pairwise_sum(&parts) / PI.powf(1.5))
        }
    }
}

/// A sampled spectrum; `eta` is the broadening actually applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
    pub eta: f64,
}

impl Spectrum {
    pub fn new(energies: Vec<f64>, values: Vec<f64>, eta: f64) -> Result<Self> {
        if energies.len() != values.len() {
            return Err(Error::InvalidInput("energies and values differ in length".into()));
        }
        if energies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("energies must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("spectrum values"));
        }
        Ok(Spectrum { energies, values, eta })
    }
}

/// Local density of states `n(r; E) = -Im G(r, r; E) / pi` over a sweep.
///
/// `eta` broadens the free continuum and Landau levels without a
/// longitudinal force; Airy continua are evaluated at real energy and the
/// returned spectrum then reports `eta = 0`.
pub fn dos(r: Vec3, energies: &[f64], cfg: &FieldConfig, eta: f64) -> Result<Spectrum> {
    cfg.validate()?;
    if !(eta >= 0.0) {
        return Err(Error::InvalidInput(format!("eta must be >= 0, got {eta}")));
    }
    let values = energies
        .par_iter()
        .map(|&e| coincidence_im(cfg, r, e, eta).map(|im| (-im / PI).max(0.0)))
        .collect::<Result<Vec<_>>>()?;
    let applied = if cfg.force[2] != 0.0 || (!cfg.has_magnetic() && cfg.force != [0.0; 3]) {
        0.0
    } else {
        eta
    };
    Spectrum::new(energies.to_vec(), values, applied)
}

/// A local maximum of a spectrum with its full width at half height above
/// the preceding minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub center: f64,
    pub height: f64,
    pub width: f64,
}

pub fn find_peaks(s: &Spectrum) -> Vec<Peak> {
    let (e, v) = (&s.energies, &s.values);
    let mut peaks = Vec::new();
    let mut floor_idx = 0;
    for i in 1..v.len().saturating_sub(1) {
        if v[i] < v[i - 1] && v[i] <= v[i + 1] {
            floor_idx = i;
        }
        if !(v[i] > v[i - 1] && v[i] >= v[i + 1]) {
            continue;
        }
        // parabolic refinement of the centre
        let (a, b, c) = (v[i - 1], v[i], v[i + 1]);
        let denom = a - 2.0 * b + c;
        let offset = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
        let center = e[i] + offset * (e[i + 1] - e[i - 1]) / 2.0;
        let base = v[floor_idx.min(i)];
        let half = base + 0.5 * (b - base);
        let mut lo = i;
        while lo > floor_idx && v[lo] > half {
            lo -= 1;
        }
        let mut hi = i;
        while hi + 1 < v.len() && v[hi] > half && !(v[hi] < v[hi + 1] && hi > i) {
            hi += 1;
        }
        let cross = |j: usize, k: usize| {
            if v[k] == v[j] {
                e[j]
            } else {
                e[j] + (half - v[j]) * (e[k] - e[j]) / (v[k] - v[j])
            }
        };
        let left = if v[lo] <= half { cross(lo, lo + 1) } else { e[lo] };
        let right = if v[hi] <= half { cross(hi - 1, hi) } else { e[hi] };
        peaks.push(Peak {
            center,
            height: b,
            width: right - left,
        });
    }
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scales::ScaleSystem;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn plane_wave_current() {
        let k = 1.3;
        let grid = Grid::spanning([0.0; 3], [1.0, 1.0, 1.0], [9, 9, 201]).unwrap();
        let values = (0..grid.len())
            .map(|i| Complex64::from_polar(1.0, k * grid.point_at(i)[2]))
            .collect();
        let w = WaveGrid {
            grid,
            values,
            max_rel_error: 0.0,
            source: SourceSpec::point([0.0, 0.0, -10.0], one(), 1.0),
            field: FieldConfig::free(1.0),
            scale: ScaleSystem::unit(),
        };
        let c = current_density(&w).unwrap();
        for (j, ok) in c.j.iter().zip(&c.valid) {
            if *ok {
                assert!((j[2] - k).abs() < 1e-8 && j[0].abs() < 1e-12 && j[1].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn point_source_totals() {
        let cfg = FieldConfig::free(1.0);
        let s = SourceSpec::point([0.0; 3], one(), 0.5);
        let j = total_current(&s, &cfg, 0.0).unwrap();
        assert!((j - 1.0 / PI).abs() < 1e-14);
        let below = SourceSpec { energy: -0.5, ..s };
        assert_eq!(total_current(&below, &cfg, 0.0).unwrap(), 0.0);
        let flux = flux_through_surface(
            &PointwiseCurrent { source: s, field: cfg },
            &Surface::Sphere {
                center: [0.0; 3],
                radius: 2.0,
            },
        )
        .unwrap();
        assert!((flux.value - 1.0 / PI).abs() < 1e-6, "{}", flux.value);
        let vol = volume_source_current(&s, &cfg, 0).unwrap();
        assert!((vol - 1.0 / PI).abs() < 1e-6, "{vol}");
    }

    #[test]
    fn gaussian_total_current_free_closed_form() {
        let cfg = FieldConfig::free(1.0);
        let (a, e) = (0.3, 1.2);
        let s = SourceSpec::gaussian([0.0; 3], Complex64::new(0.6, 0.8), a, e);
        let k = (2.0 * e).sqrt();
        let want = k / PI * (-k * k * a * a).exp();
        assert!((total_current(&s, &cfg, 0.0).unwrap() - want).abs() < 1e-10 * want);
        let narrow = SourceSpec { width: 1e-3, ..s };
        let point = SourceSpec::point([0.0; 3], s.strength, e);
        let ratio = total_current(&narrow, &cfg, 0.0).unwrap() / total_current(&point, &cfg, 0.0).unwrap();
        assert!((ratio - 1.0).abs() < 1e-3);
    }

    #[test]
    fn gaussian_triangle_in_field() {
        let cfg = FieldConfig::uniform(0.5, [0.0, 0.0, 1.0]);
        let s = SourceSpec::gaussian([0.0; 3], one(), 0.5, 1.0);
        let j = total_current(&s, &cfg, 0.0).unwrap();
        let vol = volume_source_current(&s, &cfg, 20).unwrap();
        let flux = flux_through_surface(
            &PointwiseCurrent { source: s, field: cfg },
            &Surface::Sphere {
                center: [0.0; 3],
                radius: 5.0,
            },
        )
        .unwrap();
        assert!((vol / j - 1.0).abs() < 1e-4, "{vol} {j}");
        assert!((flux.value / j - 1.0).abs() < 1e-4, "{} {j}", flux.value);
    }

    #[test]
    fn non_enclosing_plane_has_no_flux() {
        // a plane through the source cuts the outgoing flux in half; a
        // rectangle edge-on to the radial flow carries none
        let cfg = FieldConfig::free(1.0);
        let s = SourceSpec::point([0.0; 3], one(), 0.5);
        let p = PointwiseCurrent { source: s, field: cfg };
        let edge_on = Surface::Rectangle {
            origin: [0.5, -1.0, 0.0],
            u: [2.0, 0.0, 0.0],
            v: [0.0, 2.0, 0.0],
        };
        let f = flux_through_surface(&p, &edge_on).unwrap();
        assert!(f.value.abs() < 1e-6 / PI, "{}", f.value);
    }

    #[test]
    fn free_dos_slope_and_positivity() {
        let energies: Vec<f64> = (0..40).map(|i| 0.1 * 100f64.powf(i as f64 / 39.0)).collect();
        let s = dos([0.0; 3], &energies, &FieldConfig::free(1.0), 0.0).unwrap();
        let slope = (s.values[39] / s.values[0]).ln() / (energies[39] / energies[0]).ln();
        assert!((slope - 0.5).abs() < 1e-10);
        assert!(s.values.iter().all(|&v| v >= 0.0));
        assert_eq!(s.eta, 0.0);
    }

    #[test]
    fn peaks_of_a_lorentzian_pair() {
        let energies: Vec<f64> = (0..2001).map(|i| i as f64 * 0.002).collect();
        let lor = |e: f64, c: f64, g: f64| g * g / ((e - c).powi(2) + g * g);
        let values = energies.iter().map(|&e| lor(e, 1.0, 0.02) + lor(e, 3.0, 0.05)).collect();
        let p = find_peaks(&Spectrum::new(energies, values, 0.0).unwrap());
        assert_eq!(p.len(), 2);
        assert!((p[0].center - 1.0).abs() < 1e-4 && (p[0].width - 0.04).abs() < 2e-3);
        assert!((p[1].center - 3.0).abs() < 1e-4 && (p[1].width - 0.1).abs() < 5e-3);
    }
}
