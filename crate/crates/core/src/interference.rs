//! Two-path interference: point-aperture double slits and the field-induced
//! double slit of a source in a uniform force.
//!
//! A particle that starts at the source and reaches `r` in a uniform force
//! does so along two parabolas (one directly, one after rising against the
//! force) wherever `2 (E + F.r/2) > F |r|`. The flight times are stationary
//! points of `Phi(T) = m d^2 / 2T + (E + F.r/2) T - F^2 T^3 / 24m`, which is
//! a quadratic in `T^2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{cross, dist, dot, Vec3};
use crate::greens::{g_free_complex, GreenRequest};
use crate::propagators::{kernel_c, FieldConfig};
use crate::quad::{adaptive, semi_infinite, Tolerance};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Two point apertures between a source and a detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitConfig {
    pub source: Vec3,
    pub holes: [Vec3; 2],
    /// Masking a hole removes its path.
    pub open: [bool; 2],
    pub mass: f64,
}

impl SlitConfig {
    pub fn new(source: Vec3, holes: [Vec3; 2], mass: f64) -> Self {
        SlitConfig {
            source,
            holes,
            open: [true, true],
            mass,
        }
    }

    pub fn holes_coincide(&self) -> bool {
        self.holes[0] == self.holes[1]
    }
}

fn g_at(mass: f64, a: Vec3, b: Vec3, energy: Complex64) -> Result<Complex64> {
    let d = dist(a, b);
    if d == 0.0 {
        return Err(Error::Coincident);
    }
    Ok(g_free_complex(mass, d, energy))
}

/// `i sum_i G(r_B, r_Hi) G(r_Hi, r_A)` over the open holes.
pub fn g_slit(cfg: &SlitConfig, detector: Vec3, energy: f64) -> Result<Complex64> {
    g_slit_complex(cfg, detector, Complex64::new(energy, 0.0))
}

pub fn g_slit_complex(cfg: &SlitConfig, detector: Vec3, energy: Complex64) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for (hole, open) in cfg.holes.iter().zip(cfg.open) {
        if open {
            sum += g_at(cfg.mass, detector, *hole, energy)? * g_at(cfg.mass, *hole, cfg.source, energy)?;
        }
    }
    Ok(I * sum)
}

/// The same quantity from the time domain: the Laplace transform of the
/// kernel composition `int_0^T dt K(B, T - t | H) K(H, t | A)`, integrated
/// over both times on a ray `T = s exp(-i theta)` with `tan theta = eta / 2E`.
pub fn g_slit_time_domain(cfg: &SlitConfig, detector: Vec3, energy: f64, eta: f64) -> Result<Complex64> {
    if !(eta > 0.0) {
        return Err(Error::InvalidInput("time-domain check needs eta > 0".into()));
    }
    let free = FieldConfig::free(cfg.mass);
    let e = Complex64::new(energy, eta);
    let theta = if energy > 0.0 { (0.5 * eta / energy).atan() } else { PI / 4.0 };
    let dir = Complex64::from_polar(1.0, -theta);
    let tol = Tolerance::new(1e-300, 1e-9);
    let mut total = Complex64::new(0.0, 0.0);
    for (hole, open) in cfg.holes.iter().zip(cfg.open) {
        if !open {
            continue;
        }
        let composed = |s: f64| -> Complex64 {
            if s == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let t_total = dir * s;
            let inner = adaptive(
                &|l: f64| {
                    kernel_c(&free, detector, *hole, t_total * (1.0 - l)) * kernel_c(&free, *hole, cfg.source, t_total * l)
                },
                0.0,
                1.0,
                tol,
            );
            inner.value * t_total * (I * e * t_total).exp() * dir
        };
        let scale = cfg.mass * (dist(detector, *hole) + dist(*hole, cfg.source)).powi(2) / 2.0;
        let part = semi_infinite(&composed, 0.0, 0.25 * scale.max(1.0 / energy.abs().max(eta)), tol)
            .into_result("time-domain slit composition")?;
        total += part.value;
    }
    // G = -i L[K]; the composition's transform is (iG)(iG)
    Ok(-I * total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathClass {
    TwoReal,
    Degenerate,
    ClassicallyForbidden,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalPaths {
    /// Flight times in ascending order.
    pub times: Vec<f64>,
    /// `Phi(T_i)`: action plus `E T`, in units of hbar.
    pub phases: Vec<f64>,
    /// `Phi''(T_i)`.
    pub curvatures: Vec<f64>,
    pub class: PathClass,
    /// `(4 L^2 - F^2 d^2) / (4 L^2 + F^2 d^2)`: positive inside the
    /// classical region, zero on its boundary.
    pub discriminant: f64,
}

/// Relative band within which two roots count as one.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

struct Kinematics {
    m: f64,
    d2: f64,
    linear: f64,
    f2: f64,
}

impl Kinematics {
    fn phase(&self, t: f64) -> f64 {
        self.m * self.d2 / (2.0 * t) + self.linear * t - self.f2 * t.powi(3) / (24.0 * self.m)
    }
    fn d1(&self, t: f64) -> f64 {
        -self.m * self.d2 / (2.0 * t * t) + self.linear - self.f2 * t * t / (8.0 * self.m)
    }
    fn d2nd(&self, t: f64) -> f64 {
        self.m * self.d2 / t.powi(3) - self.f2 * t / (4.0 * self.m)
    }
}

/// Stationary points of the phase for a detector at `r` relative to the
/// source, with force `force` and mass `mass`.
pub fn classical_times(r: Vec3, energy: f64, force: Vec3, mass: f64) -> Result<ClassicalPaths> {
    let f2 = dot(force, force);
    if !(f2 > 0.0) {
        return Err(Error::InvalidInput("classical times need a nonzero force".into()));
    }
    if !(mass > 0.0) || !energy.is_finite() || !crate::geom::is_finite(r) {
        return Err(Error::InvalidInput("classical times need finite inputs and m > 0".into()));
    }
    let k = Kinematics {
        m: mass,
        d2: dot(r, r),
        linear: energy + 0.5 * dot(force, r),
        f2,
    };
    let a = 4.0 * k.linear * k.linear;
    let b = f2 * k.d2;
    let disc = if a + b > 0.0 { (a - b) / (a + b) } else { 0.0 };
    let empty = |class| ClassicalPaths {
        times: vec![],
        phases: vec![],
        curvatures: vec![],
        class,
        discriminant: disc,
    };
    if k.linear <= 0.0 || disc < -DEGENERACY_TOLERANCE {
        return Ok(empty(PathClass::ClassicallyForbidden));
    }
    // f2 X^2 - 8 m L X + 4 m^2 d^2 = 0, X = T^2; the small root from the
    // product of roots to avoid cancellation
    let m = mass;
    let root = (16.0 * m * m * (a - b).max(0.0)).sqrt();
    let big = (8.0 * m * k.linear + root) / (2.0 * f2);
    let small = if big > 0.0 { 4.0 * m * m * k.d2 / (f2 * big) } else { 0.0 };
    let polish = |mut t: f64| {
        for _ in 0..4 {
            let step = k.d1(t) / k.d2nd(t);
            if !step.is_finite() || step.abs() > 0.1 * t {
                break;
            }
            t -= step;
        }
        t
    };
    let (times, class) = if disc.abs() <= DEGENERACY_TOLERANCE {
        (vec![(0.5 * (small + big)).sqrt()], PathClass::Degenerate)
    } else {
        (vec![polish(small.sqrt()), polish(big.sqrt())], PathClass::TwoReal)
    };
    Ok(ClassicalPaths {
        phases: times.iter().map(|&t| k.phase(t)).collect(),
        curvatures: times.iter().map(|&t| k.d2nd(t)).collect(),
        times,
        class,
        discriminant: disc,
    })
}

/// `Phi(T_long) - Phi(T_short)` in closed form,
/// `2 sqrt(m) (2E - (|F||r| - F.r))^{3/2} / (3|F|)`, which stays accurate far
/// from the source where both phases are huge. NaN outside the allowed region.
pub fn phase_gap(r: Vec3, energy: f64, force: Vec3, mass: f64) -> f64 {
    let f = dot(force, force).sqrt();
    let (d, along) = (dot(r, r).sqrt(), dot(force, r) / f);
    // |F||r| - F.r without cancellation on the axis
    let fr = cross(force, r);
    let off = if along > 0.0 { dot(fr, fr) / (f * (d + along)) } else { f * d - f * along };
    let w = 2.0 * energy - off;
    if w < 0.0 {
        return f64::NAN;
    }
    2.0 * mass.sqrt() * w.powf(1.5) / (3.0 * f)
}

/// Relative stationarity residual `|Phi'(T)| T / (|L| T + m d^2 / 2T)`.
pub fn stationarity_residual(r: Vec3, energy: f64, force: Vec3, mass: f64, t: f64) -> f64 {
    let k = Kinematics {
        m: mass,
        d2: dot(r, r),
        linear: energy + 0.5 * dot(force, r),
        f2: dot(force, force),
    };
    k.d1(t).abs() * t / (k.linear.abs() * t + k.m * k.d2 / (2.0 * t))
}

/// Smallest phase gap between the two paths accepted by the semiclassical
/// formula. Closer to the caustic the stationary points merge and the
/// quadratic approximation around each fails; the normalised discriminant is
/// no guide here because it shrinks like 1/z^2 with detector depth.
pub const CAUSTIC_PHASE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SemiclassicalPattern {
    pub amplitude: Vec<Complex64>,
    pub intensity: Vec<f64>,
    /// `Phi(T_long) - Phi(T_short)` at each point.
    pub phase_difference: Vec<f64>,
    pub fringe_count: usize,
}

/// Two-path stationary-phase approximation of G for a point source at the
/// origin, sampled at `points` (taken as an ordered cut for the fringe count).
pub fn semiclassical_field_pattern(points: &[Vec3], energy: f64, cfg: &FieldConfig) -> Result<SemiclassicalPattern> {
    if cfg.has_magnetic() {
        return Err(Error::Unsupported("semiclassics with a magnetic field".into()));
    }
    let m = cfg.mass;
    let rows: Vec<(Complex64, f64)> = points
        .par_iter()
        .map(|&r| {
            let paths = classical_times(r, energy, cfg.force, m)?;
            let gap = phase_gap(r, energy, cfg.force, m);
            if paths.class != PathClass::TwoReal || !(gap >= CAUSTIC_PHASE) {
                return Err(Error::InvalidInput(format!(
                    "{r:?} is too close to the caustic for stationary phase (discriminant {:.3e})",
                    paths.discriminant
                )));
            }
            let mut amp = Complex64::new(0.0, 0.0);
            for ((t, phi), curv) in paths.times.iter().zip(&paths.phases).zip(&paths.curvatures) {
                let pre = (m / (2.0 * PI * I * t)).powf(1.5);
                let gauss = (2.0 * PI / curv.abs()).sqrt() * Complex64::from_polar(1.0, 0.25 * PI * curv.signum());
                amp += -I * pre * Complex64::from_polar(1.0, *phi) * gauss;
            }
            Ok((amp, gap))
        })
        .collect::<Result<_>>()?;
    let intensity: Vec<f64> = rows.iter().map(|r| r.0.norm_sqr()).collect();
    Ok(SemiclassicalPattern {
        fringe_count: count_maxima(&intensity),
        amplitude: rows.iter().map(|r| r.0).collect(),
        phase_difference: rows.iter().map(|r| r.1).collect(),
        intensity,
    })
}

/// `|r|^2` bound of the classically allowed region at depth `z` along the
/// force: `rho^2 <= 4 E (E + F z) / F^2` for `E > 0`.
pub fn classical_radius_squared(energy: f64, force: f64, depth: f64) -> f64 {
    4.0 * energy * (energy + force * depth) / (force * force)
}

/// `|g_slit|^2` over detector points, normalised to a peak of 1.
pub fn twin_slit_pattern(cfg: &SlitConfig, energy: f64, points: &[Vec3]) -> Result<Vec<f64>> {
    if !(cfg.open[0] || cfg.open[1]) {
        return Err(Error::InvalidInput("both holes are masked".into()));
    }
    if cfg.holes.iter().any(|h| *h == cfg.source) {
        return Err(Error::Coincident);
    }
    let raw: Vec<f64> = points
        .par_iter()
        .map(|&p| g_slit(cfg, p, energy).map(|g| g.norm_sqr()))
        .collect::<Result<_>>()?;
    let peak = raw.iter().cloned().fold(0.0, f64::max);
    Ok(raw.iter().map(|v| v / peak).collect())
}

/// Number of local maxima along an ordered profile; the first sample counts
/// when it exceeds its neighbour (a cut that starts on a symmetry axis).
pub fn count_maxima(profile: &[f64]) -> usize {
    if profile.len() < 2 {
        return 0;
    }
    let mut n = usize::from(profile[0] > profile[1]);
    for w in profile.windows(3) {
        if w[1] > w[0] && w[1] >= w[2] {
            n += 1;
        }
    }
    n
}

/// Positions of the local maxima found by [`count_maxima`].
pub fn maxima_positions(profile: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    if profile.len() >= 2 && profile[0] > profile[1] {
        out.push(0);
    }
    for i in 1..profile.len().saturating_sub(1) {
        if profile[i] > profile[i - 1] && profile[i] >= profile[i + 1] {
            out.push(i);
        }
    }
    out
}

/// Fringe visibility `(I_max - I_min) / (I_max + I_min)` of the first
/// maximum along the profile and the mean of its neighbouring minima;
/// zero when the profile has no interior extremum.
pub fn fringe_visibility(profile: &[f64]) -> f64 {
    let maxima = maxima_positions(profile);
    let minima: Vec<usize> = (1..profile.len().saturating_sub(1))
        .filter(|&i| profile[i] < profile[i - 1] && profile[i] <= profile[i + 1])
        .collect();
    let Some(&peak) = maxima.first() else { return 0.0 };
    let left = minima.iter().rev().find(|&&i| i < peak);
    let right = minima.iter().find(|&&i| i > peak);
    let low = match (left, right) {
        (Some(&a), Some(&b)) => 0.5 * (profile[a] + profile[b]),
        (Some(&a), None) => profile[a],
        (None, Some(&b)) => profile[b],
        (None, None) => return 0.0,
    };
    let high = profile[peak];
    if high + low > 0.0 {
        (high - low) / (high + low)
    } else {
        0.0
    }
}

/// [`fringe_visibility`] of a continuous profile on `[lo, hi]`: extrema are
/// located on `samples` equidistant points and then polished by golden-section
/// search, so the result does not depend on where the samples fall.
pub fn refined_visibility<F>(profile: F, lo: f64, hi: f64, samples: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if samples < 3 || !(hi > lo) {
        return Err(Error::InvalidInput("refined visibility needs 3+ samples on a proper interval".into()));
    }
    let h = (hi - lo) / (samples - 1) as f64;
    let xs: Vec<f64> = (0..samples).map(|i| lo + h * i as f64).collect();
    let p: Vec<f64> = xs.par_iter().map(|&x| profile(x)).collect::<Result<_>>()?;
    let Some(&peak) = maxima_positions(&p).first() else { return Ok(0.0) };
    let minima: Vec<usize> = (1..samples - 1)
        .filter(|&i| p[i] < p[i - 1] && p[i] <= p[i + 1])
        .collect();
    let polish = |i: usize, sign: f64| -> Result<f64> {
        if i == 0 || i == samples - 1 {
            return Ok(p[i]);
        }
        golden_extremum(&profile, xs[i - 1], xs[i + 1], sign)
    };
    let high = polish(peak, 1.0)?;
    let left = minima.iter().rev().find(|&&i| i < peak);
    let right = minima.iter().find(|&&i| i > peak);
    let low = match (left, right) {
        (Some(&a), Some(&b)) => 0.5 * (polish(a, -1.0)? + polish(b, -1.0)?),
        (Some(&a), None) => polish(a, -1.0)?,
        (None, Some(&b)) => polish(b, -1.0)?,
        (None, None) => return Ok(0.0),
    };
    Ok(if high + low > 0.0 { (high - low) / (high + low) } else { 0.0 })
}

/// Value at the maximum (`sign = 1`) or minimum (`sign = -1`) inside a bracket.
fn golden_extremum<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64, sign: f64) -> Result<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (sign * f(c)?, sign * f(d)?);
    while (b - a).abs() > 1e-10 * (a.abs() + b.abs()).max(1e-300) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sign * f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sign * f(d)?;
        }
    }
    Ok(sign * fc.max(fd))
}

/// Exact intensity `|G|^2` from the Green-function dispatcher along a cut,
/// for a point source at the origin.
pub fn exact_intensity(points: &[Vec3], energy: f64, cfg: &FieldConfig) -> Result<Vec<f64>> {
    points
        .par_iter()
        .map(|&r| crate::greens::green(&GreenRequest::new(*cfg, r, [0.0; 3], energy)).map(|g| g.value.norm_sqr()))
        .collect()
}

/// Action of the classical parabola from the origin to `r` in time `t`,
/// plus `E t`, by Gauss-Kronrod quadrature of the Lagrangian. Used to check
/// the closed-form phase.
pub fn integrated_phase(r: Vec3, energy: f64, force: Vec3, mass: f64, t: f64) -> f64 {
    let v0: Vec3 = std::array::from_fn(|a| r[a] / t - force[a] * t / (2.0 * mass));
    let lagrangian = |s: f64| {
        let v: Vec3 = std::array::from_fn(|a| v0[a] + force[a] * s / mass);
        let x: Vec3 = std::array::from_fn(|a| v0[a] * s + force[a] * s * s / (2.0 * mass));
        Complex64::new(0.5 * mass * dot(v, v) + dot(force, x), 0.0)
    };
    adaptive(&lagrangian, 0.0, t, Tolerance::new(1e-300, 1e-14)).value.re + energy * t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_example_times() {
        let p = classical_times([0.0, 0.0, 1.5], 0.5, [0.0, 0.0, 1.0], 1.0).unwrap();
        assert_eq!(p.class, PathClass::TwoReal);
        assert!((p.times[0] - 1.0).abs() < 1e-14 && (p.times[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_and_outside() {
        let (e, f) = (0.7, 1.0);
        let z = 2.0;
        let rho = classical_radius_squared(e, f, z).sqrt();
        let on = classical_times([rho, 0.0, z], e, [0.0, 0.0, f], 1.0).unwrap();
        assert_eq!(on.class, PathClass::Degenerate);
        assert!(on.discriminant.abs() < 1e-9);
        let out = classical_times([rho * 1.01, 0.0, z], e, [0.0, 0.0, f], 1.0).unwrap();
        assert_eq!(out.class, PathClass::ClassicallyForbidden);
        assert!(out.times.is_empty());
    }

    #[test]
    fn phase_matches_integrated_action() {
        let (e, f, m) = (1.3, [0.0, 0.0, 0.8], 0.5);
        let r = [0.0, 0.0, 4.0];
        let p = classical_times(r, e, f, m).unwrap();
        for (t, phi) in p.times.iter().zip(&p.phases) {
            let oracle = integrated_phase(r, e, f, m, *t);
            assert!((phi - oracle).abs() < 1e-9 * phi.abs(), "{phi} {oracle}");
        }
    }

    #[test]
    fn slit_symmetry_and_degenerate_holes() {
        let cfg = SlitConfig::new([0.0, 0.0, -10.0], [[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]], 1.0);
        let on_plane = g_slit(&cfg, [0.0, 0.0, 30.0], 2.0).unwrap();
        let single = g_slit(
            &SlitConfig {
                open: [true, false],
                ..cfg
            },
            [0.0, 0.0, 30.0],
            2.0,
        )
        .unwrap();
        assert!((on_plane.norm() - 2.0 * single.norm()).abs() < 1e-14 * on_plane.norm());
        let same = SlitConfig::new(cfg.source, [[1.0, 0.0, 0.0]; 2], 1.0);
        let both = g_slit(&same, [3.0, 1.0, 20.0], 2.0).unwrap();
        let one = g_slit(
            &SlitConfig {
                open: [true, false],
                ..same
            },
            [3.0, 1.0, 20.0],
            2.0,
        )
        .unwrap();
        assert_eq!(both, 2.0 * one);
    }

    #[test]
    fn time_domain_composition_matches_product() {
        let cfg = SlitConfig::new([0.0, 0.0, -2.0], [[-0.5, 0.0, 0.0], [0.5, 0.0, 0.0]], 1.0);
        let b = [0.3, 0.0, 2.5];
        let e = Complex64::new(1.0, 0.4);
        let product = g_slit_complex(&cfg, b, e).unwrap();
        let time = g_slit_time_domain(&cfg, b, e.re, e.im).unwrap();
        assert!((product - time).norm() < 1e-6 * product.norm(), "{product} vs {time}");
    }

    #[test]
    fn visibility_helpers() {
        let prof: Vec<f64> = (0..200).map(|i| 1.0 + 0.5 * (i as f64 * 0.1).cos()).collect();
        assert!((fringe_visibility(&prof) - 0.5).abs() < 2e-3);
        let flat: Vec<f64> = (0..50).map(|i| (-(i as f64) * 0.1).exp()).collect();
        assert_eq!(count_maxima(&flat), 1);
        assert_eq!(fringe_visibility(&flat), 0.0);
    }

    #[test]
    fn refined_visibility_is_grid_independent() {
        let v = 0.37;
        let f = |x: f64| Ok(1.0 + v * (3.1 * x - 1.0).cos());
        for n in [17, 40, 101] {
            let got = refined_visibility(f, 0.0, 4.0, n).unwrap();
            assert!((got - v).abs() < 1e-12, "{n}: {got}");
        }
        assert_eq!(refined_visibility(|x: f64| Ok(-x), 0.0, 1.0, 10).unwrap(), 0.0);
    }
}
