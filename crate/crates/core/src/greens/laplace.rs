//! Numerical Laplace transform `G = -i int_0^inf dT K(T) exp(i (E + i eta) T)`.
//!
//! Two independent schemes:
//!
//! * `Contour`: the path is deformed into the lower half T-plane (where the
//!   `T - i0` prescription allows it). A uniform force makes the cubic phase
//!   decay on a ray `T = s exp(-i theta)` with `0 < theta < pi/3`; the free
//!   particle at `E > 0` uses a lower ray up to the stationary time, a vertical
//!   cut back to the real axis and an upper ray to infinity. The angle is
//!   capped so that the intermediate growth stays below `exp(max_growth)`.
//! * `RealAxis`: the real T axis split at the classical times. Near `T = 0`
//!   the substitution `u = 1/T` turns the essential singularity into an
//!   oscillatory tail; both tails are summed over half periods of the phase
//!   and accelerated with Wynn's epsilon algorithm.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{GreenRequest, GreenValue, Method};
use crate::error::{Error, Result};
use crate::geom::{add, dot, sub};
use crate::propagators::{kernel_parts, FieldConfig};
use crate::quad::{adaptive, adaptive_with_breaks, semi_infinite, wynn_epsilon, Integral, Tolerance};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplaceScheme {
    Contour,
    RealAxis,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceOptions {
    pub scheme: LaplaceScheme,
    pub rel_tol: f64,
    /// Largest tolerated `log |integrand|` excursion on the contour.
    pub max_growth: f64,
}

impl Default for LaplaceOptions {
    fn default() -> Self {
        LaplaceOptions {
            scheme: LaplaceScheme::Contour,
            rel_tol: 1e-10,
            max_growth: 3.0,
        }
    }
}

struct Problem {
    cfg: FieldConfig,
    r: [f64; 3],
    rp: [f64; 3],
    energy: Complex64,
    d2: f64,
    /// E + F.(r + r')/2, the coefficient of T in the phase.
    linear: f64,
    f2: f64,
}

impl Problem {
    fn new(req: &GreenRequest) -> Self {
        let d = sub(req.r, req.rp);
        let f = req.field.force;
        Problem {
            cfg: req.field,
            r: req.r,
            rp: req.rp,
            energy: Complex64::new(req.energy, req.eta),
            d2: dot(d, d),
            linear: req.energy + 0.5 * dot(f, add(req.r, req.rp)),
            f2: dot(f, f),
        }
    }

    fn mass(&self) -> f64 {
        self.cfg.mass
    }

    fn integrand(&self, t: Complex64) -> Complex64 {
        let (pre, exponent) = kernel_parts(&self.cfg, self.r, self.rp, t);
        let v = -I * pre * (exponent + I * self.energy * t).exp();
        if v.is_finite() {
            v
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Real-T phase `m d^2 / 2T + L T - F^2 T^3 / 24 m` and its derivative.
    fn phase(&self, t: f64) -> f64 {
        let m = self.mass();
        m * self.d2 / (2.0 * t) + self.linear * t - self.f2 * t.powi(3) / (24.0 * m)
    }

    fn dphase(&self, t: f64) -> f64 {
        let m = self.mass();
        -m * self.d2 / (2.0 * t * t) + self.linear - self.f2 * t * t / (8.0 * m)
    }

    /// Positive stationary times of the real phase, ascending.
    fn stationary_times(&self) -> Vec<f64> {
        let m = self.mass();
        if self.f2 == 0.0 {
            if self.linear > 0.0 {
                return vec![(m * self.d2 / (2.0 * self.linear)).sqrt()];
            }
            return Vec::new();
        }
        // f2 X^2 - 8 m L X + 4 m^2 d^2 = 0 with X = T^2
        let b = 4.0 * m * self.linear;
        let disc = b * b - 4.0 * self.f2 * m * m * self.d2;
        if disc < 0.0 || self.linear <= 0.0 {
            return Vec::new();
        }
        let big = (b + disc.sqrt()) / self.f2;
        let small = 4.0 * m * m * self.d2 / (self.f2 * big);
        vec![small.sqrt(), big.sqrt()]
    }

    /// A characteristic time used to size the first quadrature blocks.
    fn time_scale(&self) -> f64 {
        let m = self.mass();
        let mut s = (m * self.d2).max(1e-12);
        if let Some(&t) = self.stationary_times().last() {
            s = s.max(t);
        }
        if self.f2 > 0.0 {
            s = s.max((24.0 * m * m / self.f2).cbrt());
        }
        if self.energy.re != 0.0 {
            s = s.max(1.0 / self.energy.re.abs());
        }
        s
    }
}

enum Piece {
    Segment(Complex64, Complex64),
    Ray(Complex64, Complex64),
}

fn contour(p: &Problem, max_growth: f64) -> Result<Vec<Piece>> {
    let zero = Complex64::new(0.0, 0.0);
    let lower = |theta: f64| Complex64::from_polar(1.0, -theta);
    let e = p.energy.re;
    let eta = p.energy.im;
    let m = p.mass();
    if p.f2 > 0.0 {
        let mut theta = PI / 6.0;
        if p.linear > 0.0 {
            let s_star = (8.0 * m * p.linear / (3.0 * p.f2)).sqrt();
            let growth = 2.0 / 3.0 * p.linear * s_star;
            theta = theta.min((max_growth / growth).min(1.0).asin());
        }
        return Ok(vec![Piece::Ray(zero, lower(theta))]);
    }
    if p.cfg.has_magnetic() {
        let above = e - 0.5 * p.cfg.omega();
        if above < 0.0 {
            return Ok(vec![Piece::Ray(zero, lower(PI / 4.0))]);
        }
        if eta > 0.0 {
            return Ok(vec![Piece::Ray(zero, lower((0.5 * eta / above).atan()))]);
        }
        return Err(Error::Unsupported(
            "no decaying contour above the lowest Landau level without a force at eta = 0; \
             use the Landau sum or eta > 0"
                .into(),
        ));
    }
    if e <= 0.0 {
        return Ok(vec![Piece::Ray(zero, Complex64::new(0.0, -1.0))]);
    }
    let tc = (m * p.d2 / (2.0 * e)).sqrt();
    let tan = (max_growth / (e * tc)).min(1.0);
    let corner = Complex64::new(tc, -tc * tan);
    let theta = tan.atan();
    Ok(vec![
        Piece::Segment(zero, corner),
        Piece::Segment(corner, Complex64::new(tc, 0.0)),
        Piece::Ray(Complex64::new(tc, 0.0), Complex64::from_polar(1.0, theta)),
    ])
}

fn integrate_contour(p: &Problem, opts: &LaplaceOptions) -> Result<(Complex64, f64, usize)> {
    let tol = Tolerance::new(1e-300, opts.rel_tol);
    let width = 0.25 * p.time_scale();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evals = 0;
    for piece in contour(p, opts.max_growth)? {
        let part = match piece {
            Piece::Segment(a, b) => {
                let dir = b - a;
                adaptive(&|s: f64| p.integrand(a + dir * s) * dir, 0.0, 1.0, tol)
            }
            Piece::Ray(a, dir) => {
                let w = if a.norm() > 0.0 { width.min(a.norm()) } else { width };
                semi_infinite(&|s: f64| p.integrand(a + dir * s) * dir, 0.0, w, tol)
            }
        };
        let part = part.into_result("Laplace contour quadrature")?;
        value += part.value;
        error += part.error;
        evals += part.evaluations;
    }
    Ok((value, error, evals))
}

/// Integrates `f` from `start` to infinity along a monotone phase, one half
/// period at a time, and accelerates the partial sums.
fn oscillatory_tail<F, P, D>(f: &F, phase: &P, dphase: &D, start: f64, rel_tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
    P: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let sign = dphase(start).signum();
    let phi0 = phase(start);
    let tol = Tolerance::new(1e-300, 0.1 * rel_tol);
    let mut sums: Vec<Complex64> = Vec::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut lo = start;
    let mut last_estimate: Option<Complex64> = None;
    let mut quiet = 0;
    for k in 1..=3000 {
        let target = phi0 + sign * PI * k as f64;
        let slope = dphase(lo).abs();
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let mut x = lo + PI / slope;
        for _ in 0..40 {
            let dx = (phase(x) - target) / dphase(x);
            let next = (x - dx).max(0.5 * (lo + x));
            let done = (next - x).abs() <= 1e-14 * x.abs();
            x = next;
            if done {
                break;
            }
        }
        let part = adaptive(f, lo, x, tol);
        evaluations += part.evaluations;
        error += part.error;
        total += part.value;
        sums.push(total);
        lo = x;
        if sums.len() >= 6 {
            let window = &sums[sums.len().saturating_sub(40)..];
            let (est, _) = wynn_epsilon(window);
            if let Some(prev) = last_estimate {
                if (est - prev).norm() <= rel_tol * est.norm() {
                    quiet += 1;
                    if quiet >= 3 {
                        return Ok(Integral {
                            value: est,
                            error: error + (est - prev).norm(),
                            evaluations,
                            converged: true,
                        });
                    }
                } else {
                    quiet = 0;
                }
            }
            last_estimate = Some(est);
        }
    }
    Err(Error::NonConvergence {
        what: "oscillatory tail",
        value: last_estimate.unwrap_or(total),
        est_error: error,
    })
}

fn integrate_real_axis(p: &Problem, opts: &LaplaceOptions) -> Result<(Complex64, f64, usize)> {
    if p.cfg.has_magnetic() {
        return Err(Error::Unsupported(
            "real-axis scheme crosses the caustics of the magnetic kernel".into(),
        ));
    }
    let m = p.mass();
    let stationary = p.stationary_times();
    let reference = if p.f2 > 0.0 {
        (2.0 * m * p.d2.sqrt() / p.f2.sqrt()).sqrt()
    } else {
        (m * p.d2 / (2.0 * p.linear.abs().max(1e-300))).sqrt().min(1e300)
    };
    let t_lo = stationary.first().copied().unwrap_or(reference);
    let t_hi = stationary.last().copied().unwrap_or(reference);
    let (ta, tb) = (0.5 * t_lo, 2.0 * t_hi);
    let eta = p.energy.im;
    let f = |t: f64| p.integrand(Complex64::new(t, 0.0));

    // (0, ta] in u = 1/T
    let g = |u: f64| f(1.0 / u) / (u * u);
    let psi = |u: f64| p.phase(1.0 / u);
    let dpsi = |u: f64| -p.dphase(1.0 / u) / (u * u);
    let head = oscillatory_tail(&g, &psi, &dpsi, 1.0 / ta, opts.rel_tol)?;

    let mut breaks = vec![ta];
    breaks.extend(stationary.iter().copied());
    breaks.push(tb);
    let middle = adaptive_with_breaks(&f, &breaks, Tolerance::new(1e-300, 0.1 * opts.rel_tol))
        .into_result("Laplace real-axis middle")?;

    let tail = oscillatory_tail(&f, &|t| p.phase(t), &|t| p.dphase(t), tb, opts.rel_tol);
    let tail = match tail {
        Ok(t) => t,
        // strong damping: the plain integral converges before the phase matters
        Err(_) if eta > 0.0 => semi_infinite(&f, tb, tb, Tolerance::new(1e-300, opts.rel_tol))
            .into_result("Laplace real-axis tail")?,
        Err(e) => return Err(e),
    };
    Ok((
        head.value + middle.value + tail.value,
        head.error + middle.error + tail.error,
        head.evaluations + middle.evaluations + tail.evaluations,
    ))
}

/// Laplace transform of the kernel at `E + i eta` with the default contour
/// scheme.
pub fn g_laplace(req: &GreenRequest) -> Result<GreenValue> {
    g_laplace_with(req, &LaplaceOptions::default())
}

pub fn g_laplace_with(req: &GreenRequest, opts: &LaplaceOptions) -> Result<GreenValue> {
    req.validate()?;
    if req.field.has_magnetic() && req.field.force_perp() != 0.0 {
        return Err(Error::Unsupported(
            "Laplace kernel with a magnetic field needs the force along B".into(),
        ));
    }
    let p = Problem::new(req);
    let (value, error, _) = match opts.scheme {
        LaplaceScheme::Contour => integrate_contour(&p, opts)?,
        LaplaceScheme::RealAxis => integrate_real_axis(&p, opts)?,
    };
    if !value.is_finite() {
        return Err(Error::NonFinite("Laplace quadrature result"));
    }
    if error > 1e-6 * value.norm() {
        return Err(Error::NonConvergence {
            what: "Laplace quadrature",
            value,
            est_error: error,
        });
    }
    Ok(GreenValue {
        value,
        method_used: Method::LaplaceQuadrature,
        est_error: error,
    })
}

/// The `eta -> 0` limit from transforms at `eta`, `eta/2` and `eta/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolated {
    pub value: GreenValue,
    /// Difference between the linear and the quadratic extrapolant.
    pub residual: f64,
    pub samples: [Complex64; 3],
}

pub fn g_laplace_extrapolated(req: &GreenRequest, opts: &LaplaceOptions) -> Result<Extrapolated> {
    if !(req.eta > 0.0) {
        return Err(Error::InvalidInput("eta extrapolation needs eta > 0".into()));
    }
    let mut samples = [Complex64::new(0.0, 0.0); 3];
    let mut error = 0.0;
    for (i, s) in samples.iter_mut().enumerate() {
        let g = g_laplace_with(&req.with_eta(req.eta / (1 << i) as f64), opts)?;
        *s = g.value;
        error += g.est_error;
    }
    let [g1, g2, g4] = samples;
    let quadratic = (8.0 * g4 - 6.0 * g2 + g1) / 3.0;
    let linear = 2.0 * g4 - g2;
    let residual = (quadratic - linear).norm();
    Ok(Extrapolated {
        value: GreenValue {
            value: quadratic,
            method_used: Method::LaplaceQuadrature,
            est_error: 5.0 * error + residual,
        },
        residual,
        samples,
    })
}
