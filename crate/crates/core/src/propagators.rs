//! Time-dependent kernels K(r, T | r', 0) of the quadratic Hamiltonians
//! (free particle, uniform force, uniform magnetic field along z plus a
//! parallel force), in units with hbar = 1.
//!
//! Fractional powers use the principal branch of `(i T)^(-p)`, i.e. time
//! carries an infinitesimal negative imaginary part. The complex-time
//! versions are used by the contour quadratures in `greens`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geom::{add, dot, is_finite, sub, Vec3};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Distance from a multiple of the cyclotron period treated as a caustic.
pub const CAUSTIC_TOLERANCE: f64 = 1e-9;

/// Uniform external fields in dimensionless units.
///
/// The potential is `-force . r`; the magnetic field points along z with the
/// symmetric gauge `A = B x r / 2`. `b_field` is |qB| and `charge_sign` the
/// sign of qB (0 for a neutral particle).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig {
    pub mass: f64,
    pub force: Vec3,
    pub b_field: f64,
    pub charge_sign: f64,
}

impl FieldConfig {
    pub fn free(mass: f64) -> Self {
        FieldConfig {
            mass,
            force: [0.0; 3],
            b_field: 0.0,
            charge_sign: 0.0,
        }
    }

    pub fn uniform(mass: f64, force: Vec3) -> Self {
        FieldConfig {
            force,
            ..Self::free(mass)
        }
    }

    pub fn magnetic(mass: f64, b_field: f64, charge_sign: f64, force: Vec3) -> Self {
        FieldConfig {
            mass,
            force,
            b_field,
            charge_sign,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidInput(format!("mass must be positive, got {}", self.mass)));
        }
        if !is_finite(self.force) || !self.b_field.is_finite() {
            return Err(Error::NonFinite("field configuration"));
        }
        if self.b_field < 0.0 {
            return Err(Error::InvalidInput("b_field must be >= 0".into()));
        }
        if ![-1.0, 0.0, 1.0].contains(&self.charge_sign) {
            return Err(Error::InvalidInput("charge_sign must be -1, 0 or 1".into()));
        }
        Ok(())
    }

    /// Signed qB.
    pub fn qb(&self) -> f64 {
        self.charge_sign * self.b_field
    }

    /// Cyclotron frequency |qB|/m.
    pub fn omega(&self) -> f64 {
        self.qb().abs() / self.mass
    }

    pub fn has_magnetic(&self) -> bool {
        self.qb() != 0.0
    }

    pub fn force_norm(&self) -> f64 {
        dot(self.force, self.force).sqrt()
    }

    pub fn force_perp(&self) -> f64 {
        self.force[0].hypot(self.force[1])
    }

    /// `q A(r)` in the symmetric gauge.
    pub fn q_vector_potential(&self, r: Vec3) -> Vec3 {
        let h = 0.5 * self.qb();
        [-h * r[1], h * r[0], 0.0]
    }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::NonFinite("elapsed time"));
    }
    if t <= 0.0 {
        return Err(Error::InvalidInput(format!("elapsed time must be positive, got {t}")));
    }
    Ok(())
}

fn check_points(r: Vec3, rp: Vec3) -> Result<()> {
    if is_finite(r) && is_finite(rp) {
        Ok(())
    } else {
        Err(Error::NonFinite("position"))
    }
}

/// `(m / (2 pi i T))^(p)` on the principal branch, for `p = n/2`.
fn prefactor(mass: f64, t: Complex64, half_powers: i32) -> Complex64 {
    let p = 0.5 * half_powers as f64;
    (I * t).powf(-p) * (mass / (2.0 * PI)).powf(p)
}

pub(crate) fn k_free_c(mass: f64, d2: f64, t: Complex64) -> Complex64 {
    prefactor(mass, t, 3) * (I * mass * d2 / (2.0 * t)).exp()
}

fn mass_phase(mass: f64, d2: f64, t: Complex64) -> Complex64 {
    mass * d2 / (2.0 * t)
}

/// `1/sin w` and `cot w` without overflow far from the real axis.
pub(crate) fn csc_cot(w: Complex64) -> (Complex64, Complex64) {
    if w.im < 0.0 {
        let q = (-2.0 * I * w).exp();
        (2.0 * I * (-I * w).exp() / (1.0 - q), I * (1.0 + q) / (1.0 - q))
    } else {
        let q = (2.0 * I * w).exp();
        (-2.0 * I * (I * w).exp() / (1.0 - q), -I * (1.0 + q) / (1.0 - q))
    }
}

/// Kernel matching `cfg` at complex time as `(prefactor, exponent)`, so that
/// callers can fold further phases into a single `exp` (no caustic check).
pub(crate) fn kernel_parts(cfg: &FieldConfig, r: Vec3, rp: Vec3, t: Complex64) -> (Complex64, Complex64) {
    let m = cfg.mass;
    if cfg.has_magnetic() {
        let w = cfg.omega();
        let (dx, dy, dz) = (r[0] - rp[0], r[1] - rp[1], r[2] - rp[2]);
        let (csc, cot) = csc_cot(0.5 * w * t);
        let gauge = 0.5 * cfg.qb() * (rp[0] * r[1] - r[0] * rp[1]);
        let f = cfg.force[2];
        let phase = 0.25 * m * w * cot * (dx * dx + dy * dy)
            + gauge
            + mass_phase(m, dz * dz, t)
            + 0.5 * f * (r[2] + rp[2]) * t
            - f * f * t * t * t / (24.0 * m);
        (m * w / (4.0 * PI * I) * csc * prefactor(m, t, 1), I * phase)
    } else {
        let d = sub(r, rp);
        let f2 = dot(cfg.force, cfg.force);
        let linear = 0.5 * dot(cfg.force, add(r, rp));
        let phase = mass_phase(m, dot(d, d), t) + linear * t - f2 * t * t * t / (24.0 * m);
        (prefactor(m, t, 3), I * phase)
    }
}

pub(crate) fn kernel_c(cfg: &FieldConfig, r: Vec3, rp: Vec3, t: Complex64) -> Complex64 {
    let (pre, exponent) = kernel_parts(cfg, r, rp, t);
    pre * exponent.exp()
}

/// Free-particle kernel `(m/(2 pi i T))^(3/2) exp(i m |r-r'|^2 / 2T)`.
pub fn k_free(mass: f64, r: Vec3, rp: Vec3, t: f64) -> Result<Complex64> {
    check_time(t)?;
    check_points(r, rp)?;
    let d = sub(r, rp);
    Ok(k_free_c(mass, dot(d, d), Complex64::new(t, 0.0)))
}

/// Kernel in a uniform force field (any direction), no magnetic field.
pub fn k_field(cfg: &FieldConfig, r: Vec3, rp: Vec3, t: f64) -> Result<Complex64> {
    cfg.validate()?;
    check_time(t)?;
    check_points(r, rp)?;
    if cfg.has_magnetic() {
        return Err(Error::InvalidInput("k_field requires b_field = 0".into()));
    }
    Ok(kernel_c(cfg, r, rp, Complex64::new(t, 0.0)))
}

/// Kernel for a magnetic field along z and a force parallel to it.
///
/// Product of the symmetric-gauge Landau kernel in the plane and the 1D
/// uniform-force kernel along z. Fails on caustics `T = 2 pi n / omega`.
pub fn k_landau_field(cfg: &FieldConfig, r: Vec3, rp: Vec3, t: f64) -> Result<Complex64> {
    cfg.validate()?;
    check_time(t)?;
    check_points(r, rp)?;
    if cfg.force_perp() != 0.0 {
        return Err(Error::Unsupported(
            "k_landau_field needs the force parallel to the magnetic field".into(),
        ));
    }
    if !cfg.has_magnetic() {
        return Ok(kernel_c(cfg, r, rp, Complex64::new(t, 0.0)));
    }
    let period = 2.0 * PI / cfg.omega();
    let n = (t / period).round();
    if n >= 1.0 && (t - n * period).abs() < CAUSTIC_TOLERANCE {
        return Err(Error::Caustic {
            time: t,
            tolerance: CAUSTIC_TOLERANCE,
        });
    }
    Ok(kernel_c(cfg, r, rp, Complex64::new(t, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_legendre;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm()
    }

    // mpmath references from tests/golden/generate.py
    #[test]
    fn free_kernel_golden() {
        let k = k_free(1.0, [1.0, 0.0, 0.0], [0.0; 3], 1.0).unwrap();
        let want = Complex64::new(-0.017_875_968_491_471_537, -0.060_925_294_867_089_917);
        assert!(close(k, want, 1e-14), "{k}");
    }

    #[test]
    fn free_kernel_coincidence_and_modulus() {
        let t = 2.0 * PI;
        let k = k_free(1.0, [0.0; 3], [0.0; 3], t).unwrap();
        assert!((k.norm() - (4.0 * PI * PI).powf(-1.5)).abs() < 1e-18);
        assert!((k.arg() + 0.75 * PI).abs() < 1e-14, "{k}");
        for r in [[1.0, 2.0, 3.0], [-4.0, 0.5, 0.0]] {
            let kr = k_free(1.0, r, [0.3, 0.0, -1.0], 1.3).unwrap();
            assert!((kr.norm() - (2.0 * PI * 1.3f64).powf(-1.5)).abs() < 1e-15);
        }
    }

    #[test]
    fn field_kernel_golden_and_limits() {
        let cfg = FieldConfig::uniform(1.0, [0.0, 0.0, 1.0]);
        let k = k_field(&cfg, [0.0, 0.0, 1.0], [0.0; 3], 1.0).unwrap();
        let want = Complex64::new(0.010_925_634_064_086_172, -0.062_546_561_251_979_44);
        assert!(close(k, want, 1e-14), "{k}");
        let free = FieldConfig::uniform(1.0, [0.0; 3]);
        let r = [0.2, -0.4, 1.1];
        assert_eq!(
            k_field(&free, r, [0.0; 3], 0.7).unwrap(),
            k_free(1.0, r, [0.0; 3], 0.7).unwrap()
        );
        let t: f64 = 1.7;
        let ratio = k_field(&cfg, [0.0; 3], [0.0; 3], t).unwrap() / k_free(1.0, [0.0; 3], [0.0; 3], t).unwrap();
        assert!((ratio - (-I * t.powi(3) / 24.0).exp()).norm() < 1e-14);
    }

    #[test]
    fn landau_kernel_golden() {
        let cfg = FieldConfig::magnetic(1.0, 1.0, 1.0, [0.0, 0.0, 1.0]);
        let k = k_landau_field(&cfg, [1.0, 0.0, 1.0], [0.0; 3], 1.0).unwrap();
        let want = Complex64::new(0.039_042_057_385_852_45, -0.053_484_590_333_990_695);
        assert!(close(k, want, 1e-12), "{k}");
        // off-origin source probes the sign of the gauge phase
        let k = k_landau_field(&cfg, [1.0, 0.0, 1.0], [0.3, 0.4, 0.0], 1.0).unwrap();
        let want = Complex64::new(0.017_687_394_885_635_358, -0.063_812_535_682_846_885);
        assert!(close(k, want, 1e-12), "{k}");
    }

    #[test]
    fn landau_kernel_weak_field_limit() {
        let field = FieldConfig::uniform(1.0, [0.0, 0.0, 1.0]);
        let weak = FieldConfig::magnetic(1.0, 1e-7, 1.0, [0.0, 0.0, 1.0]);
        let (r, rp) = ([0.5, -0.3, 1.0], [0.1, 0.2, -0.2]);
        let a = k_landau_field(&weak, r, rp, 1.0).unwrap();
        let b = k_field(&field, r, rp, 1.0).unwrap();
        assert!(close(a, b, 1e-8));
    }

    #[test]
    fn landau_kernel_rejects_caustics() {
        let cfg = FieldConfig::magnetic(1.0, 1.0, -1.0, [0.0; 3]);
        assert!(matches!(
            k_landau_field(&cfg, [1.0, 0.0, 0.0], [0.0; 3], 2.0 * PI),
            Err(Error::Caustic { .. })
        ));
        assert!(k_landau_field(&cfg, [1.0, 0.0, 0.0], [0.0; 3], 2.0 * PI + 1e-6).is_ok());
        assert!(k_free(1.0, [0.0; 3], [0.0; 3], 0.0).is_err());
        assert!(k_free(1.0, [0.0; 3], [0.0; 3], f64::NAN).is_err());
    }

    #[test]
    fn csc_cot_match_direct_formulas() {
        for w in [
            Complex64::new(0.7, 0.0),
            Complex64::new(0.3, -2.0),
            Complex64::new(-1.2, 1.5),
        ] {
            let (csc, cot) = csc_cot(w);
            assert!((csc - 1.0 / w.sin()).norm() < 1e-14);
            assert!((cot - w.cos() / w.sin()).norm() < 1e-14);
        }
        let (csc, _) = csc_cot(Complex64::new(1.0, -900.0));
        assert!(csc.is_finite());
    }

    #[test]
    fn free_kernel_semigroup() {
        // complex times with negative imaginary part damp the integrand
        let t1 = Complex64::new(0.5, -0.5);
        let t2 = Complex64::new(0.4, -0.6);
        let (r, rp) = ([0.3, -0.2, 0.5], [0.0, 0.1, -0.2]);
        let half = 6.0;
        let rule = gauss_legendre(48);
        let mut sum = Complex64::new(0.0, 0.0);
        for &(x, wx) in rule.iter() {
            for &(y, wy) in rule.iter() {
                for &(z, wz) in rule.iter() {
                    let p = [half * x, half * y, half * z];
                    let a = k_free_c(1.0, dot(sub(r, p), sub(r, p)), t2);
                    let b = k_free_c(1.0, dot(sub(p, rp), sub(p, rp)), t1);
                    sum += a * b * (wx * wy * wz * half.powi(3));
                }
            }
        }
        let direct = k_free_c(1.0, dot(sub(r, rp), sub(r, rp)), t1 + t2);
        assert!(close(sum, direct, 1e-3), "{sum} vs {direct}");
    }
}
