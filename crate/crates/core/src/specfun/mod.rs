//! Airy functions on the real line.
//!
//! For |x| <= 10 the Maclaurin series is summed in double-double arithmetic,
//! which keeps full double precision even where Ai is exponentially small
//! next to the individual terms. Beyond that the standard asymptotic
//! expansions take over; at |x| = 10 their optimal truncation error is below
//! 1e-18. The exponentially scaled form ([`airy_scaled`]) is what the Green
//! functions use, since Bi overflows past x ~ 104.

mod dd;

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use dd::Dd;

const SERIES_LIMIT: f64 = 10.0;

// Ai(0) = 3^(-2/3)/Gamma(2/3) and -Ai'(0) = 3^(-1/3)/Gamma(1/3), split hi+lo
const AI0: Dd = Dd::new(0.3550280538878172, 2.05233632436212e-17);
const AIP0: Dd = Dd::new(0.2588194037928068, -2.522243111610832e-17);
const SQRT3: Dd = Dd::new(1.7320508075688772, 1.0035084221806903e-16);

const INV_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Ai, Ai', Bi, Bi' at one real argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryPair {
    pub ai: f64,
    pub ai_prime: f64,
    pub bi: f64,
    pub bi_prime: f64,
}

impl AiryPair {
    /// Ai Bi' - Ai' Bi, which equals 1/pi identically.
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bi_prime - self.ai_prime * self.bi
    }
}

/// Airy functions with the exponential growth/decay factored out.
///
/// `Ai = ai * exp(-zeta)`, `Bi = bi * exp(zeta)` (same for the derivatives),
/// with `zeta = (2/3) x^(3/2)` for `x > 0` and `zeta = 0` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledAiry {
    pub ai: f64,
    pub ai_prime: f64,
    pub bi: f64,
    pub bi_prime: f64,
    pub zeta: f64,
}

impl ScaledAiry {
    pub fn unscaled(&self) -> AiryPair {
        let decay = (-self.zeta).exp();
        let growth = self.zeta.exp();
        AiryPair {
            ai: self.ai * decay,
            ai_prime: self.ai_prime * decay,
            bi: self.bi * growth,
            bi_prime: self.bi_prime * growth,
        }
    }
}

/// Ai, Ai', Bi, Bi' at `x`.
///
/// Fails for non-finite input and where Bi is not representable (x > ~104);
/// use [`airy_scaled`] there.
pub fn airy(x: f64) -> Result<AiryPair> {
    let s = airy_scaled(x)?;
    if s.zeta > 700.0 {
        return Err(Error::Overflow { what: "Bi", x });
    }
    Ok(s.unscaled())
}

/// Outgoing-wave combination `Ci = Bi + i Ai` and its derivative.
pub fn ci(x: f64) -> Result<(Complex64, Complex64)> {
    let a = airy(x)?;
    Ok((
        Complex64::new(a.bi, a.ai),
        Complex64::new(a.bi_prime, a.ai_prime),
    ))
}

/// Exponentially scaled Airy functions, valid for any finite `x`.
pub fn airy_scaled(x: f64) -> Result<ScaledAiry> {
    if !x.is_finite() {
        return Err(Error::NonFinite("airy argument"));
    }
    if x.abs() <= SERIES_LIMIT {
        let a = maclaurin(x);
        if x > 0.0 {
            let zeta = 2.0 / 3.0 * x * x.sqrt();
            let (up, down) = (zeta.exp(), (-zeta).exp());
            return Ok(ScaledAiry {
                ai: a.ai * up,
                ai_prime: a.ai_prime * up,
                bi: a.bi * down,
                bi_prime: a.bi_prime * down,
                zeta,
            });
        }
        return Ok(ScaledAiry {
            ai: a.ai,
            ai_prime: a.ai_prime,
            bi: a.bi,
            bi_prime: a.bi_prime,
            zeta: 0.0,
        });
    }
    if x > 0.0 {
        Ok(asymptotic_positive(x))
    } else {
        Ok(asymptotic_negative(-x))
    }
}

fn maclaurin(x: f64) -> AiryPair {
    let xd = Dd::from_f64(x);
    let x3 = xd * xd * xd;
    // f = sum c_k x^{3k}, g = sum d_k x^{3k+1} and their derivatives
    let mut f = Dd::from_f64(1.0);
    let mut g = xd;
    let mut fp = Dd::ZERO;
    let mut gp = Dd::from_f64(1.0);
    let mut tf = Dd::from_f64(1.0);
    let mut tg = xd;
    let mut tfp = (xd * xd).div_f64(2.0);
    let mut tgp = Dd::from_f64(1.0);
    fp = fp + tfp;
    for k in 1..200 {
        let k3 = 3.0 * k as f64;
        tf = (tf * x3).div_f64((k3 - 1.0) * k3);
        tg = (tg * x3).div_f64(k3 * (k3 + 1.0));
        tgp = (tgp * x3).div_f64((k3 - 2.0) * k3);
        f = f + tf;
        g = g + tg;
        gp = gp + tgp;
        if k >= 2 {
            tfp = (tfp * x3).div_f64((k3 - 1.0) * (k3 - 3.0));
            fp = fp + tfp;
        }
        let small = 1e-34;
        if k > 2
            && tf.abs_hi() <= small * f.abs_hi()
            && tg.abs_hi() <= small * g.abs_hi().max(1e-300)
            && tfp.abs_hi() <= small * fp.abs_hi().max(1e-300)
            && tgp.abs_hi() <= small * gp.abs_hi()
        {
            break;
        }
    }
    let ai = AI0 * f - AIP0 * g;
    let bi = SQRT3 * (AI0 * f + AIP0 * g);
    let ai_prime = AI0 * fp - AIP0 * gp;
    let bi_prime = SQRT3 * (AI0 * fp + AIP0 * gp);
    AiryPair {
        ai: ai.to_f64(),
        ai_prime: ai_prime.to_f64(),
        bi: bi.to_f64(),
        bi_prime: bi_prime.to_f64(),
    }
}

/// Coefficients u_k, v_k of the large-argument expansions, truncated where
/// the terms at the given zeta stop decreasing.
fn expansion_terms(zeta: f64) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    let mut last = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let vk = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk;
        let size = uk.abs().max(vk.abs()) / zeta.powi(k as i32);
        if size > last || size < 1e-18 {
            break;
        }
        last = size;
        u.push(uk);
        v.push(vk);
    }
    (u, v)
}

fn asymptotic_positive(x: f64) -> ScaledAiry {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let (u, v) = expansion_terms(zeta);
    let mut su_alt = 0.0;
    let mut sv_alt = 0.0;
    let mut su = 0.0;
    let mut sv = 0.0;
    // sum from the smallest term up
    for k in (0..u.len()).rev() {
        let p = zeta.powi(-(k as i32));
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        su_alt += sign * u[k] * p;
        sv_alt += sign * v[k] * p;
        su += u[k] * p;
        sv += v[k] * p;
    }
    let q = x.powf(0.25);
    ScaledAiry {
        ai: 0.5 * INV_SQRT_PI / q * su_alt,
        ai_prime: -0.5 * INV_SQRT_PI * q * sv_alt,
        bi: INV_SQRT_PI / q * su,
        bi_prime: INV_SQRT_PI * q * sv,
        zeta,
    }
}

fn asymptotic_negative(z: f64) -> ScaledAiry {
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let (u, v) = expansion_terms(zeta);
    let (mut pu, mut qu, mut pv, mut qv) = (0.0, 0.0, 0.0, 0.0);
    for k in (0..u.len()).rev() {
        let p = zeta.powi(-(k as i32));
        // (-1)^j for index k = 2j or 2j+1
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            pu += sign * u[k] * p;
            pv += sign * v[k] * p;
        } else {
            qu += sign * u[k] * p;
            qv += sign * v[k] * p;
        }
    }
    let (s, c) = (zeta - FRAC_PI_4).sin_cos();
    let q = z.powf(0.25);
    ScaledAiry {
        ai: INV_SQRT_PI / q * (c * pu + s * qu),
        ai_prime: INV_SQRT_PI * q * (s * pv - c * qv),
        bi: INV_SQRT_PI / q * (-s * pu + c * qu),
        bi_prime: INV_SQRT_PI * q * (c * pv + s * qv),
        zeta: 0.0,
    }
}

/// 1/pi, the value of the Airy Wronskian.
pub const WRONSKIAN: f64 = 1.0 / PI;
