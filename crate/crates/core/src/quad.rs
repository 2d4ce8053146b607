//! Numerical quadrature for complex-valued integrands of one real variable.
//!
//! Adaptive Gauss–Kronrod (7/15 is too coarse for the chirped integrands we
//! meet, so the 10/21 pair is used throughout), a chained semi-infinite
//! driver, Wynn's epsilon algorithm for accelerating partial sums, and
//! cached Gauss rules from `gauss-quad`.

use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::{GaussHermite, GaussLaguerre, GaussLegendre};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Result of a numerical integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl Integral {
    pub fn into_result(self, what: &'static str) -> Result<Integral> {
        if self.converged && self.value.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                what,
                value: self.value,
                est_error: self.error,
            })
        }
    }
}

/// Absolute / relative tolerance pair; the request is met when
/// `error <= max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 4000,
        }
    }

    fn target(&self, value: Complex64) -> f64 {
        self.abs.max(self.rel * value.norm())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-300, 1e-11)
    }
}

/// One 21-point Gauss–Kronrod panel on `[a, b]`.
pub fn gk21<F>(f: &F, a: f64, b: f64) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut abs_sum = fc.norm() * WGK[10];
    let mut samples = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];
    for (j, sample) in samples.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += (f1 + f2) * WGK[j];
        abs_sum += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
        *sample = (f1, f2);
    }
    let mean = kronrod * 0.5;
    let mut asc = (fc - mean).norm() * WGK[10];
    for (j, (f1, f2)) in samples.iter().enumerate() {
        asc += ((f1 - mean).norm() + (f2 - mean).norm()) * WGK[j];
    }
    let value = kronrod * half;
    let asc = asc * half.abs();
    let raw = ((kronrod - gauss) * half).norm();
    let mut err = raw;
    if asc > 0.0 && raw > 0.0 {
        err = asc * (200.0 * raw / asc).powf(1.5).min(1.0);
    }
    let round = 10.0 * f64::EPSILON * abs_sum * half.abs();
    if round > err {
        err = round;
    }
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive bisection on `[a, b]` driven by the largest panel error.
pub fn adaptive<F>(f: &F, a: f64, b: f64, tol: Tolerance) -> Integral
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    adaptive_with_breaks(f, &[a, b], tol)
}

/// Like [`adaptive`], but starts from the given ordered break points.
pub fn adaptive_with_breaks<F>(f: &F, breaks: &[f64], tol: Tolerance) -> Integral
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let mut heap = BinaryHeap::new();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        let (v, e) = gk21(f, w[0], w[1]);
        evaluations += 21;
        value += v;
        error += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    while error > tol.target(value) && heap.len() < tol.max_intervals {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in double precision
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(f, worst.a, mid);
        let (v2, e2) = gk21(f, mid, worst.b);
        evaluations += 42;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // re-sum to shed accumulated cancellation from the running updates
    let panels: Vec<Panel> = heap.into_vec();
    let value = pairwise_sum_complex(&panels.iter().map(|p| p.value).collect::<Vec<_>>());
    let error: f64 = panels.iter().map(|p| p.error).sum();
    Integral {
        value,
        error,
        evaluations,
        converged: error <= tol.target(value) && value.is_finite(),
    }
}

/// Integrates over `[a, inf)` as a chain of adaptive blocks of geometrically
/// growing width. Stops once three consecutive blocks are negligible.
pub fn semi_infinite<F>(f: &F, a: f64, first_width: f64, tol: Tolerance) -> Integral
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let mut lo = a;
    let mut width = first_width;
    let mut blocks = Vec::new();
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut quiet = 0;
    let mut running = Complex64::new(0.0, 0.0);
    for _ in 0..400 {
        let hi = lo + width;
        let block_tol = Tolerance {
            abs: tol.abs.max(0.1 * tol.rel * running.norm()),
            ..tol
        };
        let block = adaptive(f, lo, hi, block_tol);
        evaluations += block.evaluations;
        error += block.error;
        running += block.value;
        blocks.push(block.value);
        let size = block.value.norm() + block.error;
        if size <= 0.01 * tol.target(running) {
            quiet += 1;
            if quiet >= 3 {
                let value = pairwise_sum_complex(&blocks);
                return Integral {
                    value,
                    error,
                    evaluations,
                    converged: error <= tol.target(value) * 10.0 && value.is_finite(),
                };
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        width *= 1.5;
    }
    let value = pairwise_sum_complex(&blocks);
    Integral {
        value,
        error: error.max(blocks.last().map_or(0.0, |b| b.norm())),
        evaluations,
        converged: false,
    }
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums.
///
/// Returns the last entry of the deepest even column of the epsilon table
/// and an error estimate from the spread of the final entries.
pub fn wynn_epsilon(partial_sums: &[Complex64]) -> (Complex64, f64) {
    let n = partial_sums.len();
    match n {
        0 => return (Complex64::new(0.0, 0.0), f64::INFINITY),
        1 => return (partial_sums[0], f64::INFINITY),
        2 => return (partial_sums[1], (partial_sums[1] - partial_sums[0]).norm()),
        _ => {}
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut before = vec![zero; n + 1];
    let mut current = partial_sums.to_vec();
    let mut best = current[n - 1];
    let mut best_err = (current[n - 1] - current[n - 2]).norm();
    let mut k = 0;
    while current.len() >= 2 {
        let mut next = Vec::with_capacity(current.len() - 1);
        for i in 0..current.len() - 1 {
            let diff = current[i + 1] - current[i];
            if diff.norm() == 0.0 {
                break;
            }
            next.push(before[i + 1] + diff.inv());
        }
        if next.len() != current.len() - 1 || next.iter().any(|v| !v.is_finite()) {
            break;
        }
        k += 1;
        before = current;
        current = next;
        if k % 2 == 0 && current.len() >= 2 {
            let m = current.len();
            best = current[m - 1];
            best_err = (current[m - 1] - current[m - 2]).norm();
        }
    }
    (best, best_err)
}

/// Pairwise (tree) summation; the result depends only on the input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (l, r) = values.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

pub fn pairwise_sum_complex(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (l, r) = values.split_at(n / 2);
            pairwise_sum_complex(l) + pairwise_sum_complex(r)
        }
    }
}

type RuleCache = Mutex<HashMap<(u8, usize), Arc<Vec<(f64, f64)>>>>;

fn rule_cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached_rule(kind: u8, n: usize, build: impl FnOnce() -> Vec<(f64, f64)>) -> Arc<Vec<(f64, f64)>> {
    let key = (kind, n);
    if let Some(rule) = rule_cache().lock().expect("rule cache poisoned").get(&key) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(build());
    rule_cache()
        .lock()
        .expect("rule cache poisoned")
        .entry(key)
        .or_insert_with(|| Arc::clone(&rule));
    rule
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<Vec<(f64, f64)>> {
    cached_rule(0, n, || {
        GaussLegendre::new(n.max(2))
            .expect("degree >= 2")
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// Gauss–Hermite nodes and weights for the weight `exp(-x^2)`.
pub fn gauss_hermite(n: usize) -> Arc<Vec<(f64, f64)>> {
    cached_rule(1, n, || {
        GaussHermite::new(n.max(2))
            .expect("degree >= 2")
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// Gauss–Laguerre nodes and weights for the weight `exp(-x)`.
pub fn gauss_laguerre(n: usize) -> Arc<Vec<(f64, f64)>> {
    cached_rule(2, n, || {
        GaussLaguerre::new(n.max(2), 0.0)
            .expect("degree >= 2")
            .as_node_weight_pairs()
            .to_vec()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn gk21_integrates_polynomials_exactly() {
        let (v, _) = gk21(&|x: f64| c(x.powi(9) - 3.0 * x * x), -1.0, 2.0);
        let exact = (2f64.powi(10) - 1.0) / 10.0 - (8.0 + 1.0);
        assert!((v.re - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let f = |x: f64| Complex64::new(0.0, 40.0 * x).exp();
        let r = adaptive(&f, 0.0, 3.0, Tolerance::new(1e-14, 1e-12));
        let exact = (Complex64::new(0.0, 120.0).exp() - 1.0) / Complex64::new(0.0, 40.0);
        assert!(r.converged, "{r:?}");
        assert!((r.value - exact).norm() < 1e-11);
    }

    #[test]
    fn semi_infinite_exponential() {
        let f = |x: f64| c((-x).exp());
        let r = semi_infinite(&f, 0.0, 1.0, Tolerance::new(1e-15, 1e-12));
        assert!(r.converged);
        assert!((r.value.re - 1.0).abs() < 1e-11);
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // log 2 = 1 - 1/2 + 1/3 - ...
        let mut s = 0.0;
        let sums: Vec<Complex64> = (1..=14)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                c(s)
            })
            .collect();
        let (v, err) = wynn_epsilon(&sums);
        assert!((v.re - std::f64::consts::LN_2).abs() < 1e-9, "{v}");
        assert!(err < 1e-6);
    }

    #[test]
    fn pairwise_is_order_stable() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        assert_eq!(pairwise_sum(&v), pairwise_sum(&v.clone()));
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-12);
    }

    #[test]
    fn gauss_rules_are_cached_and_normalized() {
        let a = gauss_legendre(16);
        let b = gauss_legendre(16);
        assert!(Arc::ptr_eq(&a, &b));
        let total: f64 = a.iter().map(|(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-13);
        let h: f64 = gauss_hermite(20).iter().map(|(_, w)| w).sum();
        assert!((h - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        let l: f64 = gauss_laguerre(20).iter().map(|(x, w)| w * x).sum();
        assert!((l - 1.0).abs() < 1e-12);
    }
}
