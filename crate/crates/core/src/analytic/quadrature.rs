//! Globally adaptive Gauss–Kronrod quadrature (21-point Kronrod extension of
//! the 10-point Gauss rule), with QUADPACK-style error scaling.
//!
//! Panels are bisected in order of decreasing error estimate until the
//! summed estimate meets `max(abs_tol, rel_tol·|value|)`. The final value is
//! summed over panels sorted by their left end-point, so the result is
//! bit-stable for a given configuration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and work limit for [`quadrature`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 1_000_000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::config(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if !(self.abs_tol >= 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::config(format!(
                "abs_tol must be non-negative, got {}",
                self.abs_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::config("max_subdivisions must be at least 1"));
        }
        Ok(())
    }
}

/// An integral estimate with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl QuadratureResult {
    /// Multiplies value and error estimate by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            abs_error_estimate: self.abs_error_estimate * factor.abs(),
            evaluations: self.evaluations,
        }
    }
}

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

const KRONROD_POINTS: usize = 21;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Error estimate is pinned at the round-off floor; bisecting cannot
    /// reduce it.
    at_floor: bool,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Reducible panels first, then largest error, then leftmost.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .at_floor
            .cmp(&self.at_floor)
            .then(self.error.total_cmp(&other.error))
            .then(other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod_21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    let f_center = f(center);
    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK[10];
    let mut res_abs = res_kronrod.abs();

    for (j, wg) in WG.iter().enumerate() {
        let jtw = 2 * j + 1;
        let x = half * XGK[jtw];
        let (f1, f2) = (f(center - x), f(center + x));
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_gauss += wg * (f1 + f2);
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let x = half * XGK[jtwm1];
        let (f1, f2) = (f(center - x), f(center + x));
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_kronrod += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_kronrod - res_gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    let at_floor = res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && floor >= error;
    if at_floor {
        error = floor;
    }
    if !value.is_finite() || !error.is_finite() {
        return Err(Error::domain(format!(
            "integrand is not finite on [{a}, {b}]"
        )));
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        at_floor: at_floor || error == 0.0,
    })
}

fn summarize(panels: &[Panel], evaluations: usize) -> QuadratureResult {
    let mut sorted: Vec<&Panel> = panels.iter().collect();
    sorted.sort_by(|x, y| x.a.total_cmp(&y.a));
    QuadratureResult {
        value: sorted.iter().map(|p| p.value).sum(),
        abs_error_estimate: sorted.iter().map(|p| p.error).sum(),
        evaluations,
    }
}

/// Adaptive estimate of `∫_a^b f`.
///
/// Fails with [`Error::Convergence`] (carrying the best estimate) when the
/// tolerance is not met within `max_subdivisions` bisections, or earlier
/// once every remaining panel is limited by round-off.
pub fn quadrature<F>(mut f: F, a: f64, b: f64, config: &QuadratureConfig) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    config.validate()?;
    if !a.is_finite() || !b.is_finite() || a >= b {
        return Err(Error::domain(format!("quadrature requires finite a < b, got [{a}, {b}]")));
    }
    let tolerance = |value: f64| config.abs_tol.max(config.rel_tol * value.abs());

    let first = gauss_kronrod_21(&mut f, a, b)?;
    let mut evaluations = KRONROD_POINTS;
    let mut total_value = first.value;
    let mut total_error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 0usize;

    while total_error > tolerance(total_value) {
        let worst = *heap.peek().expect("heap holds at least one panel");
        if worst.at_floor {
            let panels = heap.into_vec();
            return Err(Error::Convergence {
                best: summarize(&panels, evaluations),
                reason: "round-off limits the attainable accuracy".into(),
            });
        }
        if subdivisions >= config.max_subdivisions {
            let panels = heap.into_vec();
            return Err(Error::Convergence {
                best: summarize(&panels, evaluations),
                reason: format!("max_subdivisions = {} exhausted", config.max_subdivisions),
            });
        }
        heap.pop();
        let mid = 0.5 * (worst.a + worst.b);
        let left = gauss_kronrod_21(&mut f, worst.a, mid)?;
        let right = gauss_kronrod_21(&mut f, mid, worst.b)?;
        evaluations += 2 * KRONROD_POINTS;
        subdivisions += 1;
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            let panels = heap.into_vec();
            return Err(Error::Convergence {
                best: summarize(&panels, evaluations),
                reason: "interval width reached machine precision".into(),
            });
        }
    }

    let panels = heap.into_vec();
    let result = summarize(&panels, evaluations);
    if result.abs_error_estimate > tolerance(result.value) {
        // The running totals drifted from the exact panel sums; re-check.
        return Err(Error::Convergence {
            best: result,
            reason: "error estimate above tolerance after final summation".into(),
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = quadrature(|x| x * x, 0.0, 1.0, &QuadratureConfig::default()).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() <= r.abs_error_estimate);
        assert!((r.value - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.evaluations > 0);
    }

    #[test]
    fn cosine_over_full_period() {
        let cfg = QuadratureConfig {
            abs_tol: 1e-12,
            ..Default::default()
        };
        let r = quadrature(f64::cos, 0.0, 2.0 * PI, &cfg).unwrap();
        assert!(r.value.abs() <= r.abs_error_estimate);
        assert!(r.value.abs() <= cfg.abs_tol);
    }

    #[test]
    fn cosine_below_roundoff_floor_fails_fast() {
        // 1e-16 absolute is below what double precision can certify here.
        let cfg = QuadratureConfig {
            abs_tol: 1e-16,
            rel_tol: 1e-16,
            max_subdivisions: 1_000_000,
        };
        match quadrature(f64::cos, 0.0, 2.0 * PI, &cfg) {
            Err(Error::Convergence { best, .. }) => {
                assert!(best.value.abs() < 1e-12);
                assert!(best.evaluations < 1_000_000);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn peaked_integrand_refines() {
        // ∫_0^1 1/(1e-4 + (x-0.3)²) = 100 (atan(70) + atan(30))
        let want = 100.0 * (70f64.atan() + 30f64.atan());
        let r = quadrature(|x| 1.0 / (1e-4 + (x - 0.3) * (x - 0.3)), 0.0, 1.0, &Default::default())
            .unwrap();
        assert!(((r.value - want) / want).abs() < 1e-10);
        assert!((r.value - want).abs() <= r.abs_error_estimate);
    }

    #[test]
    fn subdivision_cap_reports_best_estimate() {
        let cfg = QuadratureConfig {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_subdivisions: 1,
        };
        let err = quadrature(|x| 1.0 / (1e-6 + x * x), -1.0, 1.0, &cfg).unwrap_err();
        match err {
            Error::Convergence { best, reason } => {
                assert!(best.value > 0.0);
                assert!(best.abs_error_estimate > 0.0);
                assert!(reason.contains("max_subdivisions"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            quadrature(|x| x, 1.0, 0.0, &Default::default()),
            Err(Error::Domain(_))
        ));
        let bad = QuadratureConfig {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(matches!(quadrature(|x| x, 0.0, 1.0, &bad), Err(Error::InvalidConfig(_))));
        let bad = QuadratureConfig {
            max_subdivisions: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(quadrature(|_| f64::NAN, 0.0, 1.0, &Default::default()).is_err());
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let f = |x: f64| (x.sin() * 30.0).exp();
        let a = quadrature(f, 0.0, 3.0, &Default::default()).unwrap();
        let b = quadrature(f, 0.0, 3.0, &Default::default()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.abs_error_estimate.to_bits(), b.abs_error_estimate.to_bits());
    }
}
