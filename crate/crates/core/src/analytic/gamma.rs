//! Log-Gamma on the right half-plane and around the unit circle, the
//! reciprocal-Gamma kernel, the partial Weierstrass product and harmonic
//! numbers.
//!
//! `log_gamma` uses the Lanczos approximation with `g = 7` and the nine
//! coefficients published by Godfrey (the set used by Numerical Recipes and
//! most open-source ports). For `Re z < 1/2` the reflection formula is
//! applied with a `2πi` correction so the imaginary part follows the
//! continuous branch that agrees with `ln Γ(x)` on the positive real axis.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Mathematical constants used by the analytic routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyticConstants;

impl AnalyticConstants {
    /// Euler–Mascheroni constant, 40 significant digits.
    pub const EULER_GAMMA_TEXT: &'static str = "0.5772156649015328606065120900824024310422";

    #[allow(clippy::excessive_precision)]
    pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431_042_2;
}

const LANCZOS_G: f64 = 7.0;

#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Lanczos sum for `Re z >= 1/2`.
fn lanczos_ln_gamma(z: Complex64) -> Complex64 {
    let zm1 = z - 1.0;
    let mut series = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (zm1 + i as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (zm1 + 0.5) * t.ln() - t + series.ln()
}

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0
}

/// Principal branch of `ln Γ(z)`.
///
/// Accurate to about `1e-13` relative (absolute near the zeros at `z = 1`
/// and `z = 2`) for `Re z ∈ [-1/2, 1e9]` and `|Im z| ≤ 2`.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain(format!("log_gamma argument {z} is not finite")));
    }
    if is_pole(z) {
        return Err(Error::domain(format!("log_gamma has a pole at {}", z.re)));
    }
    if z.re >= 0.5 {
        return Ok(lanczos_ln_gamma(z));
    }
    let sin_pi_z = (PI * z).sin();
    let branch = (0.5 * z.re + 0.25).floor() * 2.0 * PI * 1f64.copysign(z.im);
    Ok(LN_PI - sin_pi_z.ln() - lanczos_ln_gamma(1.0 - z) + Complex64::new(0.0, branch))
}

/// `ln Γ(x)` for real `x > 0`.
pub fn ln_gamma_real(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    lanczos_ln_gamma(Complex64::new(x, 0.0)).re
}

/// `1 / |Γ(e^{iθ})|²`.
///
/// Evaluated through `1/Γ(z) = z (z+1) / Γ(z+2)`, which keeps the Lanczos
/// sum on `Re ≥ 1` and makes the factor `|1 + e^{iθ}|² = 4 sin²((θ-π)/2)`
/// explicit. At `θ = π` the result is exactly zero.
pub fn recip_gamma_abs_sq(theta: f64) -> f64 {
    let z = Complex64::new(theta.cos(), theta.sin());
    let half = 0.5 * (theta - PI);
    let s = half.sin();
    let one_plus_z_sq = 4.0 * s * s;
    if one_plus_z_sq == 0.0 {
        return 0.0;
    }
    one_plus_z_sq * (-2.0 * lanczos_ln_gamma(z + 2.0).re).exp()
}

/// `ln(1 + u) - u` without cancellation for small `|u|`.
fn ln1p_minus_id(u: Complex64) -> Complex64 {
    if u.norm() < 0.1 {
        // -u²/2 + u³/3 - u⁴/4 + …
        let mut power = u * u;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut k = 2.0;
        loop {
            let sign = if (k as i64) % 2 == 0 { -1.0 } else { 1.0 };
            let term = power * (sign / k);
            sum += term;
            if term.norm() <= 1e-18 * sum.norm() {
                break;
            }
            power *= u;
            k += 1.0;
        }
        sum
    } else {
        (1.0 + u).ln() - u
    }
}

/// `z · Π_{r=1}^{terms} (1 + z/r) e^{-z/r}`.
///
/// As `terms → ∞` this tends to `e^{-γz} / Γ(z)`; the truncation error is
/// `O(|z|² / terms)`.
pub fn weierstrass_partial(z: Complex64, terms: u64) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::domain("weierstrass_partial requires z != 0"));
    }
    if terms == 0 {
        return Err(Error::domain("weierstrass_partial requires at least one term"));
    }
    let log_sum: Complex64 = (1..=terms)
        .map(|r| ln1p_minus_id(z / r as f64))
        .sum();
    Ok(z * log_sum.exp())
}

/// The limit of [`weierstrass_partial`], `e^{-γz} / Γ(z)`, through
/// [`log_gamma`].
pub fn weierstrass_limit(z: Complex64) -> Result<Complex64> {
    Ok((-AnalyticConstants::EULER_GAMMA * z - log_gamma(z)?).exp())
}

const HARMONIC_DIRECT_LIMIT: u64 = 1_000_000;

/// `H_m = Σ_{r=1}^{m} 1/r`.
///
/// Compensated summation up to `m = 10⁶`; above that the asymptotic
/// expansion `ln m + γ + 1/(2m) - 1/(12m²) + 1/(120m⁴)`.
pub fn harmonic(m: u64) -> f64 {
    if m <= HARMONIC_DIRECT_LIMIT {
        // Neumaier summation, smallest terms first.
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for r in (1..=m).rev() {
            let term = 1.0 / r as f64;
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        sum + comp
    } else {
        let x = m as f64;
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        x.ln() + AnalyticConstants::EULER_GAMMA + 0.5 * inv - inv2 / 12.0 + inv2 * inv2 / 120.0
    }
}

/// Coefficients `B_{2k} / (2k (2k-1))` of the Stirling series.
const STIRLING_SERIES: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

fn stirling_tail(w: Complex64) -> Complex64 {
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut power = inv;
    let mut sum = Complex64::new(0.0, 0.0);
    for &c in &STIRLING_SERIES {
        sum += c * power;
        power *= inv2;
    }
    sum
}

/// Complex `ln(1 + u)` accurate for small `|u|`.
fn ln1p(u: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * u.re + u.norm_sqr()).ln_1p();
    let im = u.im.atan2(1.0 + u.re);
    Complex64::new(re, im)
}

const SHIFT_DIRECT_LIMIT: u64 = 16;

/// `ln Γ(n + z) - ln Γ(n + 1)` for integer `n ≥ 2` and `|z| ≤ 1`.
///
/// For large `n` the difference is formed directly from the Stirling series
/// so that the two `O(n log n)` terms never have to be subtracted.
pub fn ln_gamma_shift_ratio(n: u64, z: Complex64) -> Complex64 {
    debug_assert!(n >= 2);
    if n < SHIFT_DIRECT_LIMIT {
        let nf = n as f64;
        return lanczos_ln_gamma(z + nf) - ln_gamma_real(nf + 1.0);
    }
    let w0 = n as f64 + 1.0;
    let delta = z - 1.0;
    let w1 = w0 + delta;
    delta * w0.ln() + (w1 - 0.5) * ln1p(delta / w0) - delta + stirling_tail(w1)
        - stirling_tail(Complex64::new(w0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(got: f64, want: f64, tol: f64) -> bool {
        (got - want).abs() <= tol * want.abs().max(1.0)
    }

    #[test]
    fn euler_gamma_literal_matches_text() {
        let parsed: f64 = AnalyticConstants::EULER_GAMMA_TEXT.parse().unwrap();
        assert_eq!(parsed, AnalyticConstants::EULER_GAMMA);
        assert!(AnalyticConstants::EULER_GAMMA_TEXT.len() >= 32);
    }

    #[test]
    fn log_gamma_simple_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        assert!(log_gamma(c(2.0, 0.0)).unwrap().norm() < 1e-15);
        let half = log_gamma(c(0.5, 0.0)).unwrap();
        assert!(close(half.re, 0.5 * PI.ln(), 1e-14));
        let three = log_gamma(c(3.0, 0.0)).unwrap();
        assert!(close(three.re, std::f64::consts::LN_2, 1e-14));
    }

    #[test]
    fn log_gamma_reference_values() {
        // (z, ln Γ(z)) from a 40-digit reference evaluation.
        #[allow(clippy::excessive_precision)]
        let table = [
            (c(1.0, 1.0), c(-0.650_923_199_301_856_338_89, -0.301_640_320_467_533_197_89)),
            (c(-0.4, 1.5), c(-1.838_519_484_623_382_702_9, -2.540_976_665_093_998_652)),
            (c(-0.5, 0.3), c(0.916_425_956_296_170_385_44, -3.126_984_599_978_374_229_1)),
            (c(2.5, -2.0), c(-0.582_905_640_710_940_423_18, -1.660_575_899_692_610_108_6)),
            (c(10.0, 0.5), c(12.788_687_722_901_191_677, 1.126_106_309_590_198_548_8)),
            (c(1e6, 1.0), c(12_815_504.569_147_111_66, 13.815_510_057_964_357_438)),
            (c(1e9, -2.0), c(19_723_265_827.503_716_769, -41.446_531_672_892_822_313)),
            (c(0.3, -0.1), c(1.037_456_438_411_642_666_5, 0.338_470_474_330_829_173_29)),
            (
                c(-0.416_146_836_547_142_39, 0.909_297_426_825_681_7),
                c(-0.523_981_521_574_503_435_98, -2.819_051_124_467_956_850_2),
            ),
            (
                c(-0.989_992_496_600_445_46, 0.141_120_008_059_867_22),
                c(1.933_901_066_297_509_077_9, -4.578_065_135_080_217_750_8),
            ),
        ];
        for (z, want) in table {
            let got = log_gamma(z).unwrap();
            assert!(close(got.re, want.re, 1e-13), "Re lnΓ({z}) = {} want {}", got.re, want.re);
            assert!(close(got.im, want.im, 1e-13), "Im lnΓ({z}) = {} want {}", got.im, want.im);
        }
    }

    #[test]
    fn log_gamma_poles() {
        for x in [0.0, -1.0, -2.0, -7.0] {
            assert!(matches!(log_gamma(c(x, 0.0)), Err(Error::Domain(_))));
        }
        assert!(log_gamma(c(f64::NAN, 0.0)).is_err());
        assert!(log_gamma(c(-1.0, 1e-3)).is_ok());
    }

    #[test]
    fn recip_gamma_kernel_values() {
        assert!((recip_gamma_abs_sq(0.0) - 1.0).abs() < 1e-14);
        assert!((recip_gamma_abs_sq(2.0 * PI) - 1.0).abs() < 1e-14);
        assert_eq!(recip_gamma_abs_sq(PI), 0.0);
        #[allow(clippy::excessive_precision)]
        let refs = [
            (0.5, 1.285_931_372_814_021_729_7),
            (1.0, 2.294_523_644_801_787_385_9),
            (2.0, 2.851_836_130_490_489_597_2),
            (2.9, 0.065_550_237_708_654_740_478),
            (3.1, 0.001_736_347_305_231_562_807),
        ];
        for (theta, want) in refs {
            let got = recip_gamma_abs_sq(theta);
            assert!(((got - want) / want).abs() < 1e-13, "θ={theta}: {got} vs {want}");
        }
    }

    #[test]
    fn weierstrass_examples() {
        let one = c(1.0, 0.0);
        let two_over_e = weierstrass_partial(one, 1).unwrap();
        assert!((two_over_e.re - 2.0 / std::f64::consts::E).abs() < 1e-15);
        #[allow(clippy::excessive_precision)]
        let exp_neg_gamma = 0.561_459_483_566_885_169_82;
        #[allow(clippy::excessive_precision)]
        let exp_neg_2gamma = 0.315_236_751_687_193_398_06;
        assert!((weierstrass_limit(one).unwrap().re - exp_neg_gamma).abs() < 1e-14);
        assert!((weierstrass_limit(c(2.0, 0.0)).unwrap().re - exp_neg_2gamma).abs() < 1e-14);
        let partial = weierstrass_partial(one, 1_000_000).unwrap();
        assert!((partial.re - exp_neg_gamma).abs() < 1e-6);
        assert!(weierstrass_partial(c(0.0, 0.0), 10).is_err());
        assert!(weierstrass_partial(one, 0).is_err());
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(0), 0.0);
        assert_eq!(harmonic(1), 1.0);
        assert!((harmonic(3) - 11.0 / 6.0).abs() < 1e-15);
        #[allow(clippy::excessive_precision)]
        let refs = [
            (10u64, 2.928_968_253_968_253_968_3),
            (1000, 7.485_470_860_550_344_912_7),
            (1_000_000, 14.392_726_722_865_723_631_38),
            (10_000_000, 16.695_311_365_859_851_815_4),
            (1_000_000_000_000, 28.208_236_780_830_581_068_82),
        ];
        for (m, want) in refs {
            assert!(((harmonic(m) - want) / want).abs() < 2e-16 * 4.0, "H_{m}");
        }
        // no visible seam at the switch-over
        assert!((harmonic(1_000_001) - harmonic(1_000_000) - 1.0 / 1_000_001.0).abs() < 1e-14);
    }

    #[test]
    fn shift_ratio_matches_direct_difference() {
        for &n in &[2u64, 15, 16, 20, 50, 200] {
            for &theta in &[0.0, 0.7, 2.0, 3.0] {
                let z = c(f64::cos(theta), f64::sin(theta));
                let direct = log_gamma(z + n as f64).unwrap() - ln_gamma_real(n as f64 + 1.0);
                let shifted = ln_gamma_shift_ratio(n, z);
                assert!((direct - shifted).norm() < 1e-12, "n={n} θ={theta}");
            }
        }
    }

    proptest! {
        #[test]
        fn recurrence_holds(re in 0.5f64..30.0, im in -2.0f64..2.0) {
            let z = c(re, im);
            let lhs = log_gamma(z + 1.0).unwrap();
            let rhs = log_gamma(z).unwrap() + z.ln();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
        }

        #[test]
        fn reflection_branch_is_continuous(re in -0.5f64..0.49, im in 0.05f64..2.0) {
            // Stepping across the reflection seam must not jump by 2πi.
            let a = log_gamma(c(re, im)).unwrap();
            let b = log_gamma(c(re + 1e-6, im)).unwrap();
            prop_assert!((a - b).norm() < 1e-4);
        }

        #[test]
        fn kernel_is_nonnegative_and_symmetric(theta in 0.0f64..std::f64::consts::PI) {
            let a = recip_gamma_abs_sq(theta);
            let b = recip_gamma_abs_sq(2.0 * PI - theta);
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() <= 1e-10 * a + 1e-300);
        }
    }
}
