//! Unit-circle integrands for the collision probability and the routes built
//! on them.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gamma::{ln_gamma_shift_ratio, recip_gamma_abs_sq};
use super::quadrature::{quadrature, QuadratureConfig, QuadratureResult};
use crate::error::{Error, Result};

/// Which integrand to evaluate on `θ ∈ [0, 2π]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrandKind {
    /// `|Π_{j<n}(e^{iθ}+j)|² / (n!)²`, one logarithm per factor.
    ExactProduct,
    /// The same quantity through `Π_{j<n}(z+j) = Γ(z+n)/Γ(z)`, `O(1)` per
    /// evaluation.
    GammaRatio,
    /// `e^{2(cos θ - 1) ln n} / |Γ(e^{iθ})|²`, for real `n > 1`.
    Eq2Kernel,
}

impl fmt::Display for IntegrandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntegrandKind::ExactProduct => "exact_product",
            IntegrandKind::GammaRatio => "gamma_ratio",
            IntegrandKind::Eq2Kernel => "eq2_kernel",
        })
    }
}

impl FromStr for IntegrandKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact_product" | "exact-product" | "product" => Ok(IntegrandKind::ExactProduct),
            "gamma_ratio" | "gamma-ratio" | "gamma" => Ok(IntegrandKind::GammaRatio),
            "eq2_kernel" | "eq2-kernel" | "kernel" => Ok(IntegrandKind::Eq2Kernel),
            other => Err(Error::config(format!("unknown integrand kind {other:?}"))),
        }
    }
}

/// An integrand bound to a particular `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrand {
    kind: IntegrandKind,
    n: f64,
    /// `ln n`, used by the kernel only.
    ln_n: f64,
}

impl Integrand {
    /// `n` must be a positive integer for the two product forms and a real
    /// number above one for the kernel.
    pub fn new(kind: IntegrandKind, n: f64) -> Result<Self> {
        match kind {
            IntegrandKind::ExactProduct | IntegrandKind::GammaRatio => {
                if !(n >= 1.0 && n.fract() == 0.0 && n < 2f64.powi(53)) {
                    return Err(Error::domain(format!(
                        "{kind} integrand needs a positive integer n, got {n}"
                    )));
                }
            }
            IntegrandKind::Eq2Kernel => {
                if !(n > 1.0 && n.is_finite()) {
                    return Err(Error::domain(format!("{kind} integrand needs n > 1, got {n}")));
                }
            }
        }
        Ok(Self {
            kind,
            n,
            ln_n: n.ln(),
        })
    }

    pub fn kind(&self) -> IntegrandKind {
        self.kind
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// Value at `θ`, which must lie in `[0, 2π]`.
    pub fn eval(&self, theta: f64) -> Result<f64> {
        if !(0.0..=TAU).contains(&theta) {
            return Err(Error::domain(format!("theta = {theta} outside [0, 2π]")));
        }
        Ok(self.eval_unchecked(theta))
    }

    /// Value at `θ` without the range check; used inside quadrature.
    pub fn eval_unchecked(&self, theta: f64) -> f64 {
        match self.kind {
            IntegrandKind::ExactProduct => exact_product(self.n as u64, theta),
            IntegrandKind::GammaRatio => gamma_ratio(self.n as u64, theta),
            IntegrandKind::Eq2Kernel => {
                let s = (0.5 * theta).sin();
                // 2(cos θ - 1) = -4 sin²(θ/2)
                (-4.0 * s * s * self.ln_n).exp() * recip_gamma_abs_sq(theta)
            }
        }
    }
}

/// Value of `kind` for the given `n` at `θ ∈ [0, 2π]`.
pub fn integrand(kind: IntegrandKind, n: f64, theta: f64) -> Result<f64> {
    Integrand::new(kind, n)?.eval(theta)
}

/// `Σ_{j=1}^{n-1} ln(|e^{iθ}+j|² / (j+1)²)`, exponentiated.
///
/// The `j = 0` factor has modulus one. Each term is a ratio in `[0, 1]`
/// formed without cancellation: around `θ = 0` through
/// `|z+j|² = (j+1)² - 4j sin²(θ/2)`, around `θ = π` through
/// `|z+j|² = (j-1)² + 4j cos²(θ/2)`.
fn exact_product(n: u64, theta: f64) -> f64 {
    let mut log_sum = 0.0;
    if theta.cos() >= 0.0 {
        let s = (0.5 * theta).sin();
        let s2 = s * s;
        for j in 1..n {
            let jf = j as f64;
            let jp1 = jf + 1.0;
            log_sum += (-4.0 * jf * s2 / (jp1 * jp1)).ln_1p();
        }
    } else {
        // d = θ - π; cos²(θ/2) = sin²(d/2)
        let half = 0.5 * (theta - PI);
        let t = half.sin();
        let t2 = t * t;
        let u = half.cos();
        let u2 = u * u;
        if n >= 2 {
            // j = 1: |z+1|² / 4 = cos²(θ/2)
            log_sum += t2.ln();
        }
        for j in 2..n {
            let jf = j as f64;
            let jp1 = jf + 1.0;
            // ((j-1)² + 4j t²) / (j+1)² = 1 - 4j (1 - t²) / (j+1)²
            log_sum += (-4.0 * jf * u2 / (jp1 * jp1)).ln_1p();
        }
    }
    log_sum.exp()
}

/// `|Γ(z+n)/Γ(z)|² / (n!)²` with `z = e^{iθ}`, written as
/// `exp(2 Re[ln Γ(n+z) - ln Γ(n+1)]) / |Γ(z)|²` so that the pole of `Γ` at
/// `z = -1` only ever appears through the entire function `1/Γ`.
fn gamma_ratio(n: u64, theta: f64) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let kernel = recip_gamma_abs_sq(theta);
    if kernel == 0.0 {
        return 0.0;
    }
    let z = Complex64::new(theta.cos(), theta.sin());
    (2.0 * ln_gamma_shift_ratio(n, z).re).exp() * kernel
}

/// `∫_0^{2π} e^{2(cos θ-1) ln n} / |Γ(e^{iθ})|² dθ`, computed as twice the
/// integral over `[0, π]`.
pub fn kernel_integral(n: f64, config: &QuadratureConfig) -> Result<QuadratureResult> {
    if !(n >= 2.0 && n.is_finite()) {
        return Err(Error::domain(format!("kernel integral needs n >= 2, got {n}")));
    }
    let f = Integrand::new(IntegrandKind::Eq2Kernel, n)?;
    Ok(quadrature(|t| f.eval_unchecked(t), 0.0, PI, config)
        .map_err(|e| scale_error(e, 2.0))?
        .scaled(2.0))
}

/// [`kernel_integral`] over an arbitrary sub-range of `[0, 2π]`, without
/// the symmetry fold.
pub fn kernel_integral_over(
    n: f64,
    a: f64,
    b: f64,
    config: &QuadratureConfig,
) -> Result<QuadratureResult> {
    if !(0.0 <= a && b <= TAU) {
        return Err(Error::domain(format!("range [{a}, {b}] not within [0, 2π]")));
    }
    let f = Integrand::new(IntegrandKind::Eq2Kernel, n)?;
    quadrature(|t| f.eval_unchecked(t), a, b, config)
}

/// Collision probability by the unit-circle mean
/// `(1/2π) ∫_0^{2π} |Π_{j<n}(e^{iθ}+j)|² / (n!)² dθ`.
///
/// This is an identity, not an approximation: it reproduces the exact value
/// up to the quadrature tolerance.
pub fn quadrature_probability(
    n: u64,
    kind: IntegrandKind,
    config: &QuadratureConfig,
) -> Result<QuadratureResult> {
    if kind == IntegrandKind::Eq2Kernel {
        return Err(Error::domain(
            "quadrature_probability takes the exact_product or gamma_ratio integrand",
        ));
    }
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let f = Integrand::new(kind, n as f64)?;
    // (1/2π)·2·∫_0^π
    Ok(quadrature(|t| f.eval_unchecked(t), 0.0, PI, config)
        .map_err(|e| scale_error(e, 1.0 / PI))?
        .scaled(1.0 / PI))
}

fn scale_error(e: Error, factor: f64) -> Error {
    match e {
        Error::Convergence { best, reason } => Error::Convergence {
            best: best.scaled(factor),
            reason,
        },
        other => other,
    }
}

fn check_log_positive(n: f64) -> Result<f64> {
    if n > 1.0 && n.is_finite() {
        Ok(n.ln())
    } else {
        Err(Error::domain(format!("need finite n > 1, got {n}")))
    }
}

/// Large-`n` estimate of [`kernel_integral`]: `√(π / ln n)`.
pub fn laplace_estimate(n: f64) -> Result<f64> {
    let ln_n = check_log_positive(n)?;
    Ok((PI / ln_n).sqrt())
}

/// Large-`n` estimate of the collision probability: `1 / (2√(π ln n))`.
pub fn asymptotic_probability(n: f64) -> Result<f64> {
    let ln_n = check_log_positive(n)?;
    Ok(0.5 / (PI * ln_n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn integrand_examples() {
        let one = integrand(IntegrandKind::ExactProduct, 2.0, 0.0).unwrap();
        assert!((one - 1.0).abs() < 1e-15);
        assert_eq!(integrand(IntegrandKind::ExactProduct, 2.0, PI).unwrap(), 0.0);
        assert_eq!(integrand(IntegrandKind::GammaRatio, 2.0, PI).unwrap(), 0.0);
        let k = integrand(IntegrandKind::Eq2Kernel, E, 0.0).unwrap();
        assert!((k - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exact_product_against_direct_complex_product() {
        // Plain complex multiplication is a fine oracle while |Π| stays
        // inside f64 range.
        for n in [1u64, 2, 3, 7, 30, 80] {
            for i in 0..64 {
                let theta = (i as f64 + 0.25) * TAU / 64.0;
                let z = Complex64::new(theta.cos(), theta.sin());
                let mut prod = Complex64::new(1.0, 0.0);
                let mut fact = 1.0f64;
                for j in 0..n {
                    prod *= z + j as f64;
                    fact *= (j + 1) as f64;
                }
                let want = prod.norm_sqr() / (fact * fact);
                let got = integrand(IntegrandKind::ExactProduct, n as f64, theta).unwrap();
                assert!(
                    (got - want).abs() <= 1e-12 * want + 1e-300,
                    "n={n} θ={theta}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn gamma_ratio_matches_exact_product() {
        let samples: Vec<f64> = (0..32).map(|i| (i as f64 + 0.5) * TAU / 32.0).collect();
        for n in [1u64, 2, 5, 15, 16, 17, 50, 10_000] {
            for &theta in &samples {
                let a = integrand(IntegrandKind::ExactProduct, n as f64, theta).unwrap();
                let b = integrand(IntegrandKind::GammaRatio, n as f64, theta).unwrap();
                assert!(((a - b) / a).abs() <= 1e-10, "n={n} θ={theta}: {a} vs {b}");
            }
        }
        let a = integrand(IntegrandKind::ExactProduct, 50.0, 1.0).unwrap();
        let b = integrand(IntegrandKind::GammaRatio, 50.0, 1.0).unwrap();
        assert!(((a - b) / a).abs() <= 1e-10);
    }

    #[test]
    fn integrand_domain_errors() {
        assert!(integrand(IntegrandKind::ExactProduct, 2.0, -0.1).is_err());
        assert!(integrand(IntegrandKind::ExactProduct, 2.0, 7.0).is_err());
        assert!(integrand(IntegrandKind::ExactProduct, 0.0, 1.0).is_err());
        assert!(integrand(IntegrandKind::GammaRatio, 2.5, 1.0).is_err());
        assert!(integrand(IntegrandKind::Eq2Kernel, 1.0, 1.0).is_err());
        assert!(integrand(IntegrandKind::ExactProduct, 2.0, TAU).is_ok());
    }

    #[test]
    fn probability_small_n() {
        let cfg = QuadratureConfig::default();
        for kind in [IntegrandKind::ExactProduct, IntegrandKind::GammaRatio] {
            let p1 = quadrature_probability(1, kind, &cfg).unwrap();
            assert!((p1.value - 1.0).abs() < 1e-13);
            let p2 = quadrature_probability(2, kind, &cfg).unwrap();
            assert!((p2.value - 0.5).abs() < 1e-13);
            assert!((p2.value - 0.5).abs() <= p2.abs_error_estimate.max(1e-15));
            let p3 = quadrature_probability(3, kind, &cfg).unwrap();
            assert!((p3.value - 7.0 / 18.0).abs() < 1e-12);
        }
        assert!(quadrature_probability(0, IntegrandKind::ExactProduct, &cfg).is_err());
        assert!(quadrature_probability(5, IntegrandKind::Eq2Kernel, &cfg).is_err());
    }

    #[test]
    fn parseval_mean_for_two_letters_by_hand() {
        // (1/2π)∫ (2 + 2cos θ)/4 dθ = 1/2
        let r = quadrature(
            |t| integrand(IntegrandKind::ExactProduct, 2.0, t).unwrap(),
            0.0,
            TAU,
            &QuadratureConfig::default(),
        )
        .unwrap()
        .scaled(1.0 / TAU);
        assert!((r.value - 0.5).abs() <= r.abs_error_estimate);
    }

    #[test]
    fn closed_forms() {
        assert!((laplace_estimate(E).unwrap() - PI.sqrt()).abs() < 1e-15);
        assert!((laplace_estimate(E.powi(4)).unwrap() - 0.886_226_925_452_758).abs() < 1e-14);
        #[allow(clippy::excessive_precision)]
        let lap100 = 0.825_946_836_618_992_490_07;
        assert!((laplace_estimate(100.0).unwrap() - lap100).abs() < 1e-15);
        assert!((asymptotic_probability(E).unwrap() - 0.282_094_791_773_878_14).abs() < 1e-15);
        #[allow(clippy::excessive_precision)]
        let asym10 = 0.185_903_353_321_606_618_86;
        assert!((asymptotic_probability(10.0).unwrap() - asym10).abs() < 1e-15);
        for bad in [1.0, 0.5, -3.0, f64::NAN, f64::INFINITY] {
            assert!(laplace_estimate(bad).is_err());
            assert!(asymptotic_probability(bad).is_err());
        }
    }

    #[test]
    fn asymptotic_and_laplace_are_linked() {
        for n in [1.5, E, 10.0, 100.0, 1e4, 1e8, 1e300] {
            let lhs = asymptotic_probability(n).unwrap() * TAU;
            let rhs = laplace_estimate(n).unwrap();
            assert!(((lhs - rhs) / rhs).abs() <= 1e-15, "n={n}");
        }
    }

    #[test]
    fn kernel_integral_symmetry_and_trend() {
        let cfg = QuadratureConfig::default();
        let folded = kernel_integral(100.0, &cfg).unwrap();
        let full = kernel_integral_over(100.0, 0.0, TAU, &cfg).unwrap();
        assert!((folded.value - full.value).abs() <= folded.abs_error_estimate + full.abs_error_estimate);
        #[allow(clippy::excessive_precision)]
        let reference = 0.950_335_588_625_627_036_685;
        assert!(((folded.value - reference) / reference).abs() < 1e-10);
        assert!(kernel_integral(1.5, &cfg).is_err());
    }
}
