//! Floating-point routes: special functions, unit-circle integrands,
//! adaptive quadrature and the closed-form large-`n` estimates.

mod gamma;
mod integrand;
mod quadrature;

pub use gamma::{
    harmonic, ln_gamma_real, ln_gamma_shift_ratio, log_gamma, recip_gamma_abs_sq,
    weierstrass_limit, weierstrass_partial, AnalyticConstants,
};
pub use integrand::{
    asymptotic_probability, integrand, kernel_integral, kernel_integral_over, laplace_estimate,
    quadrature_probability, Integrand, IntegrandKind,
};
pub use quadrature::{quadrature, QuadratureConfig, QuadratureResult};
