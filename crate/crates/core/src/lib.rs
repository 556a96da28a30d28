//! Probability that two independent uniform random permutations of `n`
//! letters have the same number of cycles.
//!
//! The crate computes this probability four independent ways and
//! cross-checks them:
//!
//! * [`exact`]: arbitrary-precision Stirling cycle numbers and the exact
//!   reduced rational `Σ_k [n k]² / (n!)²`.
//! * [`analytic`]: the mean of `|Π_{j<n}(e^{iθ}+j)|² / (n!)²` over the unit
//!   circle by adaptive Gauss–Kronrod quadrature, the Gamma-kernel integral
//!   and its closed-form large-`n` estimate `1 / (2√(π log n))`.
//! * [`montecarlo`]: seeded, parallel, reproducible simulation.
//! * [`report`] and [`verify`]: convergence tables and the acceptance suite.

pub mod analytic;
pub mod error;
pub mod exact;
pub mod montecarlo;
pub mod report;
pub mod verify;

pub use analytic::{
    asymptotic_probability, harmonic, integrand, kernel_integral, laplace_estimate, log_gamma,
    quadrature, quadrature_probability, recip_gamma_abs_sq, weierstrass_partial,
    AnalyticConstants, Integrand, IntegrandKind, QuadratureConfig, QuadratureResult,
};
pub use error::{Error, Result};
pub use exact::{
    collision_probability, cycle_distribution, rising_factorial, squared_row_sum, stirling_row,
    CycleDistribution, ExactProbability, StirlingRow, StirlingRows,
};
pub use montecarlo::{estimate_collision, sample_cycle_count, McEstimate, SamplerKind, Seed};
pub use report::{run_report, CollisionReportRow, Method, OutputFormat, ReportConfig};
pub use verify::{run_verify, VerifyOptions, VerifySummary};
