//! The acceptance suite: nine criteria tying the exact, integral,
//! asymptotic and Monte Carlo routes together.
//!
//! Each criterion reports its measured values and wall-clock time; a
//! criterion that overruns its time budget fails.

use std::fmt;
use std::time::{Duration, Instant};

use itertools::Itertools;
use num_bigint::BigUint;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::{
    asymptotic_probability, integrand, kernel_integral, laplace_estimate, quadrature_probability,
    weierstrass_limit, weierstrass_partial, IntegrandKind, QuadratureConfig,
};
use crate::error::Result;
use crate::exact::{cycle_distribution, factorial, stirling_row, StirlingRow};
use crate::montecarlo::{chi_square_test, count_cycles, cycle_histogram, estimate_collision, SamplerKind, Seed};
use crate::report::{render_csv, render_json, run_report, Method, ReportConfig};

/// Cycle count of every permutation of `n` letters, in lexicographic order.
pub fn enumerate_cycle_counts(n: usize) -> Vec<u64> {
    let mut seen = Vec::with_capacity(n);
    (0..n as u32)
        .permutations(n)
        .map(|p| count_cycles(&p, &mut seen))
        .collect()
}

/// Number of permutations of `n` letters with `k` cycles, at index `k - 1`.
pub fn cycle_histogram_by_enumeration(n: usize) -> Vec<u64> {
    let mut hist = vec![0u64; n];
    for k in enumerate_cycle_counts(n) {
        hist[k as usize - 1] += 1;
    }
    hist
}

/// Knobs for the suite. The defaults are the production configuration;
/// tests substitute a corrupted row source or a starved quadrature budget.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub row_source: fn(usize) -> Result<StirlingRow>,
    pub quad: QuadratureConfig,
    pub seed: Seed,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            row_source: stirling_row,
            quad: QuadratureConfig::default().with_rel_tol(1e-12),
            seed: Seed(0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "[{tag}] {}. {}: {} ({:.2} s",
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )?;
        match self.budget {
            Some(b) => write!(f, ", budget {} s)", b.as_secs()),
            None => write!(f, ")"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifySummary {
    pub outcomes: Vec<CriterionOutcome>,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        !self.outcomes.is_empty() && self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CriterionOutcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }
}

impl fmt::Display for VerifySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            writeln!(f, "{o}")?;
        }
        let passed = self.outcomes.iter().filter(|o| o.passed).count();
        write!(f, "{passed}/{} criteria passed", self.outcomes.len())
    }
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "brute-force Stirling rows"),
    (2, "row-sum identity"),
    (3, "quadrature matches exact"),
    (4, "integrand dual-route agreement"),
    (5, "Laplace estimate"),
    (6, "convergence to the asymptotic"),
    (7, "Monte Carlo consistency"),
    (8, "Weierstrass product"),
    (9, "table determinism"),
];

fn budget(id: u8) -> Option<Duration> {
    let secs = match id {
        1 => 5,
        2 => 30,
        3 => 60,
        4 => 10,
        5 => 30,
        6 => 60,
        7 => 60,
        8 => 10,
        _ => return None,
    };
    Some(Duration::from_secs(secs))
}

/// Runs one criterion by number (1 to 9).
pub fn run_criterion(id: u8, opts: &VerifyOptions) -> CriterionOutcome {
    let (_, name) = CRITERIA
        .iter()
        .copied()
        .find(|(i, _)| *i == id)
        .unwrap_or((id, "unknown criterion"));
    let start = Instant::now();
    let checked = match id {
        1 => brute_force_rows(opts),
        2 => row_sums(opts),
        3 => parseval(opts),
        4 => dual_route(),
        5 => laplace(opts),
        6 => theorem_trend(opts),
        7 => monte_carlo(opts),
        8 => weierstrass(),
        9 => determinism(opts),
        _ => Err(format!("no criterion {id}")),
    };
    let elapsed = start.elapsed();
    let budget = budget(id);
    let (mut passed, mut detail) = match checked {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if let Some(b) = budget {
        if elapsed > b {
            passed = false;
            detail.push_str("; over time budget");
        }
    }
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
        elapsed,
        budget,
    }
}

/// Runs all nine criteria in order.
pub fn run_verify(opts: &VerifyOptions) -> VerifySummary {
    VerifySummary {
        outcomes: CRITERIA.iter().map(|&(id, _)| run_criterion(id, opts)).collect(),
    }
}

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn brute_force_rows(opts: &VerifyOptions) -> Check {
    for n in 1..=8 {
        let row = (opts.row_source)(n).map_err(|e| format!("n = {n}: {e}"))?;
        let hist: Vec<BigUint> = cycle_histogram_by_enumeration(n)
            .into_iter()
            .map(BigUint::from)
            .collect();
        if row.coeffs() != hist.as_slice() {
            return Err(format!("n = {n}: row {:?} vs enumeration {:?}", row.coeffs(), hist));
        }
    }
    Ok("rows 1..=8 equal the enumerated histograms".into())
}

fn row_sums(opts: &VerifyOptions) -> Check {
    let bad: Vec<usize> = (1..=500usize)
        .into_par_iter()
        .filter(|&n| match (opts.row_source)(n) {
            Ok(row) => row.sum() != factorial(n),
            Err(_) => true,
        })
        .collect();
    match bad.first() {
        None => Ok("sum of row n equals n! for n = 1..=500".into()),
        Some(n) => Err(format!("{} rows fail, first at n = {n}", bad.len())),
    }
}

fn exact_from_rows(opts: &VerifyOptions, n: usize) -> std::result::Result<f64, String> {
    let row = (opts.row_source)(n).map_err(|e| e.to_string())?;
    Ok(row.collision_probability().approx())
}

fn parseval(opts: &VerifyOptions) -> Check {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for n in [2u64, 5, 10, 50, 100, 512] {
        let exact = exact_from_rows(opts, n as usize)?;
        match quadrature_probability(n, IntegrandKind::ExactProduct, &opts.quad) {
            Ok(q) => {
                let rel = (q.value - exact).abs() / exact;
                worst = worst.max(rel);
                if rel > 1e-9 {
                    failures.push(format!("n = {n}: rel {rel:.3e}"));
                }
            }
            Err(e) => failures.push(format!("n = {n}: {e}")),
        }
    }
    ensure(
        failures.is_empty(),
        format!("max relative error {worst:.3e} (limit 1e-9){}", join_failures(&failures)),
    )
}

fn join_failures(failures: &[String]) -> String {
    if failures.is_empty() {
        String::new()
    } else {
        format!("; {}", failures.join("; "))
    }
}

fn dual_route() -> Check {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for n in [10.0, 200.0, 1e4] {
        for i in 0..32 {
            let theta = (i as f64 + 0.5) * std::f64::consts::TAU / 32.0;
            let pair = integrand(IntegrandKind::ExactProduct, n, theta)
                .and_then(|a| integrand(IntegrandKind::GammaRatio, n, theta).map(|b| (a, b)));
            match pair {
                Ok((a, b)) => {
                    let rel = (a - b).abs() / a.abs().max(f64::MIN_POSITIVE);
                    worst = worst.max(rel);
                    if rel > 1e-9 {
                        failures.push(format!("n = {n}, theta = {theta:.4}: rel {rel:.3e}"));
                    }
                }
                Err(e) => failures.push(format!("n = {n}: {e}")),
            }
        }
    }
    ensure(
        failures.is_empty(),
        format!("max relative gap {worst:.3e} over 96 points (limit 1e-9){}", join_failures(&failures)),
    )
}

fn laplace(opts: &VerifyOptions) -> Check {
    let mut parts = Vec::new();
    let mut failures = Vec::new();
    for n in [1e2, 1e3, 1e4, 1e6] {
        let limit = 1.5 / f64::ln(n);
        match kernel_integral(n, &opts.quad) {
            Ok(i) => {
                let dev = (i.value / laplace_estimate(n).map_err(|e| e.to_string())? - 1.0).abs();
                parts.push(format!("n={n:e}: {dev:.4} <= {limit:.4}"));
                if dev > limit {
                    failures.push(format!("n = {n:e} deviation {dev:.4}"));
                }
            }
            Err(e) => failures.push(format!("n = {n:e}: {e}")),
        }
    }
    ensure(failures.is_empty(), format!("{}{}", parts.join(", "), join_failures(&failures)))
}

fn theorem_trend(opts: &VerifyOptions) -> Check {
    let mut ratios = Vec::new();
    let mut failures = Vec::new();
    for n in [100u64, 10_000, 1_000_000, 100_000_000] {
        match quadrature_probability(n, IntegrandKind::GammaRatio, &opts.quad) {
            Ok(q) => {
                let asym = asymptotic_probability(n as f64).map_err(|e| e.to_string())?;
                ratios.push(q.value / asym);
            }
            Err(e) => failures.push(format!("n = {n}: {e}")),
        }
    }
    let shown = ratios.iter().map(|r| format!("{r:.5}")).join(", ");
    if failures.is_empty() {
        if !ratios.windows(2).all(|w| w[0] > w[1]) {
            failures.push("ratios not strictly decreasing".into());
        }
        let last = ratios[ratios.len() - 1];
        if (last - 1.0).abs() > 0.1 {
            failures.push(format!("|r(1e8) - 1| = {:.4} > 0.1", (last - 1.0).abs()));
        }
    }
    ensure(
        failures.is_empty(),
        format!("r(1e2, 1e4, 1e6, 1e8) = [{shown}]{}", join_failures(&failures)),
    )
}

fn monte_carlo(opts: &VerifyOptions) -> Check {
    let mut parts = Vec::new();
    let mut failures = Vec::new();
    let exact = exact_from_rows(opts, 10)?;
    for kind in [SamplerKind::PermutationDirect, SamplerKind::BernoulliSum] {
        let est = estimate_collision(10, 1_000_000, kind, opts.seed).map_err(|e| e.to_string())?;
        let z = (est.p_hat - exact).abs() / est.std_err;
        parts.push(format!("{kind} p_hat {:.5} ({z:.2} SE)", est.p_hat));
        if z > 4.0 {
            failures.push(format!("{kind} estimate {z:.2} SE from exact"));
        }
    }
    let mut min_p = 1.0f64;
    for n in [2u64, 6, 12] {
        let probs = cycle_distribution(n as usize).map_err(|e| e.to_string())?.to_f64();
        for kind in [SamplerKind::PermutationDirect, SamplerKind::BernoulliSum] {
            let hist = cycle_histogram(n, 1_000_000, kind, opts.seed).map_err(|e| e.to_string())?;
            let test = chi_square_test(&hist, &probs).map_err(|e| e.to_string())?;
            min_p = min_p.min(test.p_value);
            if test.p_value < 1e-6 {
                failures.push(format!("{kind} n = {n}: chi-square p = {:.3e}", test.p_value));
            }
        }
    }
    parts.push(format!("min chi-square p {min_p:.3e}"));
    ensure(failures.is_empty(), format!("{}{}", parts.join(", "), join_failures(&failures)))
}

fn weierstrass() -> Check {
    let mut parts = Vec::new();
    let mut failures = Vec::new();
    for theta in [0.5f64, 1.0, 2.0] {
        let z = Complex64::from_polar(1.0, theta);
        let target = weierstrass_limit(z).map_err(|e| e.to_string())?;
        let rel = |r: u64| -> std::result::Result<f64, String> {
            let w = weierstrass_partial(z, r).map_err(|e| e.to_string())?;
            Ok((w - target).norm() / target.norm())
        };
        let at_1e5 = rel(100_000)?;
        let ladder = (0..8).map(|k| rel(1000 << k)).collect::<std::result::Result<Vec<_>, _>>()?;
        parts.push(format!("theta {theta}: {at_1e5:.2e}"));
        if at_1e5 > 1e-4 {
            failures.push(format!("theta = {theta}: error {at_1e5:.3e} at R = 1e5"));
        }
        if !ladder.windows(2).all(|w| w[1] < w[0]) {
            failures.push(format!("theta = {theta}: error does not shrink as R doubles"));
        }
    }
    ensure(failures.is_empty(), format!("{}{}", parts.join(", "), join_failures(&failures)))
}

fn determinism(opts: &VerifyOptions) -> Check {
    let config = ReportConfig {
        mc_pairs: 100_000,
        seed: opts.seed,
        quad: opts.quad,
        ..ReportConfig::new(vec![3, 10, 100, 1000], Method::ALL)
    };
    let render = || -> std::result::Result<(String, String), String> {
        let rows = run_report(&config).map_err(|e| e.to_string())?;
        Ok((render_csv(&rows), render_json(&rows, &config)))
    };
    let first = render()?;
    let second = render()?;
    ensure(
        first == second,
        format!(
            "CSV ({} bytes) and JSON ({} bytes) {} across two runs",
            first.0.len(),
            first.1.len(),
            if first == second { "identical" } else { "differ" }
        ),
    )
}
