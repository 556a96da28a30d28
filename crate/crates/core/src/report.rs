//! Multi-method convergence tables for the collision probability.
//!
//! Every row carries whichever of the exact, quadrature, kernel-integral,
//! asymptotic and Monte Carlo values were requested. Rows render to CSV with
//! a fixed column order, or to JSON `{"rows", "config", "version"}`. Floats
//! are written with 17 significant digits in both formats, so the two
//! renderings carry identical values and round-trip losslessly.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::analytic::{
    asymptotic_probability, kernel_integral, quadrature_probability, IntegrandKind,
    QuadratureConfig, QuadratureResult,
};
use crate::error::{Error, Result};
use crate::exact::{collision_probability, EXACT_CEILING};
use crate::montecarlo::{estimate_collision, SamplerKind, Seed};

/// Version string written into JSON reports.
pub const REPORT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest `n` integrated with the exact-product integrand; above it the
/// Gamma-ratio form takes over.
pub const PRODUCT_INTEGRAND_LIMIT: u64 = 512;

/// Significant digits of the exact decimal column.
pub const EXACT_DIGITS: usize = 20;

pub const CSV_HEADER: &str = "n,p_exact,p_quadrature,quad_error_estimate,p_eq2,p_asymptotic,ratio_to_asymptotic,mc_p_hat,mc_std_err";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Quadrature,
    Eq2,
    Asymptotic,
    Montecarlo,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Exact,
        Method::Quadrature,
        Method::Eq2,
        Method::Asymptotic,
        Method::Montecarlo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Quadrature => "quadrature",
            Method::Eq2 => "eq2",
            Method::Asymptotic => "asymptotic",
            Method::Montecarlo => "montecarlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::config(format!("unknown method {s:?}")))
    }
}

/// Parses a comma-separated method list such as `exact,quadrature`.
pub fn parse_methods(spec: &str) -> Result<BTreeSet<Method>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::config(format!("unknown output format {other:?}"))),
        }
    }
}

/// What to compute and how to emit it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportConfig {
    pub n_values: Vec<u64>,
    pub methods: BTreeSet<Method>,
    pub quad: QuadratureConfig,
    pub mc_pairs: u64,
    pub seed: Seed,
    /// `None` picks [`SamplerKind::default_for`] per row.
    pub sampler: Option<SamplerKind>,
    pub exact_ceiling: u64,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            n_values: Vec::new(),
            methods: BTreeSet::new(),
            quad: QuadratureConfig::default(),
            mc_pairs: 100_000,
            seed: Seed(0),
            sampler: None,
            exact_ceiling: EXACT_CEILING,
            output_format: OutputFormat::Csv,
            output_path: None,
        }
    }
}

impl ReportConfig {
    pub fn new(n_values: Vec<u64>, methods: impl IntoIterator<Item = Method>) -> Self {
        Self {
            n_values,
            methods: methods.into_iter().collect(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::config("n_values is empty"));
        }
        if self.n_values[0] == 0 {
            return Err(Error::config("n values must be positive"));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("n values must be strictly increasing"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("no methods requested"));
        }
        if self.methods.contains(&Method::Asymptotic) && self.n_values[0] < 2 {
            return Err(Error::config("the asymptotic method needs every n >= 2"));
        }
        if self.methods.contains(&Method::Montecarlo) && self.mc_pairs == 0 {
            return Err(Error::config("mc_pairs must be positive"));
        }
        self.quad.validate()
    }
}

/// Parses `3,10,100` or a geometric range `start:stop:factor` (inclusive of
/// `stop` when hit). Entries may use exponent notation such as `1e6`.
pub fn parse_n_values(spec: &str) -> Result<Vec<u64>> {
    fn int(s: &str) -> Result<u64> {
        let s = s.trim();
        if let Ok(v) = s.parse::<u64>() {
            return Ok(v);
        }
        match s.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(63) => Ok(v as u64),
            _ => Err(Error::config(format!("{s:?} is not a non-negative integer"))),
        }
    }

    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [single] => single.split(',').filter(|s| !s.trim().is_empty()).map(int).collect(),
        [start, stop, factor] => {
            let (start, stop, factor) = (int(start)?, int(stop)?, int(factor)?);
            if start == 0 || factor < 2 || stop < start {
                return Err(Error::config(format!(
                    "geometric spec needs 0 < start <= stop and factor >= 2, got {spec:?}"
                )));
            }
            let mut out = Vec::new();
            let mut n = start;
            while n <= stop {
                out.push(n);
                match n.checked_mul(factor) {
                    Some(next) => n = next,
                    None => break,
                }
            }
            Ok(out)
        }
        _ => Err(Error::config(format!("cannot parse n values from {spec:?}"))),
    }
}

/// One line of the convergence table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CollisionReportRow {
    pub n: u64,
    /// Exact probability, 20 significant digits.
    pub p_exact: Option<String>,
    pub p_quadrature: Option<f64>,
    pub quad_error_estimate: Option<f64>,
    /// `I(n) / 2π` from the Gamma-kernel integral.
    pub p_eq2: Option<f64>,
    pub p_asymptotic: Option<f64>,
    /// Best available probability over the asymptotic estimate.
    pub ratio_to_asymptotic: Option<f64>,
    pub mc_p_hat: Option<f64>,
    pub mc_std_err: Option<f64>,
    /// Per-method problems encountered while building the row.
    pub errors: Vec<String>,
    p_exact_f64: Option<f64>,
}

impl CollisionReportRow {
    /// Float value of the exact column, when present.
    pub fn p_exact_f64(&self) -> Option<f64> {
        self.p_exact_f64
    }

    /// Probability used for the ratio: exact, then quadrature, then kernel
    /// integral, then Monte Carlo.
    pub fn best_probability(&self) -> Option<f64> {
        self.p_exact_f64
            .or(self.p_quadrature)
            .or(self.p_eq2)
            .or(self.mc_p_hat)
    }
}

fn record_quadrature(
    row: &mut CollisionReportRow,
    label: &str,
    outcome: Result<QuadratureResult>,
) -> Option<QuadratureResult> {
    match outcome {
        Ok(r) => Some(r),
        Err(Error::Convergence { best, reason }) => {
            row.errors.push(format!(
                "{label}: not converged ({reason}); best estimate reported"
            ));
            Some(best)
        }
        Err(e) => {
            row.errors.push(format!("{label}: {e}"));
            None
        }
    }
}

fn compute_row(n: u64, config: &ReportConfig) -> CollisionReportRow {
    let mut row = CollisionReportRow {
        n,
        ..Default::default()
    };
    let wants = |m: Method| config.methods.contains(&m);

    if wants(Method::Exact) {
        if n > config.exact_ceiling {
            row.errors.push(format!(
                "exact: n = {n} exceeds the exact-route ceiling {}",
                config.exact_ceiling
            ));
        } else {
            match collision_probability(n as usize) {
                Ok(p) => {
                    row.p_exact = Some(p.to_decimal_string(EXACT_DIGITS));
                    row.p_exact_f64 = Some(p.approx());
                }
                Err(e) => row.errors.push(format!("exact: {e}")),
            }
        }
    }

    if wants(Method::Quadrature) {
        let kind = if n <= PRODUCT_INTEGRAND_LIMIT {
            IntegrandKind::ExactProduct
        } else {
            IntegrandKind::GammaRatio
        };
        let primary = record_quadrature(
            &mut row,
            "quadrature",
            quadrature_probability(n, kind, &config.quad),
        );
        if let Some(q) = primary {
            row.p_quadrature = Some(q.value);
            row.quad_error_estimate = Some(q.abs_error_estimate);
            if n == PRODUCT_INTEGRAND_LIMIT {
                if let Some(other) = record_quadrature(
                    &mut row,
                    "quadrature cross-check",
                    quadrature_probability(n, IntegrandKind::GammaRatio, &config.quad),
                ) {
                    let allowed = (10.0 * (q.abs_error_estimate + other.abs_error_estimate)).max(1e-12);
                    if (q.value - other.value).abs() > allowed {
                        row.errors.push(format!(
                            "quadrature cross-check: product {} vs gamma ratio {}",
                            q.value, other.value
                        ));
                    }
                }
            }
            if let Some(pe) = row.p_exact_f64 {
                let allowed = (10.0 * q.abs_error_estimate).max(1e-12);
                if (q.value - pe).abs() > allowed {
                    row.errors.push(format!(
                        "quadrature: {} differs from exact {} by more than {allowed:e}",
                        q.value, pe
                    ));
                }
            }
        }
    }

    if wants(Method::Eq2) {
        if let Some(r) = record_quadrature(&mut row, "eq2", kernel_integral(n as f64, &config.quad)) {
            row.p_eq2 = Some(r.value / TAU);
        }
    }

    if wants(Method::Asymptotic) {
        match asymptotic_probability(n as f64) {
            Ok(p) => row.p_asymptotic = Some(p),
            Err(e) => row.errors.push(format!("asymptotic: {e}")),
        }
    }

    if wants(Method::Montecarlo) {
        let kind = config.sampler.unwrap_or_else(|| SamplerKind::default_for(n));
        match estimate_collision(n, config.mc_pairs, kind, config.seed) {
            Ok(est) => {
                row.mc_p_hat = Some(est.p_hat);
                row.mc_std_err = Some(est.std_err);
            }
            Err(e) => row.errors.push(format!("montecarlo: {e}")),
        }
    }

    if let (Some(asym), Some(best)) = (row.p_asymptotic, row.best_probability()) {
        row.ratio_to_asymptotic = Some(best / asym);
    }
    row
}

/// Builds one row per requested `n`, in order. Rows are computed in
/// parallel; assembly order is fixed.
pub fn run_report(config: &ReportConfig) -> Result<Vec<CollisionReportRow>> {
    config.validate()?;
    Ok(config
        .n_values
        .par_iter()
        .map(|&n| compute_row(n, config))
        .collect())
}

/// 17-significant-digit rendering shared by CSV and JSON.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format_float(v),
        _ => String::new(),
    }
}

pub fn render_csv(rows: &[CollisionReportRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            r.n.to_string(),
            r.p_exact.clone().unwrap_or_default(),
            opt_float(r.p_quadrature),
            opt_float(r.quad_error_estimate),
            opt_float(r.p_eq2),
            opt_float(r.p_asymptotic),
            opt_float(r.ratio_to_asymptotic),
            opt_float(r.mc_p_hat),
            opt_float(r.mc_std_err),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn float17<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if !x.is_finite() {
        return s.serialize_none();
    }
    RawValue::from_string(format_float(*x))
        .map_err(S::Error::custom)?
        .serialize(s)
}

fn float17_opt<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => float17(v, s),
        None => s.serialize_none(),
    }
}

#[derive(Serialize)]
struct JsonRow<'a> {
    n: u64,
    p_exact: &'a Option<String>,
    #[serde(serialize_with = "float17_opt")]
    p_quadrature: Option<f64>,
    #[serde(serialize_with = "float17_opt")]
    quad_error_estimate: Option<f64>,
    #[serde(serialize_with = "float17_opt")]
    p_eq2: Option<f64>,
    #[serde(serialize_with = "float17_opt")]
    p_asymptotic: Option<f64>,
    #[serde(serialize_with = "float17_opt")]
    ratio_to_asymptotic: Option<f64>,
    #[serde(serialize_with = "float17_opt")]
    mc_p_hat: Option<f64>,
    #[serde(serialize_with = "float17_opt")]
    mc_std_err: Option<f64>,
    errors: &'a [String],
}

#[derive(Serialize)]
struct JsonQuad {
    #[serde(serialize_with = "float17")]
    rel_tol: f64,
    #[serde(serialize_with = "float17")]
    abs_tol: f64,
    max_subdivisions: usize,
}

#[derive(Serialize)]
struct JsonConfig<'a> {
    n_values: &'a [u64],
    methods: Vec<Method>,
    quad: JsonQuad,
    mc_pairs: u64,
    seed: Seed,
    sampler: Option<SamplerKind>,
    exact_ceiling: u64,
    output_format: OutputFormat,
    output_path: Option<String>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    rows: Vec<JsonRow<'a>>,
    config: JsonConfig<'a>,
    version: &'static str,
}

pub fn render_json(rows: &[CollisionReportRow], config: &ReportConfig) -> String {
    let report = JsonReport {
        rows: rows
            .iter()
            .map(|r| JsonRow {
                n: r.n,
                p_exact: &r.p_exact,
                p_quadrature: r.p_quadrature,
                quad_error_estimate: r.quad_error_estimate,
                p_eq2: r.p_eq2,
                p_asymptotic: r.p_asymptotic,
                ratio_to_asymptotic: r.ratio_to_asymptotic,
                mc_p_hat: r.mc_p_hat,
                mc_std_err: r.mc_std_err,
                errors: &r.errors,
            })
            .collect(),
        config: JsonConfig {
            n_values: &config.n_values,
            methods: config.methods.iter().copied().collect(),
            quad: JsonQuad {
                rel_tol: config.quad.rel_tol,
                abs_tol: config.quad.abs_tol,
                max_subdivisions: config.quad.max_subdivisions,
            },
            mc_pairs: config.mc_pairs,
            seed: config.seed,
            sampler: config.sampler,
            exact_ceiling: config.exact_ceiling,
            output_format: config.output_format,
            output_path: config.output_path.as_ref().map(|p| p.display().to_string()),
        },
        version: REPORT_VERSION,
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serialization cannot fail");
    s.push('\n');
    s
}

/// Renders in the configured format.
pub fn render(rows: &[CollisionReportRow], config: &ReportConfig) -> String {
    match config.output_format {
        OutputFormat::Csv => render_csv(rows),
        OutputFormat::Json => render_json(rows, config),
    }
}
