use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use cyclecoll::exact::EXACT_CEILING;
use cyclecoll::report::{self, parse_methods, parse_n_values, EXACT_DIGITS};
use cyclecoll::verify::{run_criterion, VerifyOptions, CRITERIA};
use cyclecoll::{
    run_report, stirling_row, CollisionReportRow, Method, OutputFormat,
    QuadratureConfig, ReportConfig, SamplerKind, Seed,
};

#[derive(Parser)]
#[command(name = "cyclecoll", version, about = "Probability that two random permutations have the same number of cycles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact f(n) = Σ_k [n k]² and p(n) = f(n) / (n!)².
    Exact {
        #[arg(long, value_parser = parse_count)]
        n: u64,
        /// Also print the Stirling cycle numbers [n 1] .. [n n].
        #[arg(long)]
        row: bool,
        #[arg(long)]
        json: bool,
    },
    /// p(n) by a single method.
    Collide {
        #[arg(long, value_parser = parse_count)]
        n: u64,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Relative tolerance for quadrature.
        #[arg(long)]
        tol: Option<f64>,
        /// Monte Carlo pairs.
        #[arg(long, default_value = "1000000", value_parser = parse_count)]
        pairs: u64,
        #[arg(long, value_enum)]
        sampler: Option<SamplerArg>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Convergence table over several n.
    Table {
        /// Comma list (`3,10,100`) or geometric range `start:stop:factor`.
        #[arg(long)]
        n: String,
        /// Comma list drawn from exact, quadrature, eq2, asymptotic, montecarlo.
        #[arg(long, default_value = "exact,quadrature,eq2,asymptotic")]
        methods: String,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value = "100000", value_parser = parse_count)]
        pairs: u64,
        #[arg(long, value_enum)]
        sampler: Option<SamplerArg>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest n given to the exact method.
        #[arg(long, default_value_t = EXACT_CEILING)]
        exact_ceiling: u64,
    },
    /// Run the acceptance suite.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Quadrature,
    Eq2,
    Asymptotic,
    Montecarlo,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => Method::Exact,
            MethodArg::Quadrature => Method::Quadrature,
            MethodArg::Eq2 => Method::Eq2,
            MethodArg::Asymptotic => Method::Asymptotic,
            MethodArg::Montecarlo => Method::Montecarlo,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Permutation,
    Bernoulli,
}

impl From<SamplerArg> for SamplerKind {
    fn from(s: SamplerArg) -> Self {
        match s {
            SamplerArg::Permutation => SamplerKind::PermutationDirect,
            SamplerArg::Bernoulli => SamplerKind::BernoulliSum,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn parse_count(s: &str) -> Result<u64, String> {
    match parse_n_values(s).map_err(|e| e.to_string())?.as_slice() {
        [v] => Ok(*v),
        _ => Err(format!("expected a single integer, got {s:?}")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Exact { n, row, json } => exact(n, row, json),
        Command::Collide {
            n,
            method,
            tol,
            pairs,
            sampler,
            seed,
            json,
        } => collide(n, method.into(), tol, pairs, sampler.map(Into::into), Seed(seed), json),
        Command::Table {
            n,
            methods,
            format,
            out,
            tol,
            pairs,
            sampler,
            seed,
            exact_ceiling,
        } => parse_n_values(&n)
            .and_then(|n_values| Ok((n_values, parse_methods(&methods)?)))
            .map_err(|e| e.to_string())
            .and_then(|(n_values, methods)| {
                let config = ReportConfig {
                    n_values,
                    methods,
                    quad: quad_config(tol),
                    mc_pairs: pairs,
                    seed: Seed(seed),
                    sampler: sampler.map(Into::into),
                    exact_ceiling,
                    output_format: match format {
                        FormatArg::Csv => OutputFormat::Csv,
                        FormatArg::Json => OutputFormat::Json,
                    },
                    output_path: out,
                };
                table(&config)
            }),
        Command::Verify { seed } => verify(Seed(seed)),
    };
    match outcome {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

type CmdResult = Result<ExitCode, String>;

fn quad_config(tol: Option<f64>) -> QuadratureConfig {
    match tol {
        Some(t) => QuadratureConfig::default().with_rel_tol(t),
        None => QuadratureConfig::default(),
    }
}

fn exact(n: u64, with_row: bool, as_json: bool) -> CmdResult {
    if n > EXACT_CEILING {
        eprintln!("warning: n = {n} is above {EXACT_CEILING}; the exact route may take a very long time");
    }
    let n = usize::try_from(n).map_err(|_| format!("n = {n} is too large"))?;
    let row = stirling_row(n).map_err(|e| e.to_string())?;
    let f = row.squared_sum();
    let p = row.collision_probability();
    let decimal = p.to_decimal_string(EXACT_DIGITS);
    if as_json {
        let mut doc = json!({
            "n": n,
            "f": f.to_string(),
            "p": p,
            "p_decimal": decimal,
        });
        if with_row {
            doc["row"] = row.coeffs().iter().map(|c| c.to_string()).collect();
        }
        println!("{}", serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?);
    } else {
        println!("n       {n}");
        println!("f(n)    {f}");
        println!("p(n)    {p}");
        println!("        {decimal}");
        if with_row {
            for (k, c) in row.coeffs().iter().enumerate() {
                println!("[{n} {}] {c}", k + 1);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn collide(
    n: u64,
    method: Method,
    tol: Option<f64>,
    pairs: u64,
    sampler: Option<SamplerKind>,
    seed: Seed,
    as_json: bool,
) -> CmdResult {
    let config = ReportConfig {
        quad: quad_config(tol),
        mc_pairs: pairs,
        seed,
        sampler,
        ..ReportConfig::new(vec![n], [method])
    };
    let rows = run_report(&config).map_err(|e| e.to_string())?;
    let row = &rows[0];
    if as_json {
        print!("{}", report::render_json(&rows, &config));
    } else {
        print_row(row);
    }
    for e in &row.errors {
        eprintln!("warning: {e}");
    }
    Ok(if row.errors.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn print_row(row: &CollisionReportRow) {
    println!("n                    {}", row.n);
    if let Some(p) = &row.p_exact {
        println!("p_exact              {p}");
    }
    let floats = [
        ("p_quadrature", row.p_quadrature),
        ("quad_error_estimate", row.quad_error_estimate),
        ("p_eq2", row.p_eq2),
        ("p_asymptotic", row.p_asymptotic),
        ("mc_p_hat", row.mc_p_hat),
        ("mc_std_err", row.mc_std_err),
    ];
    for (name, value) in floats {
        if let Some(v) = value {
            println!("{name:<20} {}", report::format_float(v));
        }
    }
}

fn table(config: &ReportConfig) -> CmdResult {
    let rows = run_report(config).map_err(|e| e.to_string())?;
    for row in &rows {
        for e in &row.errors {
            eprintln!("warning: n = {}: {e}", row.n);
        }
    }
    let text = report::render(&rows, config);
    match &config.output_path {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(seed: Seed) -> CmdResult {
    let opts = VerifyOptions {
        seed,
        ..Default::default()
    };
    let mut failed = 0;
    for (id, _) in CRITERIA {
        let outcome = run_criterion(id, &opts);
        println!("{outcome}");
        failed += usize::from(!outcome.passed);
    }
    if failed == 0 {
        println!("all {} criteria passed", CRITERIA.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{failed} of {} criteria failed", CRITERIA.len());
        Ok(ExitCode::FAILURE)
    }
}
