//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage/configuration/output errors, 1 when
//! a numeric routine fails.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bayes::{GibbsConfig, DEFAULT_BURN_IN, DEFAULT_DRAWS};
use crate::error::Error;
use crate::harness::{run_experiment, ExperimentReport, Method, SimConfig};
use crate::mem::{
    mem_closed_form, minimize_dual_numeric, residual_vs_alpha_profile, EstimateResult, MemConfig,
    SampleBatch,
};
use crate::mle::{MleConfig, SearchBounds};

#[derive(Debug, Parser)]
#[command(
    name = "memfilter",
    version,
    about = "Entropic filtering of noisy exponential data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropic estimate x̂*, residual ê* and dual minimizer λ* for one data set
    Estimate(EstimateArgs),
    /// Monte Carlo comparison of the MEM, Bayes and ML estimators
    Experiment(ExperimentArgs),
    /// x̂*(α) and ê*(α) over a grid of prior parameters
    Profile(ProfileArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Sample mean ŷ
    #[arg(long, conflicts_with = "y", required_unless_present = "y")]
    pub ybar: Option<f64>,
    /// Individual measurements (comma separated)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Sample size; defaults to the number of --y values, or 3
    #[arg(long)]
    pub n: Option<u32>,
    /// Minimize the dual numerically instead of using the closed form
    #[arg(long)]
    pub numeric: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Mem,
    Bayes,
    Ml,
    All,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Mem => vec![Method::Mem],
            MethodArg::Bayes => vec![Method::Bayes],
            MethodArg::Ml => vec![Method::Ml],
            MethodArg::All => Method::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// True exponential rate θ
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = SimConfig::default().master_seed)]
    pub seed: u64,
    /// MEM prior parameter α
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    pub method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    pub burn_in: usize,
    #[arg(long, default_value_t = DEFAULT_DRAWS)]
    pub draws: usize,
    /// Fixed lower end of the ML search over θ (default: 1e-3/ŷ per batch)
    #[arg(long, requires = "theta_max")]
    pub theta_min: Option<f64>,
    /// Fixed upper end of the ML search over θ (default: 1e3/ŷ per batch)
    #[arg(long, requires = "theta_min")]
    pub theta_max: Option<f64>,
    #[arg(long, default_value_t = 30)]
    pub bins: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub range_lo: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub range_hi: f64,
    /// Output directory for summary.json, estimates.csv and hist_<method>.csv
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub ybar: f64,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    /// Explicit ascending α grid (comma separated)
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["alpha_min", "alpha_max", "points"])]
    pub alphas: Option<Vec<f64>>,
    /// Log-spaced grid: smallest α
    #[arg(long, default_value_t = 1e-3)]
    pub alpha_min: f64,
    /// Log-spaced grid: largest α
    #[arg(long, default_value_t = 1e3)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// Write the CSV here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a CLI command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::Domain { .. } | Error::NotBracketed { .. } => {
                CliError::Usage(e.to_string())
            }
            Error::NoConvergence { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("cannot write {}: {e}", path.display()))
}

/// Float formatting used in every CSV: 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate(args) => cmd_estimate(&args),
        Command::Experiment(args) => cmd_experiment(&args).map(|_| ()),
        Command::Profile(args) => cmd_profile(&args),
    }
}

#[derive(Debug, Serialize)]
struct EstimateOutput {
    y_bar: f64,
    alpha: f64,
    delta: f64,
    n: u32,
    #[serde(flatten)]
    estimate: EstimateResult,
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let (y_bar, n) = match (&args.y, args.ybar) {
        (Some(values), _) => {
            let batch = SampleBatch::new(values.clone())?;
            let len = batch.len() as u32;
            if let Some(n) = args.n {
                if n != len {
                    return Err(CliError::Usage(format!(
                        "--n {n} does not match the {len} values given with --y"
                    )));
                }
            }
            (batch.y_bar(), len)
        }
        (None, Some(y_bar)) => (y_bar, args.n.unwrap_or(3)),
        (None, None) => return Err(CliError::Usage("give either --ybar or --y".into())),
    };
    let cfg = MemConfig::new(args.alpha, args.delta, n)?;
    let estimate = if args.numeric {
        minimize_dual_numeric(y_bar, &cfg)?
    } else {
        mem_closed_form(y_bar, &cfg)?
    };
    let out = EstimateOutput {
        y_bar,
        alpha: cfg.alpha,
        delta: cfg.delta,
        n,
        estimate,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("estimate serializes")
    );
    Ok(())
}

/// Configuration echoed into summary.json.
#[derive(Debug, Serialize)]
struct ConfigRecord {
    theta: f64,
    delta: f64,
    n: u32,
    replicates: usize,
    seed: u64,
    alpha: f64,
    burn_in: usize,
    draws: usize,
    theta_min: Option<f64>,
    theta_max: Option<f64>,
    bins: usize,
    range_lo: f64,
    range_hi: f64,
}

#[derive(Debug, Serialize)]
struct MethodRecord {
    mean: f64,
    sd: f64,
    count: usize,
    boundary_count: usize,
    clamped_low: usize,
    clamped_high: usize,
}

#[derive(Debug, Serialize)]
struct SummaryRecord {
    config: ConfigRecord,
    mem: Option<MethodRecord>,
    bayes: Option<MethodRecord>,
    ml: Option<MethodRecord>,
}

fn build_configs(args: &ExperimentArgs) -> Result<(SimConfig, GibbsConfig, MleConfig), CliError> {
    let sim = SimConfig {
        theta_true: args.theta,
        delta: args.delta,
        n: args.n,
        replicates: args.replicates,
        master_seed: args.seed,
        alpha_mem: args.alpha,
        histogram_bins: args.bins,
        histogram_range: (args.range_lo, args.range_hi),
        methods: args.method.methods(),
    };
    sim.validate()?;
    let gibbs = GibbsConfig::new(args.burn_in, args.draws, args.delta, args.n)?;
    let bounds = match (args.theta_min, args.theta_max) {
        (Some(theta_min), Some(theta_max)) => SearchBounds::Fixed {
            theta_min,
            theta_max,
        },
        _ => SearchBounds::default(),
    };
    let mle = MleConfig::new(bounds, 1e-8, args.delta)?;
    Ok((sim, gibbs, mle))
}

pub fn cmd_experiment(args: &ExperimentArgs) -> Result<ExperimentReport, CliError> {
    let (sim, gibbs, mle) = build_configs(args)?;
    fs::create_dir_all(&args.out).map_err(|e| io_error(&args.out, e))?;
    let report = run_experiment(&sim, &gibbs, &mle)?;
    write_report(args, &report)?;
    print_summary_table(&report);
    Ok(report)
}

fn write_report(args: &ExperimentArgs, report: &ExperimentReport) -> Result<(), CliError> {
    let record = |method: Method| {
        report.method(method).map(|m| MethodRecord {
            mean: m.summary.mean,
            sd: m.summary.sd,
            count: m.summary.count,
            boundary_count: m.summary.boundary_count,
            clamped_low: m.histogram.clamped_low,
            clamped_high: m.histogram.clamped_high,
        })
    };
    let summary = SummaryRecord {
        config: ConfigRecord {
            theta: args.theta,
            delta: args.delta,
            n: args.n,
            replicates: args.replicates,
            seed: args.seed,
            alpha: args.alpha,
            burn_in: args.burn_in,
            draws: args.draws,
            theta_min: args.theta_min,
            theta_max: args.theta_max,
            bins: args.bins,
            range_lo: args.range_lo,
            range_hi: args.range_hi,
        },
        mem: record(Method::Mem),
        bayes: record(Method::Bayes),
        ml: record(Method::Ml),
    };
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    json.push('\n');
    write_file(&args.out.join("summary.json"), &json)?;

    let mut csv = String::from("replicate,mem,bayes,ml,ml_boundary\n");
    for r in &report.per_replicate {
        let boundary = r.ml_boundary.map(|b| b.to_string()).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.replicate,
            fmt_opt(r.mem),
            fmt_opt(r.bayes),
            fmt_opt(r.ml),
            boundary
        );
    }
    write_file(&args.out.join("estimates.csv"), &csv)?;

    for m in &report.methods {
        let mut csv = String::from("bin_lo,bin_hi,count\n");
        for b in &m.histogram.bins {
            let _ = writeln!(csv, "{},{},{}", fmt_float(b.lo), fmt_float(b.hi), b.count);
        }
        write_file(
            &args.out.join(format!("hist_{}.csv", m.method.name())),
            &csv,
        )?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(|e| io_error(path, e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| io_error(path, e))
}

fn print_summary_table(report: &ExperimentReport) {
    println!(
        "{:<8} {:>10} {:>10} {:>8} {:>9}",
        "method", "mean", "sd", "count", "boundary"
    );
    for m in &report.methods {
        println!(
            "{:<8} {:>10.4} {:>10.4} {:>8} {:>9}",
            m.method.name(),
            m.summary.mean,
            m.summary.sd,
            m.summary.count,
            m.summary.boundary_count
        );
    }
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, Error> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::invalid(
            "alpha range",
            format!("need 0 < min < max, got ({lo}, {hi})"),
        ));
    }
    if points < 2 {
        return Err(Error::invalid("points", "need at least 2"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| match i {
            0 => lo,
            _ if i == points - 1 => hi,
            _ => (a + step * i as f64).exp(),
        })
        .collect())
}

pub fn cmd_profile(args: &ProfileArgs) -> Result<(), CliError> {
    let alphas = match &args.alphas {
        Some(grid) => grid.clone(),
        None => log_grid(args.alpha_min, args.alpha_max, args.points)?,
    };
    let rows = residual_vs_alpha_profile(args.ybar, args.delta, args.n, &alphas)?;
    let mut csv = String::from("alpha,x_hat_star,e_hat_star\n");
    for p in rows {
        let _ = writeln!(
            csv,
            "{},{},{}",
            fmt_float(p.alpha),
            fmt_float(p.x_hat_star),
            fmt_float(p.e_hat_star)
        );
    }
    match &args.out {
        Some(path) => write_file(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &v in &[0.1, 1.0 / 3.0, 1.2071067811865475, -2.5e-300, 6.02214076e23] {
            let s = fmt_float(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 1e3, 7).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[6], 1e3);
        assert!((g[3] - 1.0).abs() < 1e-12);
        assert!(log_grid(0.0, 1.0, 5).is_err());
        assert!(log_grid(1.0, 2.0, 1).is_err());
    }

    #[test]
    fn error_mapping() {
        let e: CliError = Error::invalid("x", "bad").into();
        assert_eq!(e.exit_code(), 2);
        let e: CliError = Error::NoConvergence {
            method: "m",
            iterations: 1,
            residual: 1.0,
        }
        .into();
        assert_eq!(e.exit_code(), 1);
    }
}
