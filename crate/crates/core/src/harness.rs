//! Monte Carlo comparison of the entropic, Bayesian and ML estimators.
//!
//! Each replicate simulates `n` positive noisy exponential measurements and
//! runs every selected estimator on them. Replicates draw from streams derived
//! from `(master_seed, replicate)`, run in parallel, and are merged in index
//! order, so a report depends only on its configuration.

use rayon::prelude::*;
use serde::Serialize;

use crate::bayes::{run_chain, GibbsConfig};
use crate::error::{require_positive, Error, Result};
use crate::mem::{mem_closed_form, MemConfig, SampleBatch};
use crate::mle::{ml_estimate, MleConfig};
use crate::rng::RngStream;

/// Salt separating the Gibbs chain streams from the data streams.
const CHAIN_STREAM_SALT: u64 = 0x6a09_e667_f3bc_c909;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mem,
    Bayes,
    Ml,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Mem, Method::Bayes, Method::Ml];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mem => "mem",
            Method::Bayes => "bayes",
            Method::Ml => "ml",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub theta_true: f64,
    pub delta: f64,
    pub n: u32,
    pub replicates: usize,
    pub master_seed: u64,
    pub alpha_mem: f64,
    pub histogram_bins: usize,
    pub histogram_range: (f64, f64),
    /// Estimators to run; the others are left empty in the report.
    pub methods: Vec<Method>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            theta_true: 1.0,
            delta: 0.5,
            n: 3,
            replicates: 1000,
            master_seed: 20_080_801,
            alpha_mem: 0.0,
            histogram_bins: 30,
            histogram_range: (0.0, 5.0),
            methods: Method::ALL.to_vec(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        require_positive("theta", self.theta_true)?;
        require_positive("delta", self.delta)?;
        if self.n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        if self.replicates == 0 {
            return Err(Error::invalid("replicates", "must be at least 1"));
        }
        if !(self.alpha_mem >= 0.0 && self.alpha_mem.is_finite()) {
            return Err(Error::invalid("alpha", "must be finite and >= 0"));
        }
        if self.histogram_bins == 0 {
            return Err(Error::invalid("bins", "must be at least 1"));
        }
        let (lo, hi) = self.histogram_range;
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::invalid(
                "range",
                format!("need lo < hi, got ({lo}, {hi})"),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("method", "select at least one estimator"));
        }
        Ok(())
    }

    fn runs(&self, method: Method) -> bool {
        self.methods.contains(&method)
    }
}

/// Estimates of E(x) from one simulated batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicateEstimates {
    pub replicate: usize,
    pub y_bar: f64,
    pub mem: Option<f64>,
    pub bayes: Option<f64>,
    pub ml: Option<f64>,
    pub ml_boundary: Option<bool>,
}

impl ReplicateEstimates {
    pub fn get(&self, method: Method) -> Option<f64> {
        match method {
            Method::Mem => self.mem,
            Method::Bayes => self.bayes,
            Method::Ml => self.ml,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodSummary {
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
    /// Replicates whose ML maximizer sat on the search boundary (ML only).
    pub boundary_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
    /// Values below the range, counted in the first bin.
    pub clamped_low: usize,
    /// Values at or above the range end, counted in the last bin.
    pub clamped_high: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodReport {
    pub method: Method,
    pub summary: MethodSummary,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub per_replicate: Vec<ReplicateEstimates>,
    /// One entry per method that was run, in `mem, bayes, ml` order.
    pub methods: Vec<MethodReport>,
}

impl ExperimentReport {
    pub fn method(&self, method: Method) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.method == method)
    }
}

/// Mean and sample standard deviation (n − 1 divisor; 0 for one value).
pub fn summarize(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Equal-width histogram over `[lo, hi)`; out-of-range values are clamped
/// into the end bins so that the counts always sum to `values.len()`.
pub fn histogram(values: &[f64], bins: usize, range: (f64, f64)) -> Result<Histogram> {
    let (lo, hi) = range;
    if bins == 0 {
        return Err(Error::invalid("bins", "must be at least 1"));
    }
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid(
            "range",
            format!("need lo < hi, got ({lo}, {hi})"),
        ));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let (mut clamped_low, mut clamped_high) = (0, 0);
    for &v in values {
        let idx = if v < lo {
            clamped_low += 1;
            0
        } else if v >= hi || v.is_nan() {
            clamped_high += 1;
            bins - 1
        } else {
            (((v - lo) / width) as usize).min(bins - 1)
        };
        counts[idx] += 1;
    }
    let bins = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lo: lo + i as f64 * width,
            hi: if i + 1 == bins {
                hi
            } else {
                lo + (i + 1) as f64 * width
            },
            count,
        })
        .collect();
    Ok(Histogram {
        bins,
        clamped_low,
        clamped_high,
    })
}

/// Simulate `n` positive measurements `y = x + e`, `x ~ Exp(θ)`, `e ~ N(0, δ²)`.
///
/// A non-positive `y` discards both `x` and `e` and redraws the pair.
pub fn simulate_batch(
    theta: f64,
    delta: f64,
    n: u32,
    stream: &mut RngStream,
) -> Result<SampleBatch> {
    require_positive("theta", theta)?;
    require_positive("delta", delta)?;
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let mut values = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let y = loop {
            let x = stream.draw_exponential(theta)?;
            let e = stream.draw_normal(0.0, delta)?;
            let y = x + e;
            if y > 0.0 {
                break y;
            }
        };
        values.push(y);
    }
    SampleBatch::new(values)
}

fn run_replicate(
    replicate: usize,
    cfg: &SimConfig,
    gibbs_cfg: &GibbsConfig,
    mle_cfg: &MleConfig,
) -> Result<ReplicateEstimates> {
    let mut data_stream = RngStream::for_replicate(cfg.master_seed, replicate as u64);
    let batch = simulate_batch(cfg.theta_true, cfg.delta, cfg.n, &mut data_stream)?;

    let mem = if cfg.runs(Method::Mem) {
        let mem_cfg = MemConfig::new(cfg.alpha_mem, cfg.delta, cfg.n)?;
        Some(mem_closed_form(batch.y_bar(), &mem_cfg)?.x_hat_star)
    } else {
        None
    };
    let bayes = if cfg.runs(Method::Bayes) {
        let mut chain_stream =
            RngStream::for_replicate(cfg.master_seed ^ CHAIN_STREAM_SALT, replicate as u64);
        Some(run_chain(&batch, gibbs_cfg, &mut chain_stream)?.point_estimate())
    } else {
        None
    };
    let (ml, ml_boundary) = if cfg.runs(Method::Ml) {
        let est = ml_estimate(&batch, mle_cfg)?;
        (Some(est.mean), Some(est.boundary))
    } else {
        (None, None)
    };
    Ok(ReplicateEstimates {
        replicate,
        y_bar: batch.y_bar(),
        mem,
        bayes,
        ml,
        ml_boundary,
    })
}

/// Run every replicate and aggregate summaries and histograms per method.
pub fn run_experiment(
    cfg: &SimConfig,
    gibbs_cfg: &GibbsConfig,
    mle_cfg: &MleConfig,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let per_replicate = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| run_replicate(r, cfg, gibbs_cfg, mle_cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut methods = Vec::new();
    for method in Method::ALL {
        if !cfg.runs(method) {
            continue;
        }
        let values: Vec<f64> = per_replicate.iter().filter_map(|r| r.get(method)).collect();
        let (mean, sd) = summarize(&values);
        let boundary_count = per_replicate
            .iter()
            .filter(|r| method == Method::Ml && r.ml_boundary == Some(true))
            .count();
        methods.push(MethodReport {
            method,
            summary: MethodSummary {
                mean,
                sd,
                count: values.len(),
                boundary_count,
            },
            histogram: histogram(&values, cfg.histogram_bins, cfg.histogram_range)?,
        });
    }
    Ok(ExperimentReport {
        per_replicate,
        methods,
    })
}
