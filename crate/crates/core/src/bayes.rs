//! Gibbs sampler for the exponential rate under a Jeffreys prior.
//!
//! Model: `y_i = x + e_i`, `e_i ~ N(0, δ²)`, `x ~ Exp(θ)`, `π(θ) ∝ 1/θ`.
//! Given the sample mean ŷ the full conditionals are
//!
//! ```text
//! x | θ, ŷ  ~  N(ŷ − θδ²/n, δ²/n) restricted to x > 0
//! θ | x     ~  Exp(rate = x)
//! ```

use crate::error::{require_finite, require_positive, Error, Result};
use crate::mem::SampleBatch;
use crate::rng::RngStream;

pub const DEFAULT_BURN_IN: usize = 500;
pub const DEFAULT_DRAWS: usize = 2000;

/// Floor on the data mean used to seed θ₀ = 1/ŷ.
const INIT_MEAN_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsConfig {
    pub burn_in: usize,
    pub n_draws: usize,
    pub delta: f64,
    pub n: u32,
}

impl GibbsConfig {
    pub fn new(burn_in: usize, n_draws: usize, delta: f64, n: u32) -> Result<Self> {
        if n_draws == 0 {
            return Err(Error::invalid("n_draws", "must be at least 1"));
        }
        require_positive("delta", delta)?;
        if n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        Ok(GibbsConfig {
            burn_in,
            n_draws,
            delta,
            n,
        })
    }

    /// Standard deviation δ/√n of the latent-mean conditional.
    fn conditional_sd(&self) -> f64 {
        self.delta / f64::from(self.n).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsState {
    /// Latent mean.
    pub x: f64,
    /// Exponential rate.
    pub theta: f64,
}

/// Retained draws of E(x) = 1/θ and their summaries.
///
/// Under the Jeffreys prior the posterior of 1/θ has no finite mean (θ | x is
/// exponential, so E[1/θ | x] diverges), and the sample `mean` is driven by
/// the few smallest θ draws. The `median` is the per-chain point estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub draws_of_ex: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
}

impl PosteriorSummary {
    pub fn from_draws(draws_of_ex: Vec<f64>) -> Self {
        let (mean, sd) = crate::harness::summarize(&draws_of_ex);
        let median = median(&draws_of_ex);
        PosteriorSummary {
            draws_of_ex,
            mean,
            sd,
            median,
        }
    }

    /// Bayes estimate of E(x) under absolute loss: the posterior median of 1/θ.
    pub fn point_estimate(&self) -> f64 {
        self.median
    }
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// Draw x' from its truncated-normal conditional at the current θ.
pub fn draw_latent_mean(
    theta: f64,
    y_bar: f64,
    cfg: &GibbsConfig,
    stream: &mut RngStream,
) -> Result<f64> {
    let n = f64::from(cfg.n);
    let mean = y_bar - theta * cfg.delta * cfg.delta / n;
    stream.draw_truncated_normal_positive(mean, cfg.conditional_sd())
}

/// One sweep: x' | θ, then θ' | x'.
pub fn gibbs_step(
    state: GibbsState,
    y_bar: f64,
    cfg: &GibbsConfig,
    stream: &mut RngStream,
) -> Result<GibbsState> {
    require_finite("y_bar", y_bar)?;
    let x = draw_latent_mean(state.theta, y_bar, cfg, stream)?;
    let theta = stream.draw_exponential(x)?;
    Ok(GibbsState { x, theta })
}

/// Initial state θ₀ = 1/max(ŷ, 1e-6), x₀ from the conditional at θ₀.
pub fn initial_state(y_bar: f64, cfg: &GibbsConfig, stream: &mut RngStream) -> Result<GibbsState> {
    require_finite("y_bar", y_bar)?;
    let theta = 1.0 / y_bar.max(INIT_MEAN_FLOOR);
    let x = draw_latent_mean(theta, y_bar, cfg, stream)?;
    Ok(GibbsState { x, theta })
}

/// Run burn-in plus `n_draws` sweeps and keep 1/θ from the retained sweeps.
pub fn run_chain(
    batch: &SampleBatch,
    cfg: &GibbsConfig,
    stream: &mut RngStream,
) -> Result<PosteriorSummary> {
    let y_bar = batch.y_bar();
    let mut state = initial_state(y_bar, cfg, stream)?;
    for _ in 0..cfg.burn_in {
        state = gibbs_step(state, y_bar, cfg, stream)?;
    }
    let mut draws = Vec::with_capacity(cfg.n_draws);
    for _ in 0..cfg.n_draws {
        state = gibbs_step(state, y_bar, cfg, stream)?;
        draws.push(1.0 / state.theta);
    }
    Ok(PosteriorSummary::from_draws(draws))
}
