//! Maximum entropy in the mean (MEM) filtering of additive Gaussian noise,
//! applied to estimating the mean of an exponential distribution from a few
//! noisy measurements.
//!
//! The crate provides the closed-form entropic estimator and its numeric dual
//! solver ([`mem`]), the Bayesian Gibbs comparator ([`bayes`]), the
//! maximum-likelihood comparator on the exponentially modified Gaussian
//! density ([`mle`]), and a Monte Carlo harness that runs all three on
//! simulated data ([`harness`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes;
pub mod cli;
pub mod error;
pub mod harness;
pub mod mem;
pub mod mle;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
pub use mem::{EstimateResult, MemConfig, SampleBatch};
pub use rng::RngStream;
