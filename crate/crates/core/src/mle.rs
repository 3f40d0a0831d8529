//! Maximum likelihood for the exponential rate observed through Gaussian noise.
//!
//! A single observation t = x + e with x ~ Exp(θ), e ~ N(0, δ²) has the
//! exponentially modified Gaussian density
//!
//! ```text
//! f_θ(t) = θ·exp(−θt + (θδ)²/2)·Φ((t − θδ²)/δ)
//! ```
//!
//! which is maximized numerically in θ over the product of observations.

use serde::Serialize;

use crate::error::{require_finite, require_positive, Error, Result};
use crate::mem::SampleBatch;
use crate::special::log_std_normal_cdf;

const GOLDEN: f64 = 0.381_966_011_250_105_1;
const BRENT_MAX_ITER: usize = 500;

/// Where the θ search interval comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchBounds {
    /// `[lower/ŷ, upper/ŷ]`, adapted to each batch's mean.
    ScaledToMean { lower: f64, upper: f64 },
    /// A fixed interval for every batch.
    Fixed { theta_min: f64, theta_max: f64 },
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds::ScaledToMean {
            lower: 1e-3,
            upper: 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleConfig {
    pub bounds: SearchBounds,
    /// Relative bracket width at which the search stops.
    pub tol: f64,
    pub delta: f64,
}

impl MleConfig {
    pub fn new(bounds: SearchBounds, tol: f64, delta: f64) -> Result<Self> {
        match bounds {
            SearchBounds::ScaledToMean { lower, upper } => {
                require_positive("lower", lower)?;
                require_positive("upper", upper)?;
                if lower >= upper {
                    return Err(Error::invalid("bounds", "lower factor must be below upper"));
                }
            }
            SearchBounds::Fixed {
                theta_min,
                theta_max,
            } => {
                require_positive("theta_min", theta_min)?;
                require_positive("theta_max", theta_max)?;
                if theta_min >= theta_max {
                    return Err(Error::invalid("theta_min", "must be below theta_max"));
                }
            }
        }
        require_positive("tol", tol)?;
        require_positive("delta", delta)?;
        Ok(MleConfig { bounds, tol, delta })
    }

    /// Scale-adapted interval `[1e-3/ŷ, 1e3/ŷ]` with relative tolerance 1e-8.
    pub fn with_delta(delta: f64) -> Result<Self> {
        MleConfig::new(SearchBounds::default(), 1e-8, delta)
    }

    /// Concrete `(theta_min, theta_max)` for a batch with mean `y_bar`.
    pub fn interval(&self, y_bar: f64) -> Result<(f64, f64)> {
        match self.bounds {
            SearchBounds::Fixed {
                theta_min,
                theta_max,
            } => Ok((theta_min, theta_max)),
            SearchBounds::ScaledToMean { lower, upper } => {
                if !(y_bar > 0.0 && y_bar.is_finite()) {
                    return Err(Error::domain(
                        "ml_estimate",
                        format!("scaled search bounds need a positive sample mean, got {y_bar}"),
                    ));
                }
                Ok((lower / y_bar, upper / y_bar))
            }
        }
    }
}

/// Result of the numeric likelihood maximization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MlEstimate {
    /// 1/θ*, the estimate of E(x).
    pub mean: f64,
    pub theta: f64,
    /// The maximizer sits at an end of the search interval.
    pub boundary: bool,
}

fn log_density(t: f64, theta: f64, delta: f64) -> f64 {
    let td = theta * delta;
    theta.ln() - theta * t + 0.5 * td * td + log_std_normal_cdf((t - theta * delta * delta) / delta)
}

/// Exponentially modified Gaussian density f_θ(t).
pub fn density_convolution(t: f64, theta: f64, delta: f64) -> Result<f64> {
    require_finite("t", t)?;
    require_positive("theta", theta)?;
    require_positive("delta", delta)?;
    Ok(log_density(t, theta, delta).exp())
}

/// Σ ln f_θ(t_i) = n ln θ − θΣt_i + n(θδ)²/2 + Σ ln Φ((t_i − θδ²)/δ).
pub fn log_likelihood(ts: &[f64], theta: f64, delta: f64) -> Result<f64> {
    if ts.is_empty() {
        return Err(Error::invalid("ts", "need at least one observation"));
    }
    require_positive("theta", theta)?;
    require_positive("delta", delta)?;
    Ok(ts.iter().map(|&t| log_density(t, theta, delta)).sum())
}

/// Maximize the likelihood over θ and return 1/θ*.
///
/// The search runs in ln θ with Brent's parabolic/golden-section minimizer.
pub fn ml_estimate(batch: &SampleBatch, cfg: &MleConfig) -> Result<MlEstimate> {
    let (theta_min, theta_max) = cfg.interval(batch.y_bar())?;
    let ts = batch.values();
    let delta = cfg.delta;
    let objective = |u: f64| {
        -ts.iter()
            .map(|&t| log_density(t, u.exp(), delta))
            .sum::<f64>()
    };
    let (lo, hi) = (theta_min.ln(), theta_max.ln());
    let (u_star, f_star) = brent_minimize(objective, lo, hi, cfg.tol)?;

    // the interior search never evaluates the ends; compare against them directly
    let f_hi = objective(hi);
    let f_lo = objective(lo);
    let (u, boundary) = if f_hi <= f_star && f_hi <= f_lo {
        (hi, true)
    } else if f_lo <= f_star {
        (lo, true)
    } else {
        let near_end = hi - u_star <= 2.0 * cfg.tol || u_star - lo <= 2.0 * cfg.tol;
        (u_star, near_end)
    };
    let theta = u.exp();
    Ok(MlEstimate {
        mean: 1.0 / theta,
        theta,
        boundary,
    })
}

/// Brent's minimizer on `[a, b]`; stops when the bracket is narrower than
/// roughly `tol·(1 + |x|)`. Returns `(x_min, f(x_min))`.
pub(crate) fn brent_minimize<F>(f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..BRENT_MAX_ITER {
        let mid = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-12 * tol;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            return Ok((x, fx));
        }
        let mut golden = true;
        if e.abs() > tol1 {
            // parabola through x, w, v
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(mid - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= mid { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Err(Error::NoConvergence {
        method: "Brent minimize",
        iterations: BRENT_MAX_ITER,
        residual: b - a,
    })
}

/// Small-noise approximation 1/θ* = ½(ŷ + √(ŷ² − 4δ²)).
///
/// Obtained by dropping the Gaussian-tail term from the score; only defined
/// for ŷ ≥ 2δ.
pub fn small_noise_ml(y_bar: f64, delta: f64) -> Result<f64> {
    require_finite("y_bar", y_bar)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::invalid(
            "delta",
            format!("must be finite and >= 0, got {delta}"),
        ));
    }
    let disc = y_bar * y_bar - 4.0 * delta * delta;
    if !(y_bar > 0.0) || disc < 0.0 {
        return Err(Error::domain(
            "small_noise_ml",
            format!("need y_bar >= 2*delta, got y_bar = {y_bar}, delta = {delta}"),
        ));
    }
    Ok(0.5 * (y_bar + disc.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_reference_value() {
        // e^{1/8}·Φ(−1/2)
        let f = density_convolution(0.0, 1.0, 0.5).unwrap();
        assert!((f - 0.125f64.exp() * 0.308_537_538_725_986_9).abs() < 1e-14);
    }

    #[test]
    fn density_small_noise_limit() {
        let f = density_convolution(1.0, 1.0, 1e-6).unwrap();
        assert!((f - (-1.0f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn likelihood_validation() {
        assert!(log_likelihood(&[], 1.0, 0.5).is_err());
        assert!(log_likelihood(&[1.0], 0.0, 0.5).is_err());
        assert!(log_likelihood(&[1.0], 1.0, -0.5).is_err());
    }

    #[test]
    fn small_noise_formula() {
        assert_eq!(small_noise_ml(1.7, 0.0).unwrap(), 1.7);
        assert!((small_noise_ml(2.0, 0.5).unwrap() - 0.5 * (2.0 + 3f64.sqrt())).abs() < 1e-15);
        assert!(small_noise_ml(1.0, 0.5).is_ok());
        assert!(matches!(
            small_noise_ml(0.999_999, 0.5),
            Err(Error::Domain { .. })
        ));
        assert!(small_noise_ml(-3.0, 0.5).is_err());
    }

    #[test]
    fn noise_shrinks_small_noise_estimate() {
        for &y in &[1.0, 2.0, 10.0] {
            for &d in &[0.01, 0.1, 0.5] {
                assert!(small_noise_ml(y, d).unwrap() < y);
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(MleConfig::new(
            SearchBounds::Fixed {
                theta_min: 2.0,
                theta_max: 1.0
            },
            1e-8,
            0.5
        )
        .is_err());
        assert!(MleConfig::new(SearchBounds::default(), 0.0, 0.5).is_err());
        let cfg = MleConfig::with_delta(0.5).unwrap();
        assert!(cfg.interval(-1.0).is_err());
        let (lo, hi) = cfg.interval(2.0).unwrap();
        assert!((lo - 5e-4).abs() < 1e-18 && (hi - 500.0).abs() < 1e-12);
    }

    #[test]
    fn brent_finds_parabola_minimum() {
        let (x, fx) = brent_minimize(|x| (x - 0.3) * (x - 0.3) + 2.0, -5.0, 5.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
        assert!((fx - 2.0).abs() < 1e-15);
    }
}
