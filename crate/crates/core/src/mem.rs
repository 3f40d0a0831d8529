//! Maximum entropy in the mean for a single averaged measurement.
//!
//! The signal prior is Gamma with shape `n` and rate `n·α` (mean `1/α`) and the
//! noise prior is N(0, δ²/n). For a sample mean ŷ the dual entropy
//!
//! ```text
//! Σ(λ) = λ²δ²/(2n) − n·ln(λ/(nα) + 1) + λŷ
//! ```
//!
//! is strictly convex on λ > −nα. Its minimizer λ* gives the filtered
//! estimate x̂* = n/(λ* + nα) and the residual ê* = −δ²λ*/n, with
//! x̂* + ê* = ŷ.
//!
//! Writing `d = λ/n`, the stationarity condition is the quadratic
//! `δ²d² + (αδ² + ŷ)d + (αŷ − 1) = 0`, whose discriminant is
//! `(αδ² − ŷ)² + 4δ²`. Only the larger root keeps the Gamma rate `n(α + d)`
//! positive; the closed form below evaluates it without cancellation.

use serde::Serialize;

use crate::error::{require_finite, require_positive, Error, Result};

/// Prior parameters of the entropic estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemConfig {
    /// Rate guess α of the signal prior; `0` selects the flat limit.
    pub alpha: f64,
    /// Noise scale δ.
    pub delta: f64,
    /// Number of averaged measurements.
    pub n: u32,
}

impl MemConfig {
    pub fn new(alpha: f64, delta: f64, n: u32) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(
                "alpha",
                format!("must be finite and >= 0, got {alpha}"),
            ));
        }
        require_positive("delta", delta)?;
        if n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        Ok(MemConfig { alpha, delta, n })
    }

    fn n_f64(&self) -> f64 {
        f64::from(self.n)
    }
}

/// Observed measurements and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    values: Vec<f64>,
    y_bar: f64,
}

impl SampleBatch {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("values", "batch must not be empty"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "values",
                format!("non-finite measurement {v}"),
            ));
        }
        let y_bar = values.iter().sum::<f64>() / values.len() as f64;
        Ok(SampleBatch { values, y_bar })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn y_bar(&self) -> f64 {
        self.y_bar
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Dual minimizer together with the signal/noise split of ŷ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateResult {
    pub lambda_star: f64,
    pub x_hat_star: f64,
    pub e_hat_star: f64,
}

fn check_dual_domain(lambda: f64, cfg: &MemConfig) -> Result<()> {
    if !(cfg.alpha > 0.0) {
        return Err(Error::domain(
            "dual entropy",
            "alpha must be > 0; use the closed form for alpha = 0",
        ));
    }
    require_finite("lambda", lambda)?;
    let boundary = -cfg.n_f64() * cfg.alpha;
    if lambda <= boundary {
        return Err(Error::domain(
            "dual entropy",
            format!("lambda = {lambda} must exceed -n*alpha = {boundary}"),
        ));
    }
    Ok(())
}

/// Σ(λ) = λ²δ²/(2n) − n·ln(λ/(nα) + 1) + λŷ.
pub fn dual_entropy(lambda: f64, y_bar: f64, cfg: &MemConfig) -> Result<f64> {
    check_dual_domain(lambda, cfg)?;
    let n = cfg.n_f64();
    let d2 = cfg.delta * cfg.delta;
    Ok(lambda * lambda * d2 / (2.0 * n) - n * (lambda / (n * cfg.alpha)).ln_1p() + lambda * y_bar)
}

/// Σ'(λ) = λδ²/n − (1/α)/(λ/(nα) + 1) + ŷ.
pub fn dual_gradient(lambda: f64, y_bar: f64, cfg: &MemConfig) -> Result<f64> {
    check_dual_domain(lambda, cfg)?;
    Ok(gradient_unchecked(lambda, y_bar, cfg))
}

fn gradient_unchecked(lambda: f64, y_bar: f64, cfg: &MemConfig) -> f64 {
    let n = cfg.n_f64();
    lambda * cfg.delta * cfg.delta / n - n / (lambda + n * cfg.alpha) + y_bar
}

fn curvature_unchecked(lambda: f64, cfg: &MemConfig) -> f64 {
    let n = cfg.n_f64();
    let shifted = lambda + n * cfg.alpha;
    cfg.delta * cfg.delta / n + n / (shifted * shifted)
}

/// Flat-prior (α = 0) estimate: x̂* = ½(ŷ + √(ŷ² + 4δ²)), ê* = ½(ŷ − √(ŷ² + 4δ²)).
fn alpha_zero_estimate(y_bar: f64, delta: f64, n: f64) -> EstimateResult {
    let root = y_bar.hypot(2.0 * delta);
    let d2 = delta * delta;
    // pick the cancellation-free form of each half
    let (x_hat, e_hat) = if y_bar >= 0.0 {
        let x_hat = 0.5 * (y_bar + root);
        (x_hat, -2.0 * d2 / (y_bar + root))
    } else {
        let e_hat = 0.5 * (y_bar - root);
        (2.0 * d2 / (root - y_bar), e_hat)
    };
    EstimateResult {
        lambda_star: -n * e_hat / d2,
        x_hat_star: x_hat,
        e_hat_star: e_hat,
    }
}

/// Closed-form dual minimizer and the resulting estimate.
pub fn mem_closed_form(y_bar: f64, cfg: &MemConfig) -> Result<EstimateResult> {
    require_finite("y_bar", y_bar)?;
    let n = cfg.n_f64();
    if cfg.alpha == 0.0 {
        return Ok(alpha_zero_estimate(y_bar, cfg.delta, n));
    }
    let alpha = cfg.alpha;
    let d2 = cfg.delta * cfg.delta;
    let b = alpha * d2 - y_bar;
    let c = alpha * d2 + y_bar;
    // b² + 4δ² = c² − 4δ²(αŷ − 1)
    let root = b.hypot(2.0 * cfg.delta);
    // d = λ*/n
    let d = if c > 0.0 {
        -2.0 * (alpha * y_bar - 1.0) / (root + c)
    } else {
        (root - c) / (2.0 * d2)
    };
    let x_hat = if b <= 0.0 {
        0.5 * (root - b)
    } else {
        2.0 * d2 / (root + b)
    };
    Ok(EstimateResult {
        lambda_star: n * d,
        x_hat_star: x_hat,
        e_hat_star: -d2 * d,
    })
}

const NEWTON_MAX_ITER: usize = 200;

/// Minimize Σ numerically with a bracketed Newton iteration on Σ'.
///
/// Σ' runs from −∞ at the domain boundary to +∞, and is strictly increasing,
/// so a sign bracket always exists. A Newton step that leaves the current
/// bracket is replaced by bisection.
pub fn minimize_dual_numeric(y_bar: f64, cfg: &MemConfig) -> Result<EstimateResult> {
    require_finite("y_bar", y_bar)?;
    if !(cfg.alpha > 0.0) {
        return Err(Error::domain("minimize_dual_numeric", "alpha must be > 0"));
    }
    let n = cfg.n_f64();
    let tol = 1e-12 * y_bar.abs().max(1.0);
    let g = |l: f64| gradient_unchecked(l, y_bar, cfg);

    let mut lo = -n * cfg.alpha;
    let mut hi = 0.0;
    let g0 = g(0.0);
    if g0 < 0.0 {
        lo = 0.0;
        hi = 1.0;
        while g(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
        }
    }

    let mut lambda = if g0 == 0.0 { 0.0 } else { 0.5 * (lo + hi) };
    let mut residual = g(lambda);
    for _ in 0..NEWTON_MAX_ITER {
        if residual.abs() <= tol {
            return Ok(estimate_from_lambda(lambda, cfg));
        }
        if residual < 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        let step = residual / curvature_unchecked(lambda, cfg);
        let mut next = lambda - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == lambda {
            // bracket has collapsed to adjacent floats
            return Ok(estimate_from_lambda(lambda, cfg));
        }
        lambda = next;
        residual = g(lambda);
    }
    Err(Error::NoConvergence {
        method: "dual Newton",
        iterations: NEWTON_MAX_ITER,
        residual,
    })
}

fn estimate_from_lambda(lambda: f64, cfg: &MemConfig) -> EstimateResult {
    let n = cfg.n_f64();
    EstimateResult {
        lambda_star: lambda,
        x_hat_star: n / (lambda + n * cfg.alpha),
        e_hat_star: -cfg.delta * cfg.delta * lambda / n,
    }
}

/// Large-sample limit of x̂* when ŷ settles at `theta`; independent of n.
pub fn asymptotic_x_tilde(alpha: f64, theta: f64, delta: f64) -> Result<f64> {
    require_positive("theta", theta)?;
    let cfg = MemConfig::new(alpha, delta, 1)?;
    Ok(mem_closed_form(theta, &cfg)?.x_hat_star)
}

const BRENT_MAX_ITER: usize = 200;

/// Solve x̃(α) = 1/α for α inside `[lo, hi]`.
///
/// `x_tilde` is the large-sample estimate as a function of α. The root is
/// located with Brent's method to full double precision.
pub fn solve_alpha_fixed_point<F>(lo: f64, hi: f64, x_tilde: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::invalid(
            "bracket",
            format!("need 0 < lo < hi, got ({lo}, {hi})"),
        ));
    }
    brent_root(|a| x_tilde(a) - 1.0 / a, lo, hi, 1e-15)
}

/// Fixed-point α* for data whose mean settles at `theta`.
pub fn recover_alpha(theta: f64, delta: f64, lo: f64, hi: f64) -> Result<f64> {
    require_positive("theta", theta)?;
    require_positive("delta", delta)?;
    solve_alpha_fixed_point(lo, hi, |a| {
        asymptotic_x_tilde(a, theta, delta).unwrap_or(f64::NAN)
    })
}

/// Brent–Dekker root finder on a sign-changing bracket.
pub(crate) fn brent_root<F>(f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NotBracketed {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..BRENT_MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::NoConvergence {
        method: "Brent root",
        iterations: BRENT_MAX_ITER,
        residual: fb,
    })
}

/// One row of the α-profile of the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub alpha: f64,
    pub x_hat_star: f64,
    pub e_hat_star: f64,
}

/// Evaluate x̂*(α) and ê*(α) over an ascending grid of α values.
pub fn residual_vs_alpha_profile(
    y_bar: f64,
    delta: f64,
    n: u32,
    alphas: &[f64],
) -> Result<Vec<ProfilePoint>> {
    if alphas.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid("alphas", "grid must be sorted ascending"));
    }
    alphas
        .iter()
        .map(|&alpha| {
            let est = mem_closed_form(y_bar, &MemConfig::new(alpha, delta, n)?)?;
            Ok(ProfilePoint {
                alpha,
                x_hat_star: est.x_hat_star,
                e_hat_star: est.e_hat_star,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(alpha: f64, delta: f64, n: u32) -> MemConfig {
        MemConfig::new(alpha, delta, n).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(MemConfig::new(-1.0, 0.5, 3).is_err());
        assert!(MemConfig::new(1.0, 0.0, 3).is_err());
        assert!(MemConfig::new(1.0, 0.5, 0).is_err());
        assert!(MemConfig::new(0.0, 0.5, 3).is_ok());
    }

    #[test]
    fn batch_mean() {
        let b = SampleBatch::new(vec![0.5, 1.0, 1.5]).unwrap();
        assert_eq!(b.y_bar(), 1.0);
        assert!(SampleBatch::new(vec![]).is_err());
        assert!(SampleBatch::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn dual_vanishes_at_origin() {
        for &(y, a, d, n) in &[
            (1.0, 1.0, 0.5, 3),
            (7.0, 0.01, 3.0, 10),
            (-2.0, 5.0, 0.1, 1),
        ] {
            assert_eq!(dual_entropy(0.0, y, &cfg(a, d, n)).unwrap(), 0.0);
        }
    }

    #[test]
    fn dual_domain_errors() {
        let c = cfg(1.0, 0.5, 3);
        assert!(matches!(
            dual_entropy(-3.0, 1.0, &c),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            dual_gradient(-4.0, 1.0, &c),
            Err(Error::Domain { .. })
        ));
        assert!(dual_entropy(0.1, 1.0, &cfg(0.0, 0.5, 3)).is_err());
        assert!(minimize_dual_numeric(1.0, &cfg(0.0, 0.5, 3)).is_err());
    }

    #[test]
    fn gradient_diverges_at_boundary() {
        let c = cfg(1.0, 0.5, 3);
        let mut prev = f64::INFINITY;
        for k in 1..12 {
            let lambda = -3.0 + 10f64.powi(-k);
            let g = dual_gradient(lambda, 1.0, &c).unwrap();
            assert!(g < prev);
            prev = g;
        }
        assert!(prev < -1e10);
    }

    #[test]
    fn nonfinite_mean_rejected() {
        assert!(mem_closed_form(f64::NAN, &cfg(1.0, 0.5, 3)).is_err());
        assert!(mem_closed_form(f64::INFINITY, &cfg(0.0, 0.5, 3)).is_err());
    }

    #[test]
    fn alpha_zero_matches_small_alpha_limit() {
        let zero = mem_closed_form(1.0, &cfg(0.0, 0.5, 3)).unwrap();
        let tiny = mem_closed_form(1.0, &cfg(1e-12, 0.5, 3)).unwrap();
        assert!((zero.x_hat_star - tiny.x_hat_star).abs() < 1e-10);
        assert!((zero.lambda_star - tiny.lambda_star).abs() < 1e-10);
        assert!((zero.e_hat_star + zero.lambda_star * 0.25 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn negative_mean_still_gives_positive_signal() {
        for &a in &[0.0, 0.5, 10.0] {
            let est = mem_closed_form(-3.0, &cfg(a, 0.5, 3)).unwrap();
            assert!(est.x_hat_star > 0.0);
            assert!((est.x_hat_star + est.e_hat_star + 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unsorted_profile_grid_rejected() {
        assert!(residual_vs_alpha_profile(1.0, 0.5, 3, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn fixed_point_needs_sign_change() {
        // both ends above 1/theta = 1
        let err = recover_alpha(1.0, 0.5, 2.0, 10.0).unwrap_err();
        assert!(matches!(err, Error::NotBracketed { .. }));
        assert!(recover_alpha(1.0, 0.5, 0.0, 1.0).is_err());
    }
}
