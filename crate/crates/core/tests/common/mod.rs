//! Oracles shared by the integration tests. Nothing here calls into the crate.

#![allow(dead_code)]

// 15-point Kronrod nodes on [0, 1] (symmetric), with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: (f64, f64), rel: f64, depth: u32) -> f64 {
    let (value, err) = whole;
    if depth == 0 || err <= rel * value.abs() || err < 1e-300 {
        return value;
    }
    let m = 0.5 * (a + b);
    let left = gauss_kronrod(f, a, m);
    let right = gauss_kronrod(f, m, b);
    adapt(f, a, m, left, rel, depth - 1) + adapt(f, m, b, right, rel, depth - 1)
}

/// Adaptive Gauss–Kronrod (7/15) on `[a, b]` to a relative tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64) -> f64 {
    adapt(&f, a, b, gauss_kronrod(&f, a, b), rel, 60)
}

/// Integrate over consecutive panels between sorted `breaks`.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel: f64) -> f64 {
    breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| integrate(&f, w[0], w[1], rel))
        .sum()
}

pub fn gaussian_pdf(x: f64, sd: f64) -> f64 {
    (-0.5 * (x / sd) * (x / sd)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

/// Standard normal CDF by quadrature of the density from 0.
pub fn normal_cdf_by_quadrature(z: f64) -> f64 {
    let half = integrate(|s| gaussian_pdf(s, 1.0), 0.0, z.abs(), 1e-15);
    if z >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

/// Exponential-plus-Gaussian density from its convolution integral, with
/// u = t − s the exponential part.
pub fn emg_density_by_quadrature(t: f64, theta: f64, delta: f64) -> f64 {
    let upper = t.max(0.0) + 40.0 * delta;
    let mut breaks = vec![0.0];
    let mut h = 1e-7;
    while h < upper {
        breaks.push(h);
        h *= 2.0;
    }
    breaks.push(upper);
    if t > 0.0 {
        breaks.push(t);
    }
    breaks.sort_by(f64::total_cmp);
    integrate_panels(
        |u| theta * (-theta * u).exp() * gaussian_pdf(t - u, delta),
        &breaks,
        1e-13,
    )
}

/// Kolmogorov–Smirnov statistic of `sample` against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic KS critical value c(α)·√(1/n) for sample size `n`.
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / (n as f64).sqrt()
}

pub fn ks_critical_two_sample(alpha: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (-0.5 * (alpha / 2.0).ln()).sqrt() * ((n + m) / (n * m)).sqrt()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}
