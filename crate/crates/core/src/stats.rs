//! Small statistics toolkit: summaries, least squares, bootstrap and the
//! Kolmogorov distance to the standard normal.

use crate::rng::{SeedRecord, StreamRng};
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Standard error of the mean.
    pub std_error: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

pub fn summarize(xs: &[f64]) -> Summary {
    let variance = variance(xs);
    Summary {
        count: xs.len(),
        mean: mean(xs),
        variance,
        std_error: (variance / xs.len() as f64).sqrt(),
    }
}

/// Standard error of the sample variance, `√((m4 − s⁴(n−3)/(n−1))/n)`.
pub fn variance_std_error(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    let s2 = variance(xs);
    ((m4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn ols(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let slope_std_error = if n > 2.0 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    LinearFit {
        slope,
        intercept,
        slope_std_error,
    }
}

/// A resample (with replacement) of `xs`.
pub fn resample(xs: &[f64], rng: &mut StreamRng, out: &mut Vec<f64>) {
    out.clear();
    let n = xs.len();
    out.extend((0..n).map(|_| xs[rng.random_range(0..n)]));
}

/// Percentile interval of `values` at level `1 − alpha`.
pub fn percentile_interval(values: &mut [f64], alpha: f64) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    (quantile_sorted(values, alpha / 2.0), quantile_sorted(values, 1.0 - alpha / 2.0))
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let h = q.clamp(0.0, 1.0) * (xs.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo])
}

/// Bootstrap distribution of `stat` over replicate resamples.
pub fn bootstrap<F: Fn(&[f64]) -> f64>(xs: &[f64], resamples: usize, seed: &SeedRecord, stat: F) -> Vec<f64> {
    let mut rng = seed.rng(crate::rng::purpose::BOOTSTRAP);
    let mut buf = Vec::with_capacity(xs.len());
    (0..resamples)
        .map(|_| {
            resample(xs, &mut rng, &mut buf);
            stat(&buf)
        })
        .collect()
}

/// Sample standard deviation of a bootstrap distribution.
pub fn bootstrap_se(values: &[f64]) -> f64 {
    variance(values).sqrt()
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Exact one-sample Kolmogorov distance `sup_t |F_n(t) − Φ(t)|` of the sample standardized
/// by its own mean and standard deviation. `None` for a degenerate (constant) sample.
pub fn ks_normal(xs: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let m = mean(xs);
    let s = variance(xs).sqrt();
    if !(s > 0.0) || !s.is_finite() {
        return None;
    }
    let mut z: Vec<f64> = xs.iter().map(|x| (x - m) / s).collect();
    z.sort_by(f64::total_cmp);
    Some(ks_sorted(&z, normal_cdf))
}

/// `sup |F_n − F|` for sorted data against a continuous cdf.
pub fn ks_sorted<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}
