//! Summary statistics for standardized errors.

use crate::gaussian;

/// Kolmogorov–Smirnov distance between the empirical law of `xs` and
/// `N(0, 1)`. Non-finite entries are ignored.
pub fn ks_normal(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = gaussian::cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// `(theoretical, empirical)` quantile pairs at `count` evenly spaced levels.
pub fn qq_points(xs: &[f64], count: usize) -> Vec<(f64, f64)> {
    let mut v: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() || count == 0 {
        return Vec::new();
    }
    v.sort_by(f64::total_cmp);
    let m = v.len();
    (0..count)
        .map(|k| {
            let u = (k as f64 + 0.5) / count as f64;
            let idx = ((u * m as f64) as usize).min(m - 1);
            (gaussian::quantile(u), v[idx])
        })
        .collect()
}

/// Pairwise summation, independent of thread scheduling.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        pairwise_sum(xs) / xs.len() as f64
    }
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}
