use crate::stats::normal_cdf;

/// One-sample Kolmogorov-Smirnov distance to the standard normal:
/// `max_i max(i/R - Phi(x_(i)), Phi(x_(i)) - (i-1)/R)` over the sorted sample.
pub fn ks_to_standard_normal(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "KS statistic of an empty sample");
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = normal_cdf(*x);
            let i = i as f64;
            ((i + 1.0) / r - f).max(f - i / r)
        })
        .fold(0.0, f64::max)
}

/// Approximate standard error of the KS statistic under the null, from the standard
/// deviation (about 0.2603) of the limiting Kolmogorov distribution.
pub fn ks_se(r: usize) -> f64 {
    0.2603 / (r as f64).sqrt()
}
