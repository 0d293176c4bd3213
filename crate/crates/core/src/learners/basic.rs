use rand::seq::index;

use crate::error::{Error, Result};
use crate::rng::OmegaSeed;
use crate::stats::NeumaierSum;

pub fn mean_kernel<I: IntoIterator<Item = f64>>(ys: I) -> f64 {
    let mut acc = NeumaierSum::new();
    let mut count = 0usize;
    for y in ys {
        acc.add(y);
        count += 1;
    }
    acc.value() / count as f64
}

/// Average squared pairwise difference, `C(s,2)^{-1} sum_{i<j} (y_i - y_j)^2`.
///
/// Note the factor: this is twice the usual unbiased sample variance.
pub fn variance_kernel(ys: &[f64]) -> Result<f64> {
    let s = ys.len();
    if s < 2 {
        return Err(Error::invalid("variance kernel needs s >= 2"));
    }
    let mut acc = NeumaierSum::new();
    for i in 0..s {
        for j in i + 1..s {
            let d = ys[i] - ys[j];
            acc.add(d * d);
        }
    }
    Ok(acc.value() / (s * (s - 1) / 2) as f64)
}

/// Mean of `k` responses drawn uniformly without replacement using the omega stream.
pub fn random_k_kernel(ys: &[f64], k: usize, omega: OmegaSeed) -> Result<f64> {
    if k == 0 || k > ys.len() {
        return Err(Error::invalid(format!("random-k kernel needs 1 <= k <= s, got k = {k}, s = {}", ys.len())));
    }
    let mut rng = omega.rng();
    let mut picked = index::sample(&mut rng, ys.len(), k).into_vec();
    picked.sort_unstable();
    Ok(mean_kernel(picked.into_iter().map(|i| ys[i])))
}
