use crate::data::Sample;
use crate::error::{Error, Result};
use crate::stats::NeumaierSum;

use super::squared_distance;

/// Mean response of the `k` nearest rows to `target` (Euclidean), ties to the earlier row.
pub fn knn_kernel(rows: &[&Sample], target: &[f64], k: usize) -> Result<f64> {
    let s = rows.len();
    if k == 0 || k > s {
        return Err(Error::invalid(format!("knn needs 1 <= k <= s, got k = {k}, s = {s}")));
    }
    if k == 1 {
        let mut best = 0;
        let mut best_d = squared_distance(&rows[0].x, target);
        for (i, r) in rows.iter().enumerate().skip(1) {
            let d = squared_distance(&r.x, target);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        return Ok(rows[best].y);
    }
    let mut keyed: Vec<(f64, usize)> = rows.iter().enumerate().map(|(i, r)| (squared_distance(&r.x, target), i)).collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < s {
        keyed.select_nth_unstable_by(k - 1, cmp);
    }
    let mut chosen: Vec<usize> = keyed[..k].iter().map(|&(_, i)| i).collect();
    chosen.sort_unstable();
    let mut acc = NeumaierSum::new();
    for i in chosen {
        acc.add(rows[i].y);
    }
    Ok(acc.value() / k as f64)
}
