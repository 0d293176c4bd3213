//! CART regression tree, grown only along the path of the target point.
//!
//! Cells are split at the (feature, threshold) maximizing the impurity decrease
//! `L(j, z) = [SSE(A) - SSE(A_L) - SSE(A_R)] / |A|` with `A_L = {x_j < z}`. Thresholds are
//! midpoints between consecutive distinct feature values; ties go to the lowest feature
//! index, then the leftmost threshold. A cell becomes a leaf once it has at most `k` points
//! or no split strictly decreases the impurity. Only the cell holding the target is ever
//! expanded, which yields the same prediction as growing the full tree.

use rand::seq::index;

use crate::data::Sample;
use crate::rng::OmegaSeed;
use crate::stats::NeumaierSum;

// Relative threshold below which an impurity decrease counts as no improvement.
const MIN_RELATIVE_GAIN: f64 = 1e-12;

struct Split {
    gain: f64,
    feature: usize,
    threshold: f64,
}

fn two_pass_sse(ys: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = ys.clone().count() as f64;
    let mean = ys.clone().sum::<f64>() / n;
    ys.map(|y| (y - mean) * (y - mean)).sum()
}

fn best_split(rows: &[&Sample], cell: &[usize], features: &[usize]) -> Option<Split> {
    let m = cell.len();
    let parent = two_pass_sse(cell.iter().map(|&i| rows[i].y));
    if parent <= 0.0 {
        return None;
    }
    let min_gain = MIN_RELATIVE_GAIN * parent / m as f64;
    let mut best: Option<Split> = None;
    let mut order = cell.to_vec();
    for &j in features {
        order.sort_by(|&a, &b| rows[a].x[j].total_cmp(&rows[b].x[j]).then(a.cmp(&b)));
        let total: f64 = order.iter().map(|&i| rows[i].y).sum();
        let total_sq: f64 = order.iter().map(|&i| rows[i].y * rows[i].y).sum();
        let mut left = 0.0;
        let mut left_sq = 0.0;
        for pos in 1..m {
            let y = rows[order[pos - 1]].y;
            left += y;
            left_sq += y * y;
            let a = rows[order[pos - 1]].x[j];
            let b = rows[order[pos]].x[j];
            if a >= b {
                continue;
            }
            let nl = pos as f64;
            let nr = (m - pos) as f64;
            let right = total - left;
            let right_sq = total_sq - left_sq;
            let sse_l = left_sq - left * left / nl;
            let sse_r = right_sq - right * right / nr;
            let gain = (parent - sse_l - sse_r) / m as f64;
            if gain > min_gain && best.as_ref().is_none_or(|bs| gain > bs.gain) {
                let mut z = 0.5 * (a + b);
                if !(z > a && z <= b) {
                    z = b;
                }
                best = Some(Split { gain, feature: j, threshold: z });
            }
        }
    }
    best
}

/// Prediction at `target` of a CART tree with terminal cap `k`.
///
/// With `mtry == 0` (or `mtry >= p`) every feature is a candidate at each node; otherwise
/// `mtry` features are drawn per node from the omega stream.
pub fn cart_tree_kernel(rows: &[&Sample], target: &[f64], k: usize, mtry: usize, omega: OmegaSeed) -> f64 {
    let p = target.len();
    let randomized = mtry > 0 && mtry < p;
    let mut rng = randomized.then(|| omega.rng());
    let all: Vec<usize> = (0..p).collect();
    let mut cell: Vec<usize> = (0..rows.len()).collect();
    while cell.len() > k.max(1) {
        let features = match rng.as_mut() {
            Some(r) => {
                let mut f = index::sample(r, p, mtry).into_vec();
                f.sort_unstable();
                f
            }
            None => all.clone(),
        };
        let Some(split) = best_split(rows, &cell, &features) else { break };
        let go_left = target[split.feature] < split.threshold;
        cell.retain(|&i| (rows[i].x[split.feature] < split.threshold) == go_left);
    }
    let mut acc = NeumaierSum::new();
    for &i in &cell {
        acc.add(rows[i].y);
    }
    acc.value() / cell.len() as f64
}

/// Leaf (as subsample positions) that would contain `target`; exposed for tests.
#[cfg(test)]
fn leaf_of(rows: &[&Sample], target: &[f64], k: usize) -> Vec<usize> {
    let all: Vec<usize> = (0..target.len()).collect();
    let mut cell: Vec<usize> = (0..rows.len()).collect();
    while cell.len() > k {
        let Some(split) = best_split(rows, &cell, &all) else { break };
        let go_left = target[split.feature] < split.threshold;
        cell.retain(|&i| (rows[i].x[split.feature] < split.threshold) == go_left);
    }
    cell
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedPath;
    use rand::Rng;

    fn make(pts: &[(f64, f64)]) -> Vec<Sample> {
        pts.iter().map(|&(x, y)| Sample::new(vec![x], y)).collect()
    }

    #[test]
    fn constant_response_never_splits() {
        let data = make(&[(0.1, 2.5), (0.4, 2.5), (0.9, 2.5), (0.3, 2.5)]);
        let rows: Vec<&Sample> = data.iter().collect();
        assert_eq!(cart_tree_kernel(&rows, &[0.2], 1, 0, OmegaSeed(0)), 2.5);
        assert_eq!(leaf_of(&rows, &[0.2], 1).len(), 4);
    }

    #[test]
    fn recovers_a_step() {
        let data = make(&[(0.1, 0.0), (0.2, 0.0), (0.3, 0.0), (0.7, 1.0), (0.8, 1.0), (0.95, 1.0)]);
        let rows: Vec<&Sample> = data.iter().collect();
        for t in [0.0, 0.25, 0.49, 0.51, 0.75, 1.0] {
            let expected = if t < 0.5 { 0.0 } else { 1.0 };
            assert_eq!(cart_tree_kernel(&rows, &[t], 1, 0, OmegaSeed(0)), expected, "target {t}");
        }
    }

    #[test]
    fn split_threshold_is_the_gap_midpoint() {
        let data = make(&[(0.1, 0.0), (0.3, 0.0), (0.7, 1.0), (0.8, 1.0)]);
        let rows: Vec<&Sample> = data.iter().collect();
        let sp = best_split(&rows, &[0, 1, 2, 3], &[0]).unwrap();
        assert_eq!(sp.feature, 0);
        assert!((sp.threshold - 0.5).abs() < 1e-15);
        // Gain = SSE(A)/|A| = 1/4 since both children are pure.
        assert!((sp.gain - 0.25).abs() < 1e-15);
    }

    #[test]
    fn deterministic_without_mtry() {
        let data: Vec<Sample> = (0..20)
            .map(|i| {
                let a = (i as f64 * 0.37).fract();
                let b = (i as f64 * 0.61).fract();
                Sample::new(vec![a, b], a * 2.0 - b)
            })
            .collect();
        let rows: Vec<&Sample> = data.iter().collect();
        let v0 = cart_tree_kernel(&rows, &[0.5, 0.5], 3, 0, OmegaSeed(1));
        for seed in 2..10 {
            assert_eq!(cart_tree_kernel(&rows, &[0.5, 0.5], 3, 0, OmegaSeed(seed)), v0);
        }
    }

    #[test]
    fn leaves_are_small_or_unsplittable() {
        let mut rng = SeedPath::new(4).rng();
        for trial in 0..30 {
            let s = 10 + trial;
            let data: Vec<Sample> = (0..s)
                .map(|_| {
                    let x: Vec<f64> = (0..2).map(|_| rng.random_range(0..5) as f64).collect();
                    let y = rng.random_range(0..3) as f64;
                    Sample::new(x, y)
                })
                .collect();
            let rows: Vec<&Sample> = data.iter().collect();
            let target = [rng.random_range(0..5) as f64, rng.random_range(0..5) as f64];
            let k = 1 + trial % 4;
            let leaf = leaf_of(&rows, &target, k);
            if leaf.len() > k {
                assert!(best_split(&rows, &leaf, &[0, 1]).is_none(), "leaf of size {} is splittable", leaf.len());
            }
        }
    }
}
