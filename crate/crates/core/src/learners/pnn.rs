//! k-potential nearest neighbors and the random-potential (RP) tree learner.

use rand::seq::index;

use crate::data::Sample;
use crate::rng::OmegaSeed;
use crate::stats::NeumaierSum;

/// k-PNN members of a target point, as positions into the subsample, ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PnnSet {
    pub members: Vec<usize>,
    /// Number of other subsample points inside each member's hyperrectangle.
    pub blocking: Vec<usize>,
}

impl PnnSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (u, v)| f64::max(m, (u - v).abs()))
}

#[inline]
fn inside_box(point: &[f64], corner: &[f64], target: &[f64]) -> bool {
    point.iter().zip(corner).zip(target).all(|((&p, &c), &t)| {
        let (lo, hi) = if c <= t { (c, t) } else { (t, c) };
        lo <= p && p <= hi
    })
}

/// Points whose closed hyperrectangle with `target` holds fewer than `k` other points.
///
/// Boundary points count as blocking. A blocker can never be farther from the target in
/// sup-norm than the point it blocks, so candidates are scanned in sup-norm order and the
/// scan stops as soon as `k` blockers are found.
pub fn compute_kpnn(points: &[&[f64]], target: &[f64], k: usize) -> PnnSet {
    let s = points.len();
    let dist: Vec<f64> = points.iter().map(|p| linf(p, target)).collect();
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));

    let mut members = Vec::new();
    let mut blocking = Vec::new();
    let mut tie_end = 0;
    for q in 0..s {
        let i = order[q];
        while tie_end < s && dist[order[tie_end]] <= dist[i] {
            tie_end += 1;
        }
        let mut count = 0;
        for &j in &order[..tie_end] {
            if j != i && inside_box(points[j], points[i], target) {
                count += 1;
                if count >= k {
                    break;
                }
            }
        }
        if count < k {
            members.push(i);
            blocking.push(count);
        }
    }
    let mut paired: Vec<(usize, usize)> = members.into_iter().zip(blocking).collect();
    paired.sort_unstable();
    let (members, blocking) = paired.into_iter().unzip();
    PnnSet { members, blocking }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RpTreeOutcome {
    pub value: f64,
    pub pnn_size: usize,
    /// Set when fewer than `k` PNNs existed and all of them were averaged.
    pub truncated: bool,
}

/// Averages `min(k, |PNN|)` responses drawn uniformly without replacement from the k-PNNs.
pub fn rp_tree_kernel(rows: &[&Sample], target: &[f64], k: usize, omega: OmegaSeed) -> RpTreeOutcome {
    let points: Vec<&[f64]> = rows.iter().map(|r| r.x.as_slice()).collect();
    let pnn = compute_kpnn(&points, target, k);
    let take = k.min(pnn.len());
    let mut picks: Vec<usize> = if take == pnn.len() {
        pnn.members.clone()
    } else {
        let mut rng = omega.rng();
        index::sample(&mut rng, pnn.len(), take).into_iter().map(|i| pnn.members[i]).collect()
    };
    picks.sort_unstable();
    let mut acc = NeumaierSum::new();
    for &i in &picks {
        acc.add(rows[i].y);
    }
    RpTreeOutcome { value: acc.value() / take as f64, pnn_size: pnn.len(), truncated: pnn.len() < k }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedPath;
    use rand::Rng;

    fn brute_force(points: &[Vec<f64>], target: &[f64], k: usize) -> Vec<usize> {
        (0..points.len())
            .filter(|&i| {
                let c = (0..points.len()).filter(|&j| j != i && inside_box(&points[j], &points[i], target)).count();
                c < k
            })
            .collect()
    }

    #[test]
    fn one_dimensional_example() {
        let pts: Vec<Vec<f64>> = [-3.0, -1.0, 1.0, 2.0, 5.0].iter().map(|&v| vec![v]).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let set = compute_kpnn(&refs, &[0.0], 1);
        let values: Vec<f64> = set.members.iter().map(|&i| pts[i][0]).collect();
        assert_eq!(values, vec![-1.0, 1.0]);
        assert_eq!(set.blocking, vec![0, 0]);
    }

    #[test]
    fn large_k_admits_everyone() {
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        assert_eq!(compute_kpnn(&refs, &[0.5, 0.5], 6).len(), 6);
        assert_eq!(compute_kpnn(&refs, &[0.5, 0.5], 10).len(), 6);
    }

    #[test]
    fn boundary_points_block() {
        // (1, 1) lies on the corner of the box spanned by the origin and (1, 2).
        let pts = [vec![1.0, 2.0], vec![1.0, 1.0]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        assert_eq!(compute_kpnn(&refs, &[0.0, 0.0], 1).members, vec![1]);
    }

    #[test]
    fn matches_brute_force_and_is_monotone_in_k() {
        let mut rng = SeedPath::new(17).rng();
        for trial in 0..40 {
            let d = 1 + trial % 3;
            let s = 5 + trial;
            // Coarse grid to provoke ties and boundary cases.
            let pts: Vec<Vec<f64>> =
                (0..s).map(|_| (0..d).map(|_| rng.random_range(0..6) as f64 / 5.0).collect()).collect();
            let target: Vec<f64> = (0..d).map(|_| rng.random_range(0..6) as f64 / 5.0).collect();
            let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
            let mut prev: Vec<usize> = Vec::new();
            for k in 1..6 {
                let got = compute_kpnn(&refs, &target, k);
                assert_eq!(got.members, brute_force(&pts, &target, k), "trial {trial}, k {k}");
                assert!(prev.iter().all(|m| got.members.contains(m)), "not monotone at k = {k}");
                prev = got.members;
            }
        }
    }

    #[test]
    fn one_dimension_has_k_on_each_side() {
        let pts: Vec<Vec<f64>> = [-0.9, -0.5, -0.2, 0.1, 0.3, 0.8, 0.95].iter().map(|&v| vec![v]).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let members: Vec<f64> = compute_kpnn(&refs, &[0.0], 2).members.iter().map(|&i| pts[i][0]).collect();
        assert_eq!(members, vec![-0.5, -0.2, 0.1, 0.3]);
    }

    #[test]
    fn rp_tree_with_exactly_k_pnns_ignores_omega() {
        let data: Vec<Sample> = [(-3.0, 1.0), (-1.0, 2.0), (1.0, 4.0), (2.0, 8.0), (5.0, 16.0)]
            .iter()
            .map(|&(x, y)| Sample::new(vec![x], y))
            .collect();
        let rows: Vec<&Sample> = data.iter().collect();
        // k = 2: PNNs are -3, -1, 1, 2 (four points); k = 1: -1 and 1.
        for seed in 0..20 {
            let out = rp_tree_kernel(&rows, &[0.0], 2, OmegaSeed(seed));
            assert_eq!(out.pnn_size, 4);
            assert!(!out.truncated);
        }
        let data2 = [Sample::new(vec![-1.0], 2.0), Sample::new(vec![1.0], 4.0)];
        let rows2: Vec<&Sample> = data2.iter().collect();
        for seed in 0..5 {
            let out = rp_tree_kernel(&rows2, &[0.0], 2, OmegaSeed(seed));
            assert_eq!(out.value, 3.0);
        }
    }

    #[test]
    fn rp_tree_k1_picks_each_one_pnn() {
        let data: Vec<Sample> = [(-3.0, 1.0), (-1.0, 2.0), (1.0, 4.0), (2.0, 8.0), (5.0, 16.0)]
            .iter()
            .map(|&(x, y)| Sample::new(vec![x], y))
            .collect();
        let rows: Vec<&Sample> = data.iter().collect();
        let mut seen_left = 0;
        let reps = 2000;
        for seed in 0..reps {
            let out = rp_tree_kernel(&rows, &[0.0], 1, OmegaSeed(seed));
            assert!(out.value == 2.0 || out.value == 4.0);
            if out.value == 2.0 {
                seen_left += 1;
            }
        }
        // Uniform over the two 1-PNNs: binomial(2000, 1/2), sd ~ 22.4.
        assert!((seen_left as f64 - 1000.0).abs() < 4.0 * 22.4, "left picked {seen_left} times");
    }

    #[test]
    fn truncated_when_fewer_than_k() {
        let data = [Sample::new(vec![0.5], 1.0), Sample::new(vec![0.7], 3.0)];
        let rows: Vec<&Sample> = data.iter().collect();
        let out = rp_tree_kernel(&rows, &[0.0], 5, OmegaSeed(1));
        assert!(out.truncated);
        assert_eq!(out.value, 2.0);
    }
}
