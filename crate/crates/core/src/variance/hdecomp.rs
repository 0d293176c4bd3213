//! Exact H-decomposition of a deterministic kernel under a finite distribution.
//!
//! With `h_c(z_1..z_c) = E[h | Z_1..Z_c = z_1..z_c] - theta`, the components are
//! `h^(1) = h_1` and `h^(j) = h_j - sum over proper nonempty subsets A of h^(|A|)(z_A)`.
//! All tables are indexed by tuples over the support, first coordinate most significant.

use serde::Serialize;

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::learners::KernelSpec;
use crate::rng::OmegaSeed;
use crate::simlab::generators::GeneratorSpec;
use crate::stats::{binomial_f64, binomial_u128, NeumaierSum};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HDecomposition {
    pub s: usize,
    pub theta: f64,
    /// `Var(h)`.
    pub var_h: f64,
    /// `V_1..V_s` (index 0 holds `V_1`).
    pub v: Vec<f64>,
    /// `zeta_1..zeta_s` with `zeta_c = Var(h_c)` (index 0 holds `zeta_1`).
    pub zeta: Vec<f64>,
    #[serde(skip)]
    components: Vec<Vec<f64>>,
    #[serde(skip)]
    conditional: Vec<Vec<f64>>,
    #[serde(skip)]
    probs: Vec<f64>,
}

impl HDecomposition {
    pub fn support_size(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `zeta_c = Var(h_c)` for `1 <= c <= s`.
    pub fn zeta_c(&self, c: usize) -> f64 {
        self.zeta[c - 1]
    }

    /// Table of `h^(j)` over `support^j`.
    pub fn component(&self, j: usize) -> &[f64] {
        &self.components[j - 1]
    }

    /// Table of `h_c` over `support^c`.
    pub fn conditional(&self, c: usize) -> &[f64] {
        &self.conditional[c - 1]
    }

    /// `sum_j C(s, j) V_j`, which equals `Var(h)`.
    pub fn variance_from_components(&self) -> f64 {
        let mut acc = NeumaierSum::new();
        for (j, v) in self.v.iter().enumerate() {
            acc.add(binomial_f64(self.s as u64, j as u64 + 1) * v);
        }
        acc.value()
    }
}

/// Support points and probabilities of a finite generator.
pub fn discrete_law(generator: &GeneratorSpec) -> Result<(Vec<Sample>, Vec<f64>)> {
    generator.validate()?;
    match generator {
        GeneratorSpec::TwoPoint { values, probs } => {
            Ok((values.iter().map(|v| Sample::new(vec![*v], *v)).collect(), probs.clone()))
        }
        GeneratorSpec::Discrete { support, probs } => Ok((support.clone(), probs.clone())),
        _ => Err(Error::invalid("exact decomposition needs a finite (two_point or discrete) distribution")),
    }
}

fn check_law(kernel: &KernelSpec, support: &[Sample], probs: &[f64]) -> Result<()> {
    if kernel.uses_omega() {
        return Err(Error::invalid("exact decomposition needs a deterministic kernel"));
    }
    if support.is_empty() || support.len() != probs.len() {
        return Err(Error::invalid("support and probabilities must have equal nonzero length"));
    }
    crate::data::Dataset::new(support.to_vec())?;
    kernel.validate(support[0].x.len())?;
    Ok(())
}

fn pow_checked(k: usize, s: usize, cap: u128) -> Result<u128> {
    let mut total: u128 = 1;
    for _ in 0..s {
        total = total.saturating_mul(k as u128);
    }
    if total > cap {
        return Err(Error::CapExceeded { requested: total, cap });
    }
    Ok(total)
}

/// Evaluates `h` on the multiset given by `digits` (support indices), in canonical order.
fn eval_tuple(kernel: &KernelSpec, support: &[Sample], digits: &mut [usize]) -> Result<f64> {
    digits.sort_unstable();
    let rows: Vec<&Sample> = digits.iter().map(|&d| &support[d]).collect();
    kernel.evaluate_rows(&rows, OmegaSeed(0)).map(|(v, _)| v)
}

fn decode(mut idx: usize, k: usize, len: usize, out: &mut Vec<usize>) {
    out.clear();
    out.resize(len, 0);
    for slot in out.iter_mut().rev() {
        *slot = idx % k;
        idx /= k;
    }
}

fn weighted_square_sum(table: &[f64], probs: &[f64]) -> f64 {
    let mut acc = NeumaierSum::new();
    for (v, p) in table.iter().zip(probs) {
        acc.add(p * v * v);
    }
    acc.value()
}

/// Exact decomposition by full enumeration of `support^s` (at most `cap` tuples).
pub fn h_decomposition_exact(kernel: &KernelSpec, support: &[Sample], probs: &[f64], s: usize, cap: u128) -> Result<HDecomposition> {
    check_law(kernel, support, probs)?;
    if s == 0 {
        return Err(Error::invalid("s must be at least 1"));
    }
    let k = support.len();
    let size = pow_checked(k, s, cap)? as usize;
    // The subset recursion costs about (2k)^s operations.
    pow_checked(2 * k, s, cap.saturating_mul(100))?;

    // Tuple probabilities per level.
    let mut level_probs: Vec<Vec<f64>> = vec![probs.to_vec()];
    for _ in 1..s {
        let prev = level_probs.last().unwrap();
        level_probs.push(prev.iter().flat_map(|q| probs.iter().map(move |p| q * p)).collect());
    }

    let mut digits = Vec::with_capacity(s);
    let mut h = Vec::with_capacity(size);
    for idx in 0..size {
        decode(idx, k, s, &mut digits);
        h.push(eval_tuple(kernel, support, &mut digits)?);
    }
    let mut theta_acc = NeumaierSum::new();
    for (v, p) in h.iter().zip(&level_probs[s - 1]) {
        theta_acc.add(p * v);
    }
    let theta = theta_acc.value();

    // conditional[c-1] = h_c over support^c.
    let mut conditional = vec![Vec::new(); s];
    conditional[s - 1] = h.iter().map(|v| v - theta).collect();
    for c in (1..s).rev() {
        let next = &conditional[c];
        let table: Vec<f64> = (0..next.len() / k)
            .map(|q| {
                let mut acc = NeumaierSum::new();
                for (j, p) in probs.iter().enumerate() {
                    acc.add(p * next[q * k + j]);
                }
                acc.value()
            })
            .collect();
        conditional[c - 1] = table;
    }

    let mut components: Vec<Vec<f64>> = Vec::with_capacity(s);
    for j in 1..=s {
        let table = &conditional[j - 1];
        let mut comp = Vec::with_capacity(table.len());
        for (idx, hj) in table.iter().enumerate() {
            decode(idx, k, j, &mut digits);
            let mut acc = NeumaierSum::new();
            acc.add(*hj);
            for mask in 1..(1usize << j) - 1 {
                let mut sub = 0usize;
                for (pos, d) in digits.iter().enumerate() {
                    if mask >> (j - 1 - pos) & 1 == 1 {
                        sub = sub * k + d;
                    }
                }
                acc.add(-components[mask.count_ones() as usize - 1][sub]);
            }
            comp.push(acc.value());
        }
        components.push(comp);
    }

    let v: Vec<f64> = components.iter().zip(&level_probs).map(|(c, p)| weighted_square_sum(c, p)).collect();
    let zeta: Vec<f64> = conditional.iter().zip(&level_probs).map(|(c, p)| weighted_square_sum(c, p)).collect();
    Ok(HDecomposition { s, theta, var_h: zeta[s - 1], v, zeta, components, conditional, probs: probs.to_vec() })
}

/// `Var(U_{n,s}) = sum_j C(s,j)^2 / C(n,j) * V_j`.
pub fn u_variance_from_components(hd: &HDecomposition, n: usize) -> Result<f64> {
    let s = hd.s;
    if n < s {
        return Err(Error::invalid(format!("need n >= s, got n = {n}, s = {s}")));
    }
    let mut acc = NeumaierSum::new();
    let mut ratio = 1.0; // C(s,j) / C(n,j)
    for j in 1..=s {
        ratio *= (s - j + 1) as f64 / (n - j + 1) as f64;
        acc.add(binomial_f64(s as u64, j as u64) * ratio * hd.v[j - 1]);
    }
    Ok(acc.value())
}

/// Mean and variance of the complete U-statistic of order `s` over `n` i.i.d. draws from
/// a finite distribution, computed by enumerating all multisets of size `n`.
pub fn u_moments_by_enumeration(
    kernel: &KernelSpec,
    support: &[Sample],
    probs: &[f64],
    n: usize,
    s: usize,
    cap: u128,
) -> Result<(f64, f64)> {
    check_law(kernel, support, probs)?;
    if s == 0 || s > n {
        return Err(Error::invalid(format!("need 1 <= s <= n, got s = {s}, n = {n}")));
    }
    let k = support.len();
    let multisets = binomial_u128((n + k - 1) as u64, (k - 1) as u64).unwrap_or(u128::MAX);
    let per = binomial_u128(n as u64, s as u64).unwrap_or(u128::MAX);
    let work = multisets.saturating_mul(per);
    if work > cap {
        return Err(Error::CapExceeded { requested: work, cap });
    }
    let subsets: Vec<_> = crate::design::enumerate_subsamples(n, s, cap)?.collect();

    let mut outcomes: Vec<(f64, f64)> = Vec::new();
    let mut counts = vec![0usize; k];
    counts[k - 1] = n;
    loop {
        // Probability of this multiset: multinomial coefficient times the point masses.
        let mut prob = 1.0;
        let mut left = n as u64;
        for (c, p) in counts.iter().zip(probs) {
            prob *= binomial_f64(left, *c as u64) * p.powi(*c as i32);
            left -= *c as u64;
        }
        if prob > 0.0 {
            let rows: Vec<&Sample> = counts.iter().enumerate().flat_map(|(d, &c)| std::iter::repeat_n(&support[d], c)).collect();
            let mut acc = NeumaierSum::new();
            for sub in &subsets {
                let picked: Vec<&Sample> = sub.indices().iter().map(|&i| rows[i]).collect();
                acc.add(kernel.evaluate_rows(&picked, OmegaSeed(0))?.0);
            }
            outcomes.push((prob, acc.value() / subsets.len() as f64));
        }
        if !next_composition(&mut counts) {
            break;
        }
    }
    let mut m = NeumaierSum::new();
    outcomes.iter().for_each(|(p, u)| m.add(p * u));
    let mean = m.value();
    let mut v = NeumaierSum::new();
    outcomes.iter().for_each(|(p, u)| v.add(p * (u - mean) * (u - mean)));
    Ok((mean, v.value()))
}

/// Steps through all compositions of `sum(counts)` into `counts.len()` nonnegative parts.
fn next_composition(counts: &mut [usize]) -> bool {
    let k = counts.len();
    if k == 1 {
        return false;
    }
    // Find the rightmost nonzero entry at position > 0, move one unit left.
    let last = counts[k - 1];
    let mut i = k - 1;
    while i > 0 && counts[i] == 0 {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    if i == k - 1 {
        counts[k - 1] -= 1;
        counts[k - 2] += 1;
    } else {
        counts[i] -= 1;
        counts[i - 1] += 1;
        counts[k - 1] = counts[i] + last;
        counts[i] = 0;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::DEFAULT_ENUMERATION_CAP as CAP;

    fn two_point(a: f64, b: f64, p: f64) -> (Vec<Sample>, Vec<f64>) {
        (vec![Sample::new(vec![a], a), Sample::new(vec![b], b)], vec![p, 1.0 - p])
    }

    #[test]
    fn compositions_are_complete() {
        let mut c = vec![0, 0, 4];
        let mut seen = 1;
        while next_composition(&mut c) {
            assert_eq!(c.iter().sum::<usize>(), 4);
            seen += 1;
        }
        assert_eq!(seen, 15);
        assert_eq!(c, vec![4, 0, 0]);
    }

    #[test]
    fn mean_kernel_components() {
        let (sup, p) = two_point(0.0, 3.0, 0.25);
        let hd = h_decomposition_exact(&KernelSpec::mean(), &sup, &p, 3, CAP).unwrap();
        let var = 9.0 * 0.25 * 0.75;
        assert!((hd.v[0] - var / 9.0).abs() < 1e-14);
        assert!(hd.v[1].abs() < 1e-14 && hd.v[2].abs() < 1e-14);
        assert!((hd.theta - 2.25).abs() < 1e-14);
        assert!((hd.variance_from_components() - hd.var_h).abs() < 1e-14);
    }

    #[test]
    fn variance_kernel_s2() {
        let (sup, p) = two_point(-1.0, 2.0, 0.4);
        let hd = h_decomposition_exact(&KernelSpec::variance(), &sup, &p, 2, CAP).unwrap();
        assert!(hd.v[1] >= 0.0);
        assert!((hd.v[1] - (hd.var_h - 2.0 * hd.v[0])).abs() < 1e-12);
    }

    #[test]
    fn constant_kernel_components_vanish() {
        let (sup, p) = two_point(0.0, 1.0, 0.5);
        let hd = h_decomposition_exact(&KernelSpec::constant(2.0), &sup, &p, 3, CAP).unwrap();
        assert!(hd.v.iter().all(|v| *v == 0.0));
        assert_eq!(hd.theta, 2.0);
    }

    #[test]
    fn u_variance_matches_enumeration_for_variance_kernel() {
        let sup: Vec<Sample> = [0.0, 1.0, 5.0].iter().map(|v| Sample::new(vec![*v], *v)).collect();
        let p = vec![0.2, 0.5, 0.3];
        let hd = h_decomposition_exact(&KernelSpec::variance(), &sup, &p, 3, CAP).unwrap();
        let (mean, var) = u_moments_by_enumeration(&KernelSpec::variance(), &sup, &p, 6, 3, CAP).unwrap();
        let formula = u_variance_from_components(&hd, 6).unwrap();
        assert!((mean - hd.theta).abs() < 1e-12 * hd.theta.abs());
        assert!((var - formula).abs() <= 1e-10 * var, "{var} vs {formula}");
    }

    #[test]
    fn n_equals_s_recovers_var_h() {
        let sup: Vec<Sample> = [0.0, 2.0, 3.0].iter().map(|v| Sample::new(vec![*v], v * v)).collect();
        let p = vec![0.3, 0.3, 0.4];
        let hd = h_decomposition_exact(&KernelSpec::knn(2, vec![1.0]), &sup, &p, 4, CAP).unwrap();
        let u = u_variance_from_components(&hd, 4).unwrap();
        assert!((u - hd.var_h).abs() < 1e-12 * hd.var_h);
    }

    #[test]
    fn randomized_kernel_rejected() {
        let (sup, p) = two_point(0.0, 1.0, 0.5);
        assert!(h_decomposition_exact(&KernelSpec::random_k(1), &sup, &p, 2, CAP).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let (sup, p) = two_point(0.0, 1.0, 0.5);
        let err = h_decomposition_exact(&KernelSpec::mean(), &sup, &p, 10, 100).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }
}
