//! Base learners `h(Z_1, ..., Z_s; omega)`.
//!
//! Every kernel sees its subsample in canonical order (ascending row index), so
//! deterministic kernels are exactly permutation symmetric and randomized kernels are
//! symmetric once omega is fixed. Tie rules that mention "smaller row index" refer to
//! positions in this canonical order.

mod basic;
mod cart;
mod knn;
mod ols;
mod pnn;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::rng::OmegaSeed;

pub use basic::{mean_kernel, random_k_kernel, variance_kernel};
pub use cart::cart_tree_kernel;
pub use knn::knn_kernel;
pub use ols::{ols_kernel, OLS_CONDITION_THRESHOLD};
pub use pnn::{compute_kpnn, rp_tree_kernel, PnnSet, RpTreeOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Mean,
    Variance,
    OlsPredict,
    Knn,
    CartTree,
    RpTree,
    /// Average of `k` responses chosen uniformly at random, ignoring covariates.
    RandomK,
    /// Returns `value` regardless of the data.
    Constant,
}

/// A base learner plus its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default)]
    pub mtry: usize,
    #[serde(default)]
    pub target_x: Vec<f64>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub value: f64,
}

fn one() -> usize {
    1
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl KernelSpec {
    fn base(kind: KernelKind) -> Self {
        KernelSpec { kind, k: 1, mtry: 0, target_x: Vec::new(), value: 0.0 }
    }

    pub fn mean() -> Self {
        Self::base(KernelKind::Mean)
    }

    pub fn variance() -> Self {
        Self::base(KernelKind::Variance)
    }

    pub fn constant(value: f64) -> Self {
        KernelSpec { value, ..Self::base(KernelKind::Constant) }
    }

    pub fn ols(target_x: Vec<f64>) -> Self {
        KernelSpec { target_x, ..Self::base(KernelKind::OlsPredict) }
    }

    pub fn knn(k: usize, target_x: Vec<f64>) -> Self {
        KernelSpec { k, target_x, ..Self::base(KernelKind::Knn) }
    }

    pub fn cart(k: usize, mtry: usize, target_x: Vec<f64>) -> Self {
        KernelSpec { k, mtry, target_x, ..Self::base(KernelKind::CartTree) }
    }

    pub fn rp_tree(k: usize, target_x: Vec<f64>) -> Self {
        KernelSpec { k, target_x, ..Self::base(KernelKind::RpTree) }
    }

    pub fn random_k(k: usize) -> Self {
        KernelSpec { k, ..Self::base(KernelKind::RandomK) }
    }

    /// Whether the kernel consumes its omega stream.
    pub fn uses_omega(&self) -> bool {
        match self.kind {
            KernelKind::CartTree => self.mtry > 0 && self.mtry < self.target_x.len(),
            KernelKind::RpTree | KernelKind::RandomK => true,
            _ => false,
        }
    }

    fn is_prediction(&self) -> bool {
        matches!(self.kind, KernelKind::OlsPredict | KernelKind::Knn | KernelKind::CartTree | KernelKind::RpTree)
    }

    /// Checks hyperparameters against covariate dimension `p`.
    pub fn validate(&self, p: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if self.is_prediction() && self.target_x.len() != p {
            return Err(Error::invalid(format!(
                "target_x has length {}, data has p = {p}",
                self.target_x.len()
            )));
        }
        if self.kind == KernelKind::CartTree && self.mtry > p {
            return Err(Error::invalid(format!("mtry = {} exceeds p = {p}", self.mtry)));
        }
        if self.target_x.iter().any(|v| !v.is_finite()) || !self.value.is_finite() {
            return Err(Error::invalid("kernel parameters must be finite"));
        }
        Ok(())
    }

    /// Evaluates the kernel on rows already in canonical order.
    ///
    /// Returns the value and a flag marking evaluations that fell back to a documented
    /// total extension (currently: RP tree with fewer than `k` potential nearest neighbors).
    pub fn evaluate_rows(&self, rows: &[&Sample], omega: OmegaSeed) -> Result<(f64, bool)> {
        if rows.is_empty() {
            return Err(Error::invalid("kernel needs a nonempty subsample"));
        }
        let ys = || rows.iter().map(|r| r.y);
        let value = match self.kind {
            KernelKind::Mean => mean_kernel(ys()),
            KernelKind::Variance => variance_kernel(&ys().collect::<Vec<_>>())?,
            KernelKind::Constant => self.value,
            KernelKind::RandomK => random_k_kernel(&ys().collect::<Vec<_>>(), self.k, omega)?,
            KernelKind::OlsPredict => ols_kernel(rows, &self.target_x)?,
            KernelKind::Knn => knn_kernel(rows, &self.target_x, self.k)?,
            KernelKind::CartTree => cart_tree_kernel(rows, &self.target_x, self.k, self.mtry, omega),
            KernelKind::RpTree => {
                let out = rp_tree_kernel(rows, &self.target_x, self.k, omega);
                return Ok((out.value, out.truncated));
            }
        };
        Ok((value, false))
    }

    /// Evaluates the kernel on the rows of `data` named by `indices` (any order).
    pub fn evaluate(&self, data: &Dataset, indices: &[usize], omega: OmegaSeed) -> Result<f64> {
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        let rows: Vec<&Sample> = sorted.iter().map(|&i| data.row(i)).collect();
        self.evaluate_rows(&rows, omega).map(|(v, _)| v)
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_omega;

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn toy_data(n: usize) -> Dataset {
        // Deterministic, irregular covariates in 2D with a nonlinear response.
        let rows = (0..n)
            .map(|i| {
                let a = ((i * 7919) % 101) as f64 / 101.0;
                let b = ((i * 104_729) % 97) as f64 / 97.0;
                Sample::new(vec![a, b], (3.0 * a).sin() + b * b + 0.1 * i as f64)
            })
            .collect();
        Dataset::new(rows).unwrap()
    }

    fn all_kernels() -> Vec<KernelSpec> {
        let t = vec![0.4, 0.6];
        vec![
            KernelSpec::mean(),
            KernelSpec::variance(),
            KernelSpec::constant(1.5),
            KernelSpec::ols(t.clone()),
            KernelSpec::knn(1, t.clone()),
            KernelSpec::knn(3, t.clone()),
            KernelSpec::cart(1, 0, t.clone()),
            KernelSpec::cart(2, 1, t.clone()),
            KernelSpec::rp_tree(1, t.clone()),
            KernelSpec::rp_tree(2, t.clone()),
            KernelSpec::random_k(2),
        ]
    }

    #[test]
    fn permutation_symmetry_exhaustive_up_to_six() {
        let data = toy_data(9);
        for kernel in all_kernels() {
            for s in 2..=6usize {
                if kernel.kind == KernelKind::OlsPredict && s < 2 {
                    continue;
                }
                if kernel.k > s && matches!(kernel.kind, KernelKind::Knn | KernelKind::RandomK) {
                    continue;
                }
                let base: Vec<usize> = (0..s).map(|i| (i * 4 + 1) % 9).collect();
                let omega = derive_omega(5, s as u64);
                let reference = kernel.evaluate(&data, &base, omega).unwrap();
                for perm in permutations(s) {
                    let shuffled: Vec<usize> = perm.iter().map(|&i| base[i]).collect();
                    let v = kernel.evaluate(&data, &shuffled, omega).unwrap();
                    assert_eq!(v.to_bits(), reference.to_bits(), "{:?} s={s}", kernel.kind);
                }
            }
        }
    }

    #[test]
    fn knn_with_k_equal_s_is_the_mean() {
        let data = toy_data(12);
        for s in 1..=8usize {
            let idx: Vec<usize> = (0..s).map(|i| (i * 5) % 12).collect();
            let knn = KernelSpec::knn(s, vec![0.3, 0.3]).evaluate(&data, &idx, OmegaSeed(0)).unwrap();
            let mean = KernelSpec::mean().evaluate(&data, &idx, OmegaSeed(0)).unwrap();
            assert_eq!(knn.to_bits(), mean.to_bits());
        }
    }

    #[test]
    fn omega_flag() {
        assert!(!KernelSpec::mean().uses_omega());
        assert!(!KernelSpec::cart(1, 0, vec![0.0, 0.0]).uses_omega());
        assert!(KernelSpec::cart(1, 1, vec![0.0, 0.0]).uses_omega());
        assert!(KernelSpec::rp_tree(1, vec![0.0]).uses_omega());
        assert!(KernelSpec::random_k(3).uses_omega());
    }

    #[test]
    fn validation() {
        assert!(KernelSpec::knn(0, vec![0.0]).validate(1).is_err());
        assert!(KernelSpec::knn(1, vec![0.0]).validate(2).is_err());
        assert!(KernelSpec::cart(1, 3, vec![0.0, 0.0]).validate(2).is_err());
        assert!(KernelSpec::mean().validate(5).is_ok());
    }

    #[test]
    fn json_shape() {
        let spec: KernelSpec = serde_json::from_str(r#"{"kind":"knn","k":3,"target_x":[0.5]}"#).unwrap();
        assert_eq!(spec, KernelSpec::knn(3, vec![0.5]));
        let spec: KernelSpec = serde_json::from_str(r#"{"kind":"cart_tree","k":5,"mtry":1,"target_x":[0.1,0.2]}"#).unwrap();
        assert_eq!(spec.mtry, 1);
    }
}
