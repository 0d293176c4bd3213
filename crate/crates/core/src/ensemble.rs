//! Complete and incomplete generalized U-statistics.

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{Dataset, Sample};
use crate::design::{draw_incomplete_design, enumerate_subsamples, EnsembleConfig, Scheme, SubsampleIndex};
use crate::error::{Error, Result};
use crate::learners::KernelSpec;
use crate::rng::{derive_omega, SeedPath};
use crate::stats::NeumaierSum;

const RESERVOIR_STREAM: u64 = 0x5E5E_7701_0000_0002;
const CHUNK: usize = 1 << 14;

/// Which per-subsample kernel values to keep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Capture {
    #[default]
    None,
    All,
    /// Keep a uniform random subset of at most this many values (seeded by the master seed).
    Reservoir(usize),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EnsembleOptions {
    pub capture: Capture,
}

impl EnsembleOptions {
    pub fn capture_all() -> Self {
        EnsembleOptions { capture: Capture::All }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub theta_hat: f64,
    /// `(ordinal, kernel value)` pairs in ordinal order, when captured.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_subsample: Option<Vec<(u64, f64)>>,
    #[serde(rename = "realized_N")]
    pub realized_n: u64,
    #[serde(rename = "target_N")]
    pub target_n: u64,
    pub s: usize,
    pub scheme: Scheme,
    pub master_seed: u64,
    /// Evaluations that used a documented fallback (e.g. RP tree with a short PNN set).
    pub flagged: u64,
}

struct Fold {
    sum: NeumaierSum,
    count: u64,
    flagged: u64,
    values: Vec<(u64, f64)>,
}

impl Fold {
    fn new() -> Self {
        Fold { sum: NeumaierSum::new(), count: 0, flagged: 0, values: Vec::new() }
    }
}

fn eval_one(data: &Dataset, kernel: &KernelSpec, sub: &SubsampleIndex, master: u64, ordinal: u64) -> Result<(f64, bool)> {
    let rows: Vec<&Sample> = sub.indices().iter().map(|&i| data.row(i)).collect();
    kernel.evaluate_rows(&rows, derive_omega(master, ordinal))
}

/// Evaluates one chunk in parallel, then folds it in ordinal order.
fn fold_chunk(
    fold: &mut Fold,
    data: &Dataset,
    kernel: &KernelSpec,
    subs: &[SubsampleIndex],
    first_ordinal: u64,
    master: u64,
    keep: bool,
) -> Result<()> {
    let results: Vec<Result<(f64, bool)>> = subs
        .par_iter()
        .enumerate()
        .map(|(j, sub)| eval_one(data, kernel, sub, master, first_ordinal + j as u64))
        .collect();
    for (j, r) in results.into_iter().enumerate() {
        let (v, flag) = r?;
        fold.sum.add(v);
        fold.count += 1;
        fold.flagged += u64::from(flag);
        if keep {
            fold.values.push((first_ordinal + j as u64, v));
        }
    }
    Ok(())
}

fn finish(fold: Fold, capture: Capture, config: &EnsembleConfig, target_n: u64) -> Result<EnsembleResult> {
    if fold.count == 0 {
        return Err(Error::Degenerate("the drawn design is empty (N_hat = 0)".into()));
    }
    let per_subsample = match capture {
        Capture::None => None,
        Capture::All => Some(fold.values),
        Capture::Reservoir(cap) => {
            let m = fold.values.len();
            if m <= cap {
                Some(fold.values)
            } else {
                let mut rng = SeedPath::new(config.master_seed).child(RESERVOIR_STREAM).rng();
                let mut keep = index::sample(&mut rng, m, cap).into_vec();
                keep.sort_unstable();
                Some(keep.into_iter().map(|i| fold.values[i]).collect())
            }
        }
    };
    Ok(EnsembleResult {
        theta_hat: fold.sum.value() / fold.count as f64,
        per_subsample,
        realized_n: fold.count,
        target_n,
        s: config.s,
        scheme: config.scheme,
        master_seed: config.master_seed,
        flagged: fold.flagged,
    })
}

/// Complete generalized U-statistic: the kernel averaged over all `C(n, s)` subsamples,
/// subsample `r` (lexicographic rank) using omega `derive_omega(master_seed, r)`.
pub fn complete_u(data: &Dataset, kernel: &KernelSpec, s: usize, master_seed: u64, options: EnsembleOptions) -> Result<EnsembleResult> {
    let config = EnsembleConfig::new(s, 0, Scheme::Complete, master_seed);
    complete_with_config(data, kernel, &config, options)
}

fn complete_with_config(data: &Dataset, kernel: &KernelSpec, config: &EnsembleConfig, options: EnsembleOptions) -> Result<EnsembleResult> {
    kernel.validate(data.p())?;
    let mut combos = enumerate_subsamples(data.n(), config.s, config.enumeration_cap)?;
    let keep = options.capture != Capture::None;
    let mut fold = Fold::new();
    let mut buf = Vec::with_capacity(CHUNK);
    let mut ordinal = 0u64;
    loop {
        buf.clear();
        buf.extend(combos.by_ref().take(CHUNK));
        if buf.is_empty() {
            break;
        }
        fold_chunk(&mut fold, data, kernel, &buf, ordinal, config.master_seed, keep)?;
        ordinal += buf.len() as u64;
    }
    let total = fold.count;
    finish(fold, options.capture, config, total)
}

/// Generalized (possibly incomplete) U-statistic under `config`.
///
/// `theta_hat` is the average over the realized design, i.e. it divides by `N_hat`.
pub fn generalized_incomplete_u(data: &Dataset, kernel: &KernelSpec, config: &EnsembleConfig, options: EnsembleOptions) -> Result<EnsembleResult> {
    config.validate(data.n())?;
    if config.scheme == Scheme::Complete {
        return complete_with_config(data, kernel, config, options);
    }
    kernel.validate(data.p())?;
    let design = draw_incomplete_design(
        data.n(),
        config.s,
        config.n_target,
        config.scheme,
        config.master_seed,
        config.enumeration_cap,
    )?;
    let keep = options.capture != Capture::None;
    let mut fold = Fold::new();
    for (c, chunk) in design.subsamples.chunks(CHUNK).enumerate() {
        fold_chunk(&mut fold, data, kernel, chunk, (c * CHUNK) as u64, config.master_seed, keep)?;
    }
    finish(fold, options.capture, config, config.n_target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ys(v: &[f64]) -> Dataset {
        Dataset::from_responses(v).unwrap()
    }

    #[test]
    fn complete_mean_is_grand_mean() {
        let d = ys(&[1.0, 4.0, 2.0, 8.0, 5.0]);
        for s in 1..=5 {
            let r = complete_u(&d, &KernelSpec::mean(), s, 0, EnsembleOptions::default()).unwrap();
            assert!((r.theta_hat - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn complete_variance_example() {
        let d = ys(&[0.0, 2.0, 4.0]);
        let r = complete_u(&d, &KernelSpec::variance(), 2, 0, EnsembleOptions::capture_all()).unwrap();
        assert_eq!(r.theta_hat, 8.0);
        assert_eq!(r.realized_n, 3);
        let vals: Vec<f64> = r.per_subsample.unwrap().iter().map(|p| p.1).collect();
        assert_eq!(vals, vec![4.0, 16.0, 4.0]);
    }

    #[test]
    fn n_equals_s_is_one_evaluation() {
        let d = ys(&[1.0, 2.0, 6.0]);
        let r = complete_u(&d, &KernelSpec::mean(), 3, 0, EnsembleOptions::default()).unwrap();
        assert_eq!(r.realized_n, 1);
        assert_eq!(r.theta_hat, 3.0);
    }

    #[test]
    fn bernoulli_full_budget_equals_complete() {
        let d = ys(&[0.3, 1.7, -2.0, 4.4, 0.9, 1.1]);
        let kernel = KernelSpec::random_k(2);
        let cfg = EnsembleConfig::new(3, 20, Scheme::Bernoulli, 5);
        let inc = generalized_incomplete_u(&d, &kernel, &cfg, EnsembleOptions::default()).unwrap();
        let com = complete_u(&d, &kernel, 3, 5, EnsembleOptions::default()).unwrap();
        assert_eq!(inc.theta_hat, com.theta_hat);
        assert_eq!(inc.realized_n, 20);
    }

    #[test]
    fn fixed_one_is_single_evaluation() {
        let d = ys(&[0.3, 1.7, -2.0, 4.4]);
        let cfg = EnsembleConfig::new(2, 1, Scheme::FixedN, 9);
        let r = generalized_incomplete_u(&d, &KernelSpec::mean(), &cfg, EnsembleOptions::capture_all()).unwrap();
        assert_eq!(r.realized_n, 1);
        assert_eq!(r.per_subsample.unwrap().len(), 1);
    }

    #[test]
    fn reservoir_keeps_at_most_cap() {
        let d = ys(&(0..12).map(f64::from).collect::<Vec<_>>());
        let opts = EnsembleOptions { capture: Capture::Reservoir(10) };
        let r = complete_u(&d, &KernelSpec::mean(), 3, 1, opts).unwrap();
        let kept = r.per_subsample.unwrap();
        assert_eq!(kept.len(), 10);
        assert!(kept.windows(2).all(|w| w[0].0 < w[1].0));
        assert_eq!(r.realized_n, 220);
    }

    #[test]
    fn cap_exceeded_propagates() {
        let d = ys(&(0..40).map(f64::from).collect::<Vec<_>>());
        let cfg = EnsembleConfig { enumeration_cap: 100, ..EnsembleConfig::new(5, 1, Scheme::Complete, 0) };
        let err = generalized_incomplete_u(&d, &KernelSpec::mean(), &cfg, EnsembleOptions::default()).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let d = ys(&(0..30).map(|i| (i as f64 * 0.37).sin()).collect::<Vec<_>>());
        let cfg = EnsembleConfig::new(6, 5000, Scheme::Bernoulli, 42);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| generalized_incomplete_u(&d, &KernelSpec::random_k(3), &cfg, EnsembleOptions::default()).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.theta_hat.to_bits(), b.theta_hat.to_bits());
        assert_eq!(a.realized_n, b.realized_n);
    }
}
