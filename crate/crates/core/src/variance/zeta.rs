//! Monte-Carlo estimators of the covariance components `zeta_c`.
//!
//! `zeta_c` is the covariance of two kernel draws sharing their first `c` observations,
//! with the remaining observations and omega drawn independently.
//!
//! [`estimate_zeta_c`] uses a crossed design. Each block draws `G` independent sets of
//! shared rows and `m_inner` independent completions (the other `s - c` rows plus an
//! omega seed), and evaluates the kernel on every (shared, completion) pair. Writing
//! `h = theta + a(shared) + b(completion) + e`, `Var(a) = zeta_c` and the two-way
//! random-effects identity `E[MS_rows - MS_interaction] = m_inner * Var(a)` gives an
//! unbiased block estimate. Effects common to a completion cancel, so few completions
//! per row suffice, and drawing completions once per block amortizes data generation.
//! The estimate is the mean over independent blocks; its SE is their standard error.

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::learners::KernelSpec;
use crate::rng::{OmegaSeed, SeedPath};
use crate::simlab::generators::GeneratorSpec;
use crate::stats::{jackknife, mean, sample_variance, NeumaierSum};

const ZETA_C_STREAM: u64 = 0x2E7A_0000_0000_0001;
const ZETA_S_STREAM: u64 = 0x2E7A_0000_0000_0002;

/// A Monte-Carlo estimate with its standard error and bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZetaEstimate {
    pub value: f64,
    pub se: f64,
    pub m_outer: usize,
    pub m_inner: usize,
    /// Blocks (or draws) dropped because a kernel evaluation failed numerically
    /// (e.g. singular OLS).
    pub failures: u64,
    /// Evaluations that used a documented kernel fallback.
    pub flagged: u64,
}

impl ZetaEstimate {
    /// A known value with zero standard error.
    pub fn exact(value: f64) -> Self {
        ZetaEstimate { value, se: 0.0, m_outer: 0, m_inner: 0, failures: 0, flagged: 0 }
    }
}

/// Mean and within-group sample variance of one group of kernel draws.
#[derive(Clone, Copy, Debug)]
pub(crate) struct GroupSummary {
    pub mean: f64,
    pub var: f64,
}

pub(crate) struct Groups {
    pub groups: Vec<GroupSummary>,
    pub failures: u64,
    pub flagged: u64,
}

fn check_common(kernel: &KernelSpec, generator: &GeneratorSpec, s: usize) -> Result<()> {
    generator.validate()?;
    kernel.validate(generator.p())?;
    if s == 0 {
        return Err(Error::invalid("s must be at least 1"));
    }
    Ok(())
}

fn evaluate(kernel: &KernelSpec, rows: &[Sample], omega: OmegaSeed) -> Result<(f64, bool)> {
    let refs: Vec<&Sample> = rows.iter().collect();
    kernel.evaluate_rows(&refs, omega)
}

/// Draws `m_outer` groups of `m_inner` kernel values sharing the first `c` rows.
pub(crate) fn grouped_draws(
    kernel: &KernelSpec,
    generator: &GeneratorSpec,
    s: usize,
    c: usize,
    m_outer: usize,
    m_inner: usize,
    stream: SeedPath,
) -> Result<Groups> {
    check_common(kernel, generator, s)?;
    if c == 0 || c > s {
        return Err(Error::invalid(format!("need 1 <= c <= s, got c = {c}, s = {s}")));
    }
    if m_outer < 2 || m_inner < 2 {
        return Err(Error::invalid("m_outer and m_inner must both be at least 2"));
    }
    let results: Vec<Result<Option<(GroupSummary, u64)>>> = (0..m_outer)
        .into_par_iter()
        .map(|g| {
            let mut rng = stream.omega(g as u64).rng();
            let mut rows: Vec<Sample> = (0..s).map(|_| generator.draw(&mut rng)).collect();
            let mut values = Vec::with_capacity(m_inner);
            let mut flagged = 0;
            for inner in 0..m_inner {
                if inner > 0 {
                    for row in &mut rows[c..] {
                        generator.fill(&mut rng, row);
                    }
                }
                let omega = OmegaSeed(rng.next_u64());
                match evaluate(kernel, &rows, omega) {
                    Ok((v, f)) => {
                        values.push(v);
                        flagged += u64::from(f);
                    }
                    Err(e) if e.is_numerical() => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
            let m = mean(&values);
            let var = sample_variance(&values);
            Ok(Some((GroupSummary { mean: m, var }, flagged)))
        })
        .collect();
    let mut out = Groups { groups: Vec::with_capacity(m_outer), failures: 0, flagged: 0 };
    for r in results {
        match r? {
            Some((g, f)) => {
                out.groups.push(g);
                out.flagged += f;
            }
            None => out.failures += 1,
        }
    }
    if out.groups.len() < 2 {
        return Err(Error::Degenerate(format!("only {} of {m_outer} groups evaluated successfully", out.groups.len())));
    }
    Ok(out)
}

/// Unbiased between-group variance component with jackknife SE.
pub(crate) fn between_component(groups: &[GroupSummary], m_inner: usize) -> (f64, f64) {
    let features: Vec<Vec<f64>> = groups.iter().map(|g| vec![g.mean, g.mean * g.mean, g.var]).collect();
    jackknife(&features, |f, m| {
        let m = m as f64;
        m / (m - 1.0) * (f[1] - f[0] * f[0]) - f[2] / m_inner as f64
    })
}

/// Rows per block: about `s` (one generated row per evaluation), at least 16, and small
/// enough to leave at least 16 blocks.
fn rows_per_block(m_outer: usize, s: usize) -> usize {
    s.max(16).min((m_outer / 16).max(2))
}

struct BlockOutcome {
    estimate: f64,
    flagged: u64,
}

fn crossed_block(
    kernel: &KernelSpec,
    generator: &GeneratorSpec,
    s: usize,
    c: usize,
    rows: usize,
    cols: usize,
    mut rng: crate::rng::StreamRng,
) -> Result<Option<BlockOutcome>> {
    let shared: Vec<Vec<Sample>> = (0..rows).map(|_| (0..c).map(|_| generator.draw(&mut rng)).collect()).collect();
    let completions: Vec<(Vec<Sample>, OmegaSeed)> = (0..cols)
        .map(|_| ((0..s - c).map(|_| generator.draw(&mut rng)).collect(), OmegaSeed(rng.next_u64())))
        .collect();
    let mut table = vec![0.0; rows * cols];
    let mut flagged = 0;
    let mut refs: Vec<&Sample> = Vec::with_capacity(s);
    for (g, head) in shared.iter().enumerate() {
        for (j, (tail, omega)) in completions.iter().enumerate() {
            refs.clear();
            refs.extend(head.iter());
            refs.extend(tail.iter());
            match kernel.evaluate_rows(&refs, *omega) {
                Ok((v, f)) => {
                    table[g * cols + j] = v;
                    flagged += u64::from(f);
                }
                Err(e) if e.is_numerical() => return Ok(None),
                Err(e) => return Err(e),
            }
        }
    }
    let row_means: Vec<f64> = table.chunks(cols).map(mean).collect();
    let col_means: Vec<f64> = (0..cols).map(|j| mean(&(0..rows).map(|g| table[g * cols + j]).collect::<Vec<_>>())).collect();
    let grand = mean(&row_means);
    let mut ss_rows = NeumaierSum::new();
    for r in &row_means {
        ss_rows.add((r - grand) * (r - grand));
    }
    let mut ss_int = NeumaierSum::new();
    for (g, r) in row_means.iter().enumerate() {
        for (j, cm) in col_means.iter().enumerate() {
            let e = table[g * cols + j] - r - cm + grand;
            ss_int.add(e * e);
        }
    }
    let (gf, mf) = (rows as f64, cols as f64);
    let ms_rows = mf * ss_rows.value() / (gf - 1.0);
    let ms_int = ss_int.value() / ((gf - 1.0) * (mf - 1.0));
    Ok(Some(BlockOutcome { estimate: (ms_rows - ms_int) / mf, flagged }))
}

/// Estimates `zeta_c` for `1 <= c <= s` from about `m_outer` shared-row draws, each crossed
/// with `m_inner` completions (see the module docs).
pub fn estimate_zeta_c(
    kernel: &KernelSpec,
    generator: &GeneratorSpec,
    s: usize,
    c: usize,
    m_outer: usize,
    m_inner: usize,
    seed: u64,
) -> Result<ZetaEstimate> {
    check_common(kernel, generator, s)?;
    if c == 0 || c > s {
        return Err(Error::invalid(format!("need 1 <= c <= s, got c = {c}, s = {s}")));
    }
    if m_outer < 4 || m_inner < 2 {
        return Err(Error::invalid("need m_outer >= 4 and m_inner >= 2"));
    }
    let rows = rows_per_block(m_outer, s);
    let blocks = m_outer / rows;
    let stream = SeedPath::new(seed).child(ZETA_C_STREAM).child(c as u64);
    let outcomes: Vec<Result<Option<BlockOutcome>>> = (0..blocks)
        .into_par_iter()
        .map(|b| crossed_block(kernel, generator, s, c, rows, m_inner, stream.omega(b as u64).rng()))
        .collect();
    let mut estimates = Vec::with_capacity(blocks);
    let (mut failures, mut flagged) = (0, 0);
    for o in outcomes {
        match o? {
            Some(b) => {
                estimates.push(b.estimate);
                flagged += b.flagged;
            }
            None => failures += 1,
        }
    }
    if estimates.len() < 2 {
        return Err(Error::Degenerate(format!("only {} of {blocks} blocks evaluated successfully", estimates.len())));
    }
    let value = mean(&estimates);
    let se = (sample_variance(&estimates) / estimates.len() as f64).sqrt();
    Ok(ZetaEstimate { value, se, m_outer: estimates.len() * rows, m_inner, failures, flagged })
}

/// Estimates `zeta_{1,omega}`: covariance of two draws sharing `Z_1` only.
pub fn estimate_zeta1_omega(
    kernel: &KernelSpec,
    generator: &GeneratorSpec,
    s: usize,
    m_outer: usize,
    m_inner: usize,
    seed: u64,
) -> Result<ZetaEstimate> {
    estimate_zeta_c(kernel, generator, s, 1, m_outer, m_inner, seed)
}

/// Estimates `zeta_{s,omega}`: covariance of two draws sharing all data, independent omegas.
///
/// Deterministic kernels are rejected unless `force` is set, in which case the estimate
/// targets `zeta_s`.
pub fn estimate_zeta_s_omega(
    kernel: &KernelSpec,
    generator: &GeneratorSpec,
    s: usize,
    m_outer: usize,
    m_inner: usize,
    seed: u64,
    force: bool,
) -> Result<ZetaEstimate> {
    if !kernel.uses_omega() && !force {
        return Err(Error::invalid("zeta_s_omega needs a randomized kernel (deterministic kernels have zeta_s_omega = zeta_s)"));
    }
    estimate_zeta_c(kernel, generator, s, s, m_outer, m_inner, seed)
}

/// Estimates `zeta_s = Var(h)` from `m` independent draws of data and omega.
pub fn estimate_zeta_s(kernel: &KernelSpec, generator: &GeneratorSpec, s: usize, m: usize, seed: u64) -> Result<ZetaEstimate> {
    let draws = independent_draws(kernel, generator, s, m, SeedPath::new(seed).child(ZETA_S_STREAM))?;
    let features: Vec<Vec<f64>> = draws.values.iter().map(|v| vec![*v, v * v]).collect();
    let (value, se) = jackknife(&features, |f, m| {
        let m = m as f64;
        m / (m - 1.0) * (f[1] - f[0] * f[0])
    });
    Ok(ZetaEstimate { value, se, m_outer: m, m_inner: 1, failures: draws.failures, flagged: draws.flagged })
}

pub(crate) struct Draws {
    pub values: Vec<f64>,
    pub failures: u64,
    pub flagged: u64,
}

/// `m` independent kernel values on fresh data and omega.
pub(crate) fn independent_draws(
    kernel: &KernelSpec,
    generator: &GeneratorSpec,
    s: usize,
    m: usize,
    stream: SeedPath,
) -> Result<Draws> {
    check_common(kernel, generator, s)?;
    if m < 2 {
        return Err(Error::invalid("m must be at least 2"));
    }
    let results: Vec<Result<Option<(f64, bool)>>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.omega(i as u64).rng();
            let rows: Vec<Sample> = (0..s).map(|_| generator.draw(&mut rng)).collect();
            let omega = OmegaSeed(rng.next_u64());
            match evaluate(kernel, &rows, omega) {
                Ok(v) => Ok(Some(v)),
                Err(e) if e.is_numerical() => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut out = Draws { values: Vec::with_capacity(m), failures: 0, flagged: 0 };
    for r in results {
        match r? {
            Some((v, f)) => {
                out.values.push(v);
                out.flagged += u64::from(f);
            }
            None => out.failures += 1,
        }
    }
    if out.values.len() < 2 {
        return Err(Error::Degenerate(format!("only {} of {m} draws evaluated successfully", out.values.len())));
    }
    Ok(out)
}

/// Plug-in `zeta_s` on a fixed dataset: the variance of the kernel over random size-`s`
/// subsamples of `data`. Conditional on the data, so biased for the population quantity.
pub fn plugin_zeta_s(kernel: &KernelSpec, data: &crate::data::Dataset, s: usize, m: usize, seed: u64) -> Result<ZetaEstimate> {
    kernel.validate(data.p())?;
    if s == 0 || s > data.n() || m < 2 {
        return Err(Error::invalid("need 1 <= s <= n and m >= 2"));
    }
    let stream = SeedPath::new(seed).child(ZETA_S_STREAM);
    let values: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.omega(i as u64).rng();
            let mut idx = rand::seq::index::sample(&mut rng, data.n(), s).into_vec();
            idx.sort_unstable();
            kernel.evaluate(data, &idx, OmegaSeed(rng.next_u64()))
        })
        .collect::<Result<_>>()?;
    let features: Vec<Vec<f64>> = values.iter().map(|v| vec![*v, v * v]).collect();
    let (value, se) = jackknife(&features, |f, m| {
        let m = m as f64;
        m / (m - 1.0) * (f[1] - f[0] * f[0])
    });
    Ok(ZetaEstimate { value, se, m_outer: m, m_inner: 1, failures: 0, flagged: 0 })
}
