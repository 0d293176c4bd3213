//! Subsample designs: complete enumeration and the Bernoulli / fixed-size incomplete
//! selection schemes.

use std::collections::HashSet;
use std::io::Write;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_omega, OmegaSeed, SeedPath};
use crate::stats::{binomial_u128, Count};

pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Sorted, duplicate-free row indices of one subsample (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsampleIndex(Vec<usize>);

impl SubsampleIndex {
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.is_empty() {
            return Err(Error::invalid("subsample must be nonempty"));
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("subsample indices must be distinct"));
        }
        if *indices.last().unwrap() >= n {
            return Err(Error::invalid("subsample index out of range"));
        }
        Ok(SubsampleIndex(indices))
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        SubsampleIndex(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn s(&self) -> usize {
        self.0.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Complete,
    Bernoulli,
    #[serde(alias = "fixed_n")]
    FixedN,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "complete" => Ok(Scheme::Complete),
            "bernoulli" => Ok(Scheme::Bernoulli),
            "fixedn" | "fixed_n" | "fixed" => Ok(Scheme::FixedN),
            other => Err(Error::invalid(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Subsample size, subsample budget, selection scheme and master seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub s: usize,
    #[serde(rename = "N")]
    pub n_target: u64,
    pub scheme: Scheme,
    pub master_seed: u64,
    #[serde(default = "default_cap")]
    pub enumeration_cap: u128,
}

fn default_cap() -> u128 {
    DEFAULT_ENUMERATION_CAP
}

impl EnsembleConfig {
    pub fn new(s: usize, n_target: u64, scheme: Scheme, master_seed: u64) -> Self {
        EnsembleConfig { s, n_target, scheme, master_seed, enumeration_cap: DEFAULT_ENUMERATION_CAP }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        check_sizes(n, self.s)?;
        if self.scheme != Scheme::Complete {
            check_budget(n, self.s, self.n_target)?;
        }
        Ok(())
    }
}

fn check_sizes(n: usize, s: usize) -> Result<()> {
    if s == 0 || s > n {
        return Err(Error::invalid(format!("need 1 <= s <= n, got s = {s}, n = {n}")));
    }
    Ok(())
}

fn check_budget(n: usize, s: usize, n_target: u64) -> Result<()> {
    if n_target == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    if let Count::Exact(total) = Count::of_binomial(n as u64, s as u64) {
        if n_target as u128 > total {
            return Err(Error::invalid(format!("N = {n_target} exceeds C({n}, {s}) = {total}")));
        }
    }
    Ok(())
}

/// Lexicographic iterator over all `s`-subsets of `0..n`.
#[derive(Clone, Debug)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Combinations {
    type Item = SubsampleIndex;

    fn next(&mut self) -> Option<SubsampleIndex> {
        let out = self.current.clone()?;
        let s = out.len();
        let cur = self.current.as_mut().unwrap();
        // Rightmost position that can still advance.
        let mut i = s;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if cur[i] < self.n - s + i {
                cur[i] += 1;
                for j in i + 1..s {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(SubsampleIndex::from_sorted_unchecked(out))
    }
}

/// All `C(n, s)` subsamples in lexicographic order, produced lazily.
pub fn enumerate_subsamples(n: usize, s: usize, cap: u128) -> Result<Combinations> {
    check_sizes(n, s)?;
    match Count::of_binomial(n as u64, s as u64) {
        Count::Exact(c) if c <= cap => Ok(Combinations { n, current: Some((0..s).collect()) }),
        Count::Exact(c) => Err(Error::CapExceeded { requested: c, cap }),
        Count::Huge => Err(Error::CapExceeded { requested: u128::MAX, cap }),
    }
}

/// The subsample of lexicographic rank `rank` among all `s`-subsets of `0..n`.
pub fn unrank_combination(n: usize, s: usize, mut rank: u128) -> SubsampleIndex {
    let mut out = Vec::with_capacity(s);
    let mut x = 0usize;
    for i in 0..s {
        loop {
            let remaining = (s - i - 1) as u64;
            let block = binomial_u128((n - x - 1) as u64, remaining).expect("rank fits in u128");
            if rank < block {
                out.push(x);
                x += 1;
                break;
            }
            rank -= block;
            x += 1;
        }
    }
    SubsampleIndex::from_sorted_unchecked(out)
}

/// A drawn design: subsamples in canonical (lexicographic) order plus the realized count.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    pub subsamples: Vec<SubsampleIndex>,
    pub realized_n: u64,
    pub target_n: u64,
    pub scheme: Scheme,
    pub total: Count,
}

impl Design {
    /// Writes one JSON object per line: `{"ordinal", "indices", "omega_seed"}`.
    pub fn dump_jsonl<W: Write>(&self, master_seed: u64, mut out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            ordinal: u64,
            indices: &'a [usize],
            omega_seed: OmegaSeed,
        }
        for (ord, sub) in self.subsamples.iter().enumerate() {
            let line = Line { ordinal: ord as u64, indices: sub.indices(), omega_seed: derive_omega(master_seed, ord as u64) };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

// Key under the master seed reserved for design draws; kernel omegas use plain ordinals.
const DESIGN_STREAM: u64 = 0xD351_6E00_0000_0001;

/// Draws an incomplete design.
///
/// Bernoulli: `N_hat ~ Binomial(C(n,s), N / C(n,s))` followed by `N_hat` distinct subsamples
/// chosen uniformly without replacement. FixedN: exactly `N` distinct subsamples.
/// Complete: the full enumeration (subject to `cap`).
pub fn draw_incomplete_design(n: usize, s: usize, n_target: u64, scheme: Scheme, seed: u64, cap: u128) -> Result<Design> {
    check_sizes(n, s)?;
    let total = Count::of_binomial(n as u64, s as u64);
    if scheme == Scheme::Complete {
        let subsamples: Vec<_> = enumerate_subsamples(n, s, cap)?.collect();
        let realized = subsamples.len() as u64;
        return Ok(Design { subsamples, realized_n: realized, target_n: realized, scheme, total });
    }
    check_budget(n, s, n_target)?;
    let mut rng = SeedPath::new(seed).child(DESIGN_STREAM).rng();

    let realized = match scheme {
        Scheme::FixedN => n_target,
        Scheme::Bernoulli => draw_bernoulli_count(total, n_target, &mut rng)?,
        Scheme::Complete => unreachable!(),
    };

    let subsamples = match total {
        Count::Exact(c) if c <= u64::MAX as u128 => {
            let mut ranks = floyd_ranks(c as u64, realized, &mut rng);
            ranks.sort_unstable();
            ranks.into_iter().map(|r| unrank_combination(n, s, r as u128)).collect()
        }
        _ => draw_distinct_by_rejection(n, s, realized, &mut rng),
    };
    Ok(Design { subsamples, realized_n: realized, target_n: n_target, scheme, total })
}

fn draw_bernoulli_count<R: Rng>(total: Count, n_target: u64, rng: &mut R) -> Result<u64> {
    match total {
        Count::Exact(c) if c <= u64::MAX as u128 => {
            let c = c as u64;
            if n_target == c {
                return Ok(c);
            }
            let p = n_target as f64 / c as f64;
            let binom = Binomial::new(c, p).map_err(|e| Error::invalid(format!("binomial: {e}")))?;
            Ok(binom.sample(rng))
        }
        // Binomial(C, N/C) with C beyond 64 bits is Poisson(N) to within O(N/C).
        _ => {
            let pois = Poisson::new(n_target as f64).map_err(|e| Error::invalid(format!("poisson: {e}")))?;
            Ok(pois.sample(rng) as u64)
        }
    }
}

/// Floyd's algorithm: `k` distinct values uniform over `0..total`.
fn floyd_ranks<R: Rng>(total: u64, k: u64, rng: &mut R) -> Vec<u64> {
    if k == total {
        return (0..total).collect();
    }
    let mut chosen: HashSet<u64> = HashSet::with_capacity(k as usize);
    let mut out = Vec::with_capacity(k as usize);
    for j in total - k..total {
        let t = rng.random_range(0..=j);
        let pick = if chosen.contains(&t) { j } else { t };
        chosen.insert(pick);
        out.push(pick);
    }
    out
}

fn random_subset<R: Rng>(n: usize, s: usize, rng: &mut R) -> Vec<usize> {
    let mut picked: Vec<usize> = Vec::with_capacity(s);
    for j in n - s..n {
        let t = rng.random_range(0..=j);
        if picked.contains(&t) {
            picked.push(j);
        } else {
            picked.push(t);
        }
    }
    picked.sort_unstable();
    picked
}

/// Uniform subsamples with rejection of duplicates; used when C(n,s) exceeds 64 bits.
fn draw_distinct_by_rejection<R: Rng>(n: usize, s: usize, k: u64, rng: &mut R) -> Vec<SubsampleIndex> {
    let mut seen: HashSet<Vec<usize>> = HashSet::with_capacity(k as usize);
    let mut out = Vec::with_capacity(k as usize);
    while (out.len() as u64) < k {
        let sub = random_subset(n, s, rng);
        if seen.insert(sub.clone()) {
            out.push(sub);
        }
    }
    out.sort_unstable();
    out.into_iter().map(SubsampleIndex::from_sorted_unchecked).collect()
}
