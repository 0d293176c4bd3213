//! Numerical building blocks: compensated summation, the normal distribution,
//! binomial coefficients and delete-one jackknife standard errors.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Neumaier's compensated summation. The result depends only on the order of `add`
/// calls, which callers keep fixed (by ordinal) for cross-thread determinism.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = NeumaierSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

pub fn mean(values: &[f64]) -> f64 {
    compensated_sum(values.iter().copied()) / values.len() as f64
}

/// Unbiased sample variance (denominator `len - 1`).
pub fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    compensated_sum(values.iter().map(|v| (v - m) * (v - m))) / (values.len() as f64 - 1.0)
}

/// Standard normal CDF, computed from `erfc` (relative accuracy near machine precision).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal quantile by Wichura's AS 241 (PPND16) rational approximation,
/// relative accuracy about 1e-16 on (0, 1).
#[allow(clippy::inconsistent_digit_grouping, clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal_quantile: p = {p} outside (0, 1)");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((2509.080_928_730_122_7 * r + 33430.575_583_588_128) * r
            + 67265.770_927_008_7)
            * r
            + 45921.953_931_549_87)
            * r
            + 13731.693_765_509_461)
            * r
            + 1971.590_950_306_551_3)
            * r
            + 133.141_667_891_784_38)
            * r
            + 3.387_132_872_796_366_5;
        let den = ((((((5226.495_278_852_545 * r + 28729.085_735_721_943) * r
            + 39307.895_800_092_71)
            * r
            + 21213.794_301_586_597)
            * r
            + 5394.196_021_424_751)
            * r
            + 687.187_007_492_057_9)
            * r
            + 42.313_330_701_600_91)
            * r
            + 1.0;
        return q * num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 0.015_198_666_563_616_457)
            * r
            + 0.148_103_976_427_480_08)
            * r
            + 0.689_767_334_985_1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 0.001_242_660_947_388_078_4)
            * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_87)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 0.014_875_361_290_850_615)
            * r
            + 0.136_929_880_922_735_8)
            * r
            + 0.599_832_206_555_888)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// `C(n, k)` in 128-bit arithmetic, `None` on overflow.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at each step.
        let num = (n - i) as u128;
        let g = gcd(acc, (i + 1) as u128);
        let a = acc / g;
        let d = (i + 1) as u128 / g;
        acc = a.checked_mul(num / d)?;
        // d divides num because the running product is an integer.
        debug_assert_eq!(num % d, 0);
    }
    Some(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Binomial coefficient size with saturation: either an exact count or "huge".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Count {
    Exact(u128),
    Huge,
}

impl Count {
    pub fn of_binomial(n: u64, k: u64) -> Self {
        binomial_u128(n, k).map_or(Count::Huge, Count::Exact)
    }

    pub fn exact(self) -> Option<u128> {
        match self {
            Count::Exact(v) => Some(v),
            Count::Huge => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Count::Exact(v) => v as f64,
            Count::Huge => f64::INFINITY,
        }
    }
}

pub fn ln_binomial(n: f64, k: f64) -> f64 {
    libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0)
}

/// `C(n, k)` as a float; exact for small arguments, log-gamma otherwise.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    match binomial_u128(n, k) {
        Some(v) if v < (1u128 << 53) => v as f64,
        _ => ln_binomial(n as f64, k as f64).exp(),
    }
}

/// Delete-one jackknife for a smooth function of feature means.
///
/// `features[i]` is the feature vector of replicate `i`; `stat` maps a mean vector and the
/// number of replicates it was computed from to the statistic. Returns the full-sample
/// statistic and its jackknife standard error. Runs in O(M * dim).
pub fn jackknife<F>(features: &[Vec<f64>], stat: F) -> (f64, f64)
where
    F: Fn(&[f64], usize) -> f64,
{
    let m = features.len();
    assert!(m >= 2, "jackknife needs at least two replicates");
    let dim = features[0].len();
    let mut totals = vec![NeumaierSum::new(); dim];
    for f in features {
        for (t, v) in totals.iter_mut().zip(f) {
            t.add(*v);
        }
    }
    let totals: Vec<f64> = totals.iter().map(NeumaierSum::value).collect();
    let full_mean: Vec<f64> = totals.iter().map(|t| t / m as f64).collect();
    let full = stat(&full_mean, m);

    let mut loo = vec![0.0; dim];
    let mut leave_out = Vec::with_capacity(m);
    for f in features {
        for ((slot, t), v) in loo.iter_mut().zip(&totals).zip(f) {
            *slot = (t - v) / (m - 1) as f64;
        }
        leave_out.push(stat(&loo, m - 1));
    }
    let bar = mean(&leave_out);
    let ss = compensated_sum(leave_out.iter().map(|v| (v - bar) * (v - bar)));
    let se = ((m - 1) as f64 / m as f64 * ss).sqrt();
    (full, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let vals = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(vals), 2.0);
    }

    #[test]
    fn quantile_matches_reference_values() {
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((normal_quantile(0.5)).abs() < 1e-15);
        assert!((normal_quantile(1e-10) + 6.361_340_902_404_056).abs() < 1e-9);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let x = normal_quantile(p);
            assert!((normal_cdf(x) - p).abs() < 1e-13, "p = {p}");
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_u128(4, 2), Some(6));
        assert_eq!(binomial_u128(10, 3), Some(120));
        assert_eq!(binomial_u128(5, 6), Some(0));
        assert_eq!(binomial_u128(64, 32), Some(1_832_624_140_942_590_534));
        assert_eq!(binomial_u128(2000, 50), None);
        assert!((binomial_f64(200, 100).ln() - ln_binomial(200.0, 100.0)).abs() < 1e-9);
    }

    #[test]
    fn jackknife_of_mean_equals_classical_se() {
        let xs: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64).collect();
        let feats: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let (est, se) = jackknife(&feats, |m, _| m[0]);
        let classical = (sample_variance(&xs) / xs.len() as f64).sqrt();
        assert!((est - mean(&xs)).abs() < 1e-12);
        assert!((se - classical).abs() < 1e-10);
    }
}
