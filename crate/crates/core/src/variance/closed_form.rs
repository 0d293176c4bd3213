//! Closed-form variance ratios, the kNN limit `c(k)` and the linear-smoother bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{ln_binomial, NeumaierSum};

pub const DEFAULT_S_APPROX: usize = 2000;

/// Kernels whose ratio `zeta_s / (s zeta_1)` is known in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormExample {
    /// Sample mean.
    Mean,
    /// Pairwise-difference variance kernel.
    Variance,
    /// OLS prediction.
    Ols,
    /// 1NN at `x = 0` with `X ~ U[0,1]`, `Y = 1 - X + eps`.
    OneNn,
    /// Average of `k` of the `s` responses chosen at random.
    RandomK,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormParams {
    pub s: usize,
    #[serde(default)]
    pub k: usize,
    /// Noise / response variance.
    #[serde(default)]
    pub sigma2: f64,
    /// Fourth central moment of the response.
    #[serde(default)]
    pub mu4: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosedFormRatio {
    /// Exact value at the given `s`.
    Exact { value: f64 },
    /// Only the `s -> infinity` limit is known.
    Limit { value: f64 },
}

impl ClosedFormRatio {
    pub fn value(self) -> f64 {
        match self {
            ClosedFormRatio::Exact { value } | ClosedFormRatio::Limit { value } => value,
        }
    }
}

/// `(zeta_1, zeta_s)` for 1NN at the origin with `X ~ U[0,1]`, `Y = 1 - X + eps`.
pub fn one_nn_zetas(s: usize, sigma2: f64) -> (f64, f64) {
    let s = s as f64;
    let zeta_s = sigma2 + s / ((s + 2.0) * (s + 1.0) * (s + 1.0));
    let zeta1 = 1.0 / ((2.0 * s + 1.0) * (s + 1.0) * (s + 1.0)) + sigma2 / (2.0 * s - 1.0);
    (zeta1, zeta_s)
}

pub fn closed_form_ratio(example: ClosedFormExample, params: ClosedFormParams) -> Result<ClosedFormRatio> {
    let ClosedFormParams { s, k, sigma2, mu4 } = params;
    if s == 0 {
        return Err(Error::invalid("s must be at least 1"));
    }
    match example {
        ClosedFormExample::Mean => Ok(ClosedFormRatio::Exact { value: 1.0 }),
        ClosedFormExample::Ols => Ok(ClosedFormRatio::Limit { value: 1.0 }),
        ClosedFormExample::Variance => {
            if s < 2 {
                return Err(Error::invalid("variance kernel needs s >= 2"));
            }
            let s4 = sigma2 * sigma2;
            if !(sigma2 > 0.0) || !(mu4 > s4) {
                return Err(Error::invalid("need sigma2 > 0 and mu4 > sigma2^2"));
            }
            Ok(ClosedFormRatio::Exact { value: 1.0 + 2.0 / (s as f64 - 1.0) * s4 / (mu4 - s4) })
        }
        ClosedFormExample::OneNn => {
            if !(sigma2 >= 0.0) {
                return Err(Error::invalid("sigma2 must be >= 0"));
            }
            let (z1, zs) = one_nn_zetas(s, sigma2);
            Ok(ClosedFormRatio::Exact { value: zs / (s as f64 * z1) })
        }
        ClosedFormExample::RandomK => {
            if k == 0 || k > s {
                return Err(Error::invalid("need 1 <= k <= s"));
            }
            Ok(ClosedFormRatio::Exact { value: s as f64 / k as f64 })
        }
    }
}

/// `V(k, s) = sum_{i,j < k} C(s-1,i) C(s-1,j) / C(2s-2, i+j)`, in log space.
pub fn v_of_k(k: usize, s: usize) -> f64 {
    let m = (s - 1) as f64;
    let mut acc = NeumaierSum::new();
    for i in 0..k {
        for j in 0..k {
            let ln = ln_binomial(m, i as f64) + ln_binomial(m, j as f64) - ln_binomial(2.0 * m, (i + j) as f64);
            acc.add(ln.exp());
        }
    }
    acc.value()
}

/// `2k / V(k, s_approx)`, the finite-`s` approximation of `c(k)`.
pub fn c_of_k(k: usize, s_approx: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if s_approx < 2 * k {
        return Err(Error::invalid(format!("s_approx = {s_approx} must be at least 2k = {}", 2 * k)));
    }
    if k == 1 {
        return Ok(2.0);
    }
    Ok(2.0 * k as f64 / v_of_k(k, s_approx))
}

/// `c(k)` with the approximation size doubled until successive values differ by less than
/// `tol`. Returns the value and the final `s_approx`.
pub fn c_of_k_limit(k: usize, s_start: usize, tol: f64) -> Result<(f64, usize)> {
    let mut s = s_start.max(2 * k);
    let mut prev = c_of_k(k, s)?;
    for _ in 0..20 {
        let next = c_of_k(k, 2 * s)?;
        s *= 2;
        if (next - prev).abs() < tol {
            return Ok((next, s));
        }
        prev = next;
    }
    Ok((prev, s))
}

/// Worst-case ratio bound for a linear smoother: `s (sigma2 + f_sup^2 / 4) / sigma2`.
pub fn linear_smoother_bound(sigma2: f64, f_sup: f64, s: usize) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::invalid("sigma2 must be positive"));
    }
    Ok(s as f64 * (sigma2 + 0.25 * f_sup * f_sup) / sigma2)
}
