//! Normal confidence intervals and Berry-Esseen bound evaluators.
//!
//! The convolution and sub-Gaussian bounds hold up to an unspecified universal constant
//! `C`, which callers must pass explicitly. Reports use `C = 1` by convention.

mod bounds;
mod moments;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::normal_quantile;

pub use bounds::{be_bound_complete, be_bound_convolution, be_bound_incomplete_linear, be_bound_subgaussian, BoundReport, BoundTerm};
pub use moments::{estimate_g_moments, estimate_h_moments, h_moments_from_values, GMoments, HMoments};

/// Moment bundle feeding the bound evaluators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeInputs {
    pub n: u64,
    pub s: u64,
    #[serde(rename = "N", default)]
    pub n_sub: u64,
    pub zeta1: f64,
    pub zeta_s: f64,
    #[serde(default)]
    pub eg2: f64,
    #[serde(default)]
    pub eg3: f64,
    #[serde(default)]
    pub eh2: f64,
    #[serde(default)]
    pub eh3: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kur1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kur2: Option<f64>,
    /// Selection probability `N / C(n, s)`.
    #[serde(default)]
    pub p: f64,
}

const NORMAL_ABS3: f64 = 1.595_769_121_605_730_7;

impl BeInputs {
    /// Analytic inputs for the mean kernel with Gaussian responses of variance `sigma2`.
    pub fn mean_kernel_gaussian(n: u64, s: u64, n_sub: u64, sigma2: f64, p: f64) -> Self {
        let sf = s as f64;
        let eh2 = sigma2 / sf;
        BeInputs {
            n,
            s,
            n_sub,
            zeta1: sigma2 / (sf * sf),
            zeta_s: eh2,
            eg2: sigma2 / (sf * sf),
            eg3: NORMAL_ABS3 * sigma2.powf(1.5) / (sf * sf * sf),
            eh2,
            eh3: NORMAL_ABS3 * eh2.powf(1.5),
            kur1: Some(3.0),
            kur2: Some(15.0 * std::f64::consts::PI / 8.0),
            p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.s == 0 {
            return Err(Error::invalid("n and s must be at least 1"));
        }
        if !(self.zeta1 > 0.0) || !self.zeta1.is_finite() {
            return Err(Error::invalid("zeta1 must be positive"));
        }
        let nonneg = [self.zeta_s, self.eg2, self.eg3, self.eh2, self.eh3];
        if nonneg.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid("moments must be finite and nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid("p must lie in [0, 1]"));
        }
        Ok(())
    }

    /// `zeta_s / (s zeta1)`.
    pub fn ratio(&self) -> f64 {
        self.zeta_s / (self.s as f64 * self.zeta1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub half_width: f64,
    pub level: f64,
    /// `s^2 zeta1 / n + zeta_s / N`.
    pub variance_used: f64,
}

impl ConfidenceInterval {
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn covers(&self, theta: f64) -> bool {
        self.lower() <= theta && theta <= self.upper()
    }
}

/// Variance of the normal limit: `s^2 zeta1 / n + zeta_s / N`.
pub fn limit_variance(zeta1: f64, zeta_s: f64, n: u64, s: u64, n_sub: u64) -> f64 {
    let s = s as f64;
    s * s * zeta1 / n as f64 + zeta_s / n_sub as f64
}

/// `theta_hat +- z_{(1+level)/2} sqrt(s^2 zeta1 / n + zeta_s / N)`.
pub fn build_ci(theta_hat: f64, zeta1: f64, zeta_s: f64, n: u64, s: u64, n_sub: u64, level: f64) -> Result<ConfidenceInterval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level must lie strictly between 0 and 1"));
    }
    if n == 0 || s == 0 || n_sub == 0 {
        return Err(Error::invalid("n, s and N must be at least 1"));
    }
    if !(zeta1 >= 0.0) || !(zeta_s >= 0.0) {
        return Err(Error::invalid("zeta components must be nonnegative"));
    }
    let variance = limit_variance(zeta1, zeta_s, n, s, n_sub);
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::invalid("interval variance must be positive"));
    }
    let z = normal_quantile(0.5 + level / 2.0);
    Ok(ConfidenceInterval { center: theta_hat, half_width: z * variance.sqrt(), level, variance_used: variance })
}
