//! Moment estimators for the bound inputs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::learners::KernelSpec;
use crate::rng::SeedPath;
use crate::simlab::generators::GeneratorSpec;
use crate::stats::{jackknife, mean};
use crate::variance::{between_component, grouped_draws, independent_draws};

const G_STREAM: u64 = 0x6E00_0000_0000_0001;
const H_STREAM: u64 = 0x6E00_0000_0000_0002;

/// Moments of the centered projection `g(z) = E[h(z, Z_2, ..., Z_s)] - theta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GMoments {
    /// Unbiased for `E g^2`.
    pub eg2: f64,
    pub eg2_se: f64,
    /// Plug-in `E|g|^3` from inner averages. Biased upward by inner-loop noise; the bias
    /// shrinks as `m_inner` grows.
    pub eg3: f64,
    pub eg3_se: f64,
    pub m_outer: usize,
    pub m_inner: usize,
}

/// Estimates `(E g^2, E|g|^3)`: each of `m_outer` draws of `Z_1` is paired with an average
/// over `m_inner` completions approximating `g(Z_1)`.
pub fn estimate_g_moments(
    kernel: &KernelSpec,
    generator: &GeneratorSpec,
    s: usize,
    m_outer: usize,
    m_inner: usize,
    seed: u64,
) -> Result<GMoments> {
    let groups = grouped_draws(kernel, generator, s, 1, m_outer, m_inner, SeedPath::new(seed).child(G_STREAM))?;
    let (eg2, eg2_se) = between_component(&groups.groups, m_inner);
    let means: Vec<f64> = groups.groups.iter().map(|g| g.mean).collect();
    let center = mean(&means);
    let features: Vec<Vec<f64>> = means.iter().map(|m| vec![(m - center).abs().powi(3)]).collect();
    let (eg3, eg3_se) = jackknife(&features, |f, _| f[0]);
    Ok(GMoments { eg2: eg2.max(0.0), eg2_se, eg3, eg3_se, m_outer, m_inner })
}

/// Central absolute moments of the kernel and the two kurtosis-type ratios
/// `kur1 = E|h|^4 / (E|h|^2)^2`, `kur2 = E|h|^6 / (E|h|^3)^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HMoments {
    pub eh2: f64,
    pub eh3: f64,
    pub eh4: f64,
    pub eh6: f64,
    pub kur1: f64,
    pub kur2: f64,
    pub eh2_se: f64,
    pub eh3_se: f64,
    pub kur1_se: f64,
    pub kur2_se: f64,
    pub m: usize,
}

/// Moments of `values` centered at their sample mean.
pub fn h_moments_from_values(values: &[f64]) -> Result<HMoments> {
    if values.len() < 4 {
        return Err(Error::invalid("need at least 4 values"));
    }
    let center = mean(values);
    let features: Vec<Vec<f64>> = values
        .iter()
        .map(|v| {
            let d = (v - center).abs();
            let d2 = d * d;
            vec![d2, d2 * d, d2 * d2, d2 * d2 * d2]
        })
        .collect();
    let (eh2, eh2_se) = jackknife(&features, |f, _| f[0]);
    if !(eh2 > 0.0) {
        return Err(Error::Degenerate("kernel values are constant; kurtosis ratios are undefined".into()));
    }
    let (eh3, eh3_se) = jackknife(&features, |f, _| f[1]);
    let (kur1, kur1_se) = jackknife(&features, |f, _| f[2] / (f[0] * f[0]));
    let (kur2, kur2_se) = jackknife(&features, |f, _| f[3] / (f[1] * f[1]));
    Ok(HMoments {
        eh2,
        eh3,
        eh4: mean(&features.iter().map(|f| f[2]).collect::<Vec<_>>()),
        eh6: mean(&features.iter().map(|f| f[3]).collect::<Vec<_>>()),
        kur1,
        kur2,
        eh2_se,
        eh3_se,
        kur1_se,
        kur2_se,
        m: values.len(),
    })
}

/// Estimates the kernel's central moments from `m` independent draws.
pub fn estimate_h_moments(kernel: &KernelSpec, generator: &GeneratorSpec, s: usize, m: usize, seed: u64) -> Result<HMoments> {
    if m < 4 {
        return Err(Error::invalid("m must be at least 4"));
    }
    let draws = independent_draws(kernel, generator, s, m, SeedPath::new(seed).child(H_STREAM))?;
    h_moments_from_values(&draws.values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal() -> GeneratorSpec {
        GeneratorSpec::LinearGaussian { beta: vec![0.0], sigma: 1.0, covariates: Default::default() }
    }

    #[test]
    fn mean_kernel_g_moments() {
        let s = 4;
        let g = estimate_g_moments(&KernelSpec::mean(), &normal(), s, 4000, 256, 5).unwrap();
        let eg2 = 1.0 / 16.0;
        let eg3 = 1.595_769_121_605_730_7 / 64.0;
        assert!((g.eg2 - eg2).abs() < 3.0 * g.eg2_se, "{g:?}");
        assert!((g.eg3 - eg3).abs() < 3.0 * g.eg3_se, "{g:?}");
    }

    #[test]
    fn constant_kernel_moments() {
        let g = estimate_g_moments(&KernelSpec::constant(1.0), &normal(), 3, 20, 4, 1).unwrap();
        assert_eq!((g.eg2, g.eg3), (0.0, 0.0));
        let err = estimate_h_moments(&KernelSpec::constant(1.0), &normal(), 3, 20, 1).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn balanced_signs_have_unit_kurtosis() {
        let vals: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let h = h_moments_from_values(&vals).unwrap();
        assert_eq!(h.kur1, 1.0);
        assert_eq!(h.kur2, 1.0);
    }

    #[test]
    fn normal_kurtosis() {
        let h = estimate_h_moments(&KernelSpec::mean(), &normal(), 5, 200_000, 9).unwrap();
        assert!((h.kur1 - 3.0).abs() < 3.0 * h.kur1_se, "{h:?}");
        let kur2 = 15.0 * std::f64::consts::PI / 8.0;
        assert!((h.kur2 - kur2).abs() < 3.0 * h.kur2_se, "{h:?}");
    }
}
