//! Variance components, the exact H-decomposition and variance-ratio diagnostics.

mod closed_form;
mod hdecomp;
mod zeta;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::learners::KernelSpec;
use crate::simlab::generators::GeneratorSpec;

pub use closed_form::{
    c_of_k, c_of_k_limit, closed_form_ratio, linear_smoother_bound, one_nn_zetas, v_of_k, ClosedFormExample,
    ClosedFormParams, ClosedFormRatio, DEFAULT_S_APPROX,
};
pub use hdecomp::{discrete_law, h_decomposition_exact, u_moments_by_enumeration, u_variance_from_components, HDecomposition};
pub use zeta::{
    estimate_zeta1_omega, estimate_zeta_c, estimate_zeta_s, estimate_zeta_s_omega, plugin_zeta_s, ZetaEstimate,
};
pub(crate) use zeta::{between_component, grouped_draws, independent_draws};

/// Monte-Carlo sizes for [`estimate_components`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct McPlan {
    /// Groups sharing `Z_1` (or all data, for `zeta_{s,omega}`).
    pub m_outer: usize,
    /// Independent completions per group.
    pub m_inner: usize,
    /// Independent draws for `zeta_s`.
    pub m_s: usize,
}

impl Default for McPlan {
    fn default() -> Self {
        McPlan { m_outer: 2000, m_inner: 32, m_s: 20_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VarianceComponents {
    pub s: usize,
    pub zeta1_omega: ZetaEstimate,
    pub zeta_s_omega: ZetaEstimate,
    pub zeta_s: ZetaEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioEstimate {
    pub value: f64,
    pub se: f64,
}

const ZETA1_KEY: u64 = 1;
const ZETA_S_OMEGA_KEY: u64 = 2;
const ZETA_S_KEY: u64 = 3;

/// Estimates all three components on independent streams under `seed`.
///
/// For deterministic kernels `zeta_{s,omega}` equals `zeta_s` and is not re-estimated.
pub fn estimate_components(kernel: &KernelSpec, generator: &GeneratorSpec, s: usize, plan: McPlan, seed: u64) -> Result<VarianceComponents> {
    let path = crate::rng::SeedPath::new(seed);
    let zeta1 = estimate_zeta1_omega(kernel, generator, s, plan.m_outer, plan.m_inner, path.child(ZETA1_KEY).seed())?;
    let zeta_s = estimate_zeta_s(kernel, generator, s, plan.m_s, path.child(ZETA_S_KEY).seed())?;
    let zeta_s_omega = if kernel.uses_omega() {
        estimate_zeta_s_omega(kernel, generator, s, plan.m_outer, plan.m_inner, path.child(ZETA_S_OMEGA_KEY).seed(), false)?
    } else {
        zeta_s
    };
    Ok(VarianceComponents { s, zeta1_omega: zeta1, zeta_s_omega, zeta_s })
}

impl VarianceComponents {
    /// Components with known values and zero standard errors.
    pub fn exact(s: usize, zeta1: f64, zeta_s_omega: f64, zeta_s: f64) -> Self {
        VarianceComponents {
            s,
            zeta1_omega: ZetaEstimate::exact(zeta1),
            zeta_s_omega: ZetaEstimate::exact(zeta_s_omega),
            zeta_s: ZetaEstimate::exact(zeta_s),
        }
    }

    /// Checks `s zeta_1 <= zeta_{s,omega} <= zeta_s` up to `nsigma` combined standard errors.
    pub fn chain_holds(&self, nsigma: f64) -> bool {
        let s = self.s as f64;
        let (a, sa) = (s * self.zeta1_omega.value, s * self.zeta1_omega.se);
        let (b, sb) = (self.zeta_s_omega.value, self.zeta_s_omega.se);
        let (c, sc) = (self.zeta_s.value, self.zeta_s.se);
        let le = |x: f64, sx: f64, y: f64, sy: f64| x <= y + nsigma * (sx * sx + sy * sy).sqrt();
        le(a, sa, c, sc) && le(b, sb, c, sc)
    }
}

/// `zeta_s / (s zeta_{1,omega})` with a delta-method standard error.
pub fn variance_ratio(components: &VarianceComponents, s: usize) -> Result<RatioEstimate> {
    let z1 = components.zeta1_omega;
    let zs = components.zeta_s;
    if !(z1.value > 0.0) || z1.value <= z1.se {
        return Err(Error::DegenerateProjection { zeta1: z1.value, se: z1.se });
    }
    let value = zs.value / (s as f64 * z1.value);
    let rel = |e: ZetaEstimate| if e.value != 0.0 { e.se / e.value } else { 0.0 };
    let se = value.abs() * (rel(z1).powi(2) + rel(zs).powi(2)).sqrt();
    Ok(RatioEstimate { value, se })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_of_exact_components() {
        let vc = VarianceComponents::exact(10, 0.01, 0.1, 0.1);
        let r = variance_ratio(&vc, 10).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.se, 0.0);
        assert!(vc.chain_holds(0.0));
    }

    #[test]
    fn degenerate_projection() {
        let vc = VarianceComponents::exact(10, 0.0, 1.0, 1.0);
        assert!(matches!(variance_ratio(&vc, 10), Err(Error::DegenerateProjection { .. })));
    }

    #[test]
    fn mean_kernel_ratio_is_one() {
        let g = GeneratorSpec::LinearGaussian { beta: vec![0.0], sigma: 1.0, covariates: Default::default() };
        let plan = McPlan { m_outer: 3000, m_inner: 16, m_s: 20_000 };
        let vc = estimate_components(&KernelSpec::mean(), &g, 8, plan, 1).unwrap();
        let r = variance_ratio(&vc, 8).unwrap();
        assert!((r.value - 1.0).abs() < 3.0 * r.se, "{r:?}");
        assert!(vc.chain_holds(3.0));
    }
}
