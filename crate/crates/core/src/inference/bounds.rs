//! Berry-Esseen bound evaluators with per-term breakdowns.

use serde::Serialize;

use super::BeInputs;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundTerm {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub form: &'static str,
    pub total: f64,
    pub terms: Vec<BoundTerm>,
    /// Set when `zeta_s < s zeta1` (Monte-Carlo noise) and the bracket was clamped to 0.
    pub clamped: bool,
    /// Universal constant the bound was scaled by, when the form has one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
}

impl BoundReport {
    fn new(form: &'static str, terms: Vec<BoundTerm>, clamped: bool, constant: Option<f64>) -> Self {
        let sum: f64 = terms.iter().map(|t| t.value).sum();
        BoundReport { form, total: constant.unwrap_or(1.0) * sum, terms, clamped, constant }
    }
}

/// `sqrt(max(0, (s/n)(ratio - 1)))` and whether clamping happened.
fn nonlinearity_term(inputs: &BeInputs) -> (f64, bool) {
    let bracket = inputs.s as f64 / inputs.n as f64 * (inputs.ratio() - 1.0);
    if bracket < 0.0 {
        (0.0, true)
    } else {
        (bracket.sqrt(), false)
    }
}

fn complete_terms(inputs: &BeInputs) -> Result<(Vec<BoundTerm>, bool)> {
    inputs.validate()?;
    let n = inputs.n as f64;
    let lyapunov = 6.1 * inputs.eg3 / (n.sqrt() * inputs.zeta1.powf(1.5));
    let (nl, clamped) = nonlinearity_term(inputs);
    Ok((
        vec![
            BoundTerm { name: "lyapunov", value: lyapunov },
            BoundTerm { name: "nonlinearity", value: (1.0 + 2f64.sqrt()) * nl },
        ],
        clamped,
    ))
}

/// Complete generalized U-statistic:
/// `6.1 E|g|^3 / (sqrt(n) zeta1^{3/2}) + (1 + sqrt 2) sqrt((s/n)(zeta_s/(s zeta1) - 1))`.
pub fn be_bound_complete(inputs: &BeInputs) -> Result<BoundReport> {
    let (terms, clamped) = complete_terms(inputs)?;
    Ok(BoundReport::new("complete", terms, clamped, None))
}

/// Incomplete generalized U-statistic, normalized by the linear part only: the complete
/// bound plus `(1 + sqrt(1/s)) sqrt((n/N)(1 - p) zeta_s/(s zeta1))`.
pub fn be_bound_incomplete_linear(inputs: &BeInputs) -> Result<BoundReport> {
    let (mut terms, clamped) = complete_terms(inputs)?;
    if inputs.n_sub == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    let s = inputs.s as f64;
    let sampling = (1.0 + (1.0 / s).sqrt()) * (inputs.n as f64 / inputs.n_sub as f64 * (1.0 - inputs.p) * inputs.ratio()).sqrt();
    terms.push(BoundTerm { name: "sampling", value: sampling });
    Ok(BoundReport::new("incomplete", terms, clamped, None))
}

fn convolution_terms(inputs: &BeInputs, c: f64, eta: f64) -> Result<(Vec<BoundTerm>, bool)> {
    inputs.validate()?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid("the constant C must be positive"));
    }
    if !(inputs.eg2 > 0.0) || !(inputs.eh2 > 0.0) {
        return Err(Error::invalid("E|g|^2 and E|h|^2 must be positive"));
    }
    if inputs.n_sub == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    let n = inputs.n as f64;
    let big_n = inputs.n_sub as f64;
    let (nl, clamped) = nonlinearity_term(inputs);
    Ok((
        vec![
            BoundTerm { name: "projection", value: inputs.eg3 / (n.sqrt() * inputs.eg2.powf(1.5)) },
            BoundTerm { name: "sampling", value: inputs.eh3 / (big_n.sqrt() * inputs.eh2.powf(1.5)) },
            BoundTerm { name: "nonlinearity", value: nl },
            BoundTerm { name: "remainder", value: (inputs.s as f64 / n).powf(eta) },
        ],
        clamped,
    ))
}

/// Normalized by the full two-component variance; valid up to the universal constant `c`
/// when the kurtosis ratios are bounded.
pub fn be_bound_convolution(inputs: &BeInputs, c: f64) -> Result<BoundReport> {
    let (terms, clamped) = convolution_terms(inputs, c, 1.0 / 3.0)?;
    Ok(BoundReport::new("convolution", terms, clamped, Some(c)))
}

/// As [`be_bound_convolution`] with remainder `(s/n)^eta`, `0 < eta < 1/2`, for kernels
/// that are sub-Gaussian after standardization.
pub fn be_bound_subgaussian(inputs: &BeInputs, c: f64, eta: f64) -> Result<BoundReport> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::invalid("eta must lie strictly between 0 and 1/2"));
    }
    let (terms, clamped) = convolution_terms(inputs, c, eta)?;
    Ok(BoundReport::new("subgaussian", terms, clamped, Some(c)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_inputs(n: u64) -> BeInputs {
        BeInputs::mean_kernel_gaussian(n, 10, 1000, 1.0, 0.0)
    }

    #[test]
    fn complete_mean_kernel() {
        let b = be_bound_complete(&mean_inputs(10_000)).unwrap();
        assert!((b.total - 0.097_341_916).abs() < 1e-6, "{}", b.total);
        assert!(b.terms[1].value.abs() < 1e-12);
    }

    #[test]
    fn incomplete_reduces_at_full_selection() {
        let mut b = mean_inputs(400);
        b.p = 1.0;
        let c = be_bound_complete(&b).unwrap();
        let i = be_bound_incomplete_linear(&b).unwrap();
        assert_eq!(c.total, i.total);
    }

    #[test]
    fn incomplete_sampling_term() {
        let b = BeInputs { n_sub: 1000, p: 0.0, ..BeInputs::mean_kernel_gaussian(1000, 100, 1000, 1.0, 0.0) };
        let r = be_bound_incomplete_linear(&b).unwrap();
        assert!((r.terms[2].value - 1.1).abs() < 1e-12);
        let more = be_bound_incomplete_linear(&BeInputs { n_sub: 4000, ..b }).unwrap();
        assert!(more.terms[2].value < r.terms[2].value);
    }

    #[test]
    fn monotone_in_n() {
        let mut prev = f64::INFINITY;
        for n in [100, 200, 400, 800] {
            let mut b = mean_inputs(n);
            b.zeta_s *= 1.5; // nonlinear kernel: both terms active
            let t = be_bound_complete(&b).unwrap().total;
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn clamping_flag() {
        let mut b = mean_inputs(100);
        b.zeta_s *= 0.9;
        let r = be_bound_complete(&b).unwrap();
        assert!(r.clamped);
        assert_eq!(r.terms[1].value, 0.0);
    }

    #[test]
    fn convolution_scaling_and_exponent() {
        let b = BeInputs::mean_kernel_gaussian(10_000, 10, 1000, 1.0, 0.0);
        let one = be_bound_convolution(&b, 1.0).unwrap();
        let two = be_bound_convolution(&b, 2.0).unwrap();
        assert!((two.total - 2.0 * one.total).abs() < 1e-15);
        let sg = be_bound_subgaussian(&b, 1.0, 1.0 / 3.0).unwrap();
        assert_eq!(sg.terms[3].value, one.terms[3].value);
        let b2 = BeInputs { n: 1000, ..b };
        let sg = be_bound_subgaussian(&b2, 1.0, 0.49).unwrap();
        assert!((sg.terms[3].value - 10f64.powf(-0.98)).abs() < 1e-12);
        let lo = be_bound_subgaussian(&b2, 1.0, 0.2).unwrap();
        assert!(sg.terms[3].value < lo.terms[3].value);
        assert!(be_bound_subgaussian(&b, 1.0, 0.5).is_err());
        assert!(be_bound_convolution(&b, 0.0).is_err());
    }

    #[test]
    fn rejects_zero_projection() {
        let b = BeInputs { zeta1: 0.0, ..mean_inputs(100) };
        assert!(be_bound_complete(&b).is_err());
    }
}
