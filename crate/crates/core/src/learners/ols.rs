use nalgebra::{DMatrix, DVector};

use crate::data::Sample;
use crate::error::{Error, Result};

/// Largest accepted condition number of `X^T X`.
pub const OLS_CONDITION_THRESHOLD: f64 = 1e12;

/// Least-squares prediction `target^T beta_hat` (no implicit intercept).
pub fn ols_kernel(rows: &[&Sample], target: &[f64]) -> Result<f64> {
    let s = rows.len();
    let p = target.len();
    if s < p {
        return Err(Error::SingularDesign { condition: f64::INFINITY, threshold: OLS_CONDITION_THRESHOLD });
    }
    let x = DMatrix::from_fn(s, p, |i, j| rows[i].x[j]);
    let y = DVector::from_iterator(s, rows.iter().map(|r| r.y));
    let svd = x.svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    let condition = if min > 0.0 { (max / min).powi(2) } else { f64::INFINITY };
    if !(condition <= OLS_CONDITION_THRESHOLD) {
        return Err(Error::SingularDesign { condition, threshold: OLS_CONDITION_THRESHOLD });
    }
    let beta = svd.solve(&y, 0.0).map_err(|e| Error::invalid(format!("least squares: {e}")))?;
    Ok(target.iter().zip(beta.iter()).map(|(t, b)| t * b).sum())
}
