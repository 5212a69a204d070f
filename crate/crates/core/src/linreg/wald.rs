use super::chi2::chi2_sf;
use super::ols::ModelFit;
use crate::error::RegressionError;

/// Wald test of the joint hypothesis that a set of coefficients are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WaldResult {
    pub restriction_labels: Vec<String>,
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
}

/// Test `beta[restricted] = 0` with the fit's HAC covariance against the
/// asymptotic chi-square reference.
///
/// Panics if `restricted` is empty.
pub fn wald_test<S: AsRef<str>>(fit: &ModelFit, restricted: &[S]) -> Result<WaldResult, RegressionError> {
    assert!(!restricted.is_empty(), "wald_test needs at least one restriction");
    let cov = fit.hac_cov.as_ref().ok_or(RegressionError::NoCovariance)?;
    let idx = restricted
        .iter()
        .map(|name| {
            fit.index_of(name.as_ref())
                .ok_or_else(|| RegressionError::UnknownCoefficient(name.as_ref().to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let labels: Vec<String> = restricted.iter().map(|s| s.as_ref().to_string()).collect();

    let q = idx.len();
    let b = nalgebra::DVector::from_iterator(q, idx.iter().map(|&i| fit.beta[i]));
    let v = nalgebra::DMatrix::from_fn(q, q, |r, c| cov[(idx[r], idx[c])]);
    let chol = v
        .cholesky()
        .ok_or_else(|| RegressionError::Degenerate(labels.clone()))?;
    let diag_max = (0..q).map(|i| cov[(idx[i], idx[i])]).fold(0.0_f64, f64::max);
    let l = chol.l();
    if (0..q).any(|i| l[(i, i)].powi(2) <= 1e-14 * diag_max) {
        return Err(RegressionError::Degenerate(labels));
    }
    let statistic = b.dot(&chol.solve(&b)).max(0.0);
    let df = q as u32;
    let p_value = chi2_sf(statistic, df).expect("nonnegative statistic");
    Ok(WaldResult {
        restriction_labels: labels,
        statistic,
        df,
        p_value,
    })
}
