use nalgebra::{DMatrix, DVector};

use super::design::DesignMatrix;
use super::hac::{hac_cov_with_bread, Bandwidth};
use crate::error::RegressionError;
use crate::exec::Exec;

/// Relative tolerance on the diagonal of R below which a column is treated
/// as linearly dependent, scaled by the largest column norm.
const RANK_TOL: f64 = 1e-10;

/// Result of an ordinary least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFit {
    pub names: Vec<String>,
    pub beta: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    /// (X'X)^-1, recovered from the QR factor.
    pub xtx_inv: DMatrix<f64>,
    /// Newey-West covariance of `beta`, once [`ModelFit::with_hac`] has run.
    pub hac_cov: Option<DMatrix<f64>>,
    /// HAC lag truncation used for `hac_cov`.
    pub bandwidth: Option<usize>,
    pub r_squared: f64,
    /// Whether R² was computed against the centered total sum of squares,
    /// i.e. the constant lies in the column space of the design.
    pub centered: bool,
    pub ssr: f64,
    pub nobs: usize,
}

impl ModelFit {
    pub fn k(&self) -> usize {
        self.beta.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coef(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.beta[i])
    }

    /// HAC standard error of a coefficient.
    pub fn std_error(&self, name: &str) -> Option<f64> {
        let i = self.index_of(name)?;
        self.hac_cov.as_ref().map(|v| v[(i, i)].max(0.0).sqrt())
    }

    /// Classical homoskedastic covariance s² (X'X)^-1 with s² = SSR / (n - k).
    pub fn ols_cov(&self) -> DMatrix<f64> {
        let s2 = self.ssr / (self.nobs - self.k()) as f64;
        &self.xtx_inv * s2
    }

    /// Populate the HAC covariance for this fit's design.
    pub fn with_hac(
        mut self,
        design: &DesignMatrix,
        bandwidth: Bandwidth,
        exec: Exec,
    ) -> Result<Self, RegressionError> {
        let lags = bandwidth.resolve(self.nobs)?;
        let cov = hac_cov_with_bread(design, &self.residuals, &self.xtx_inv, lags, exec)?;
        self.hac_cov = Some(cov);
        self.bandwidth = Some(lags);
        Ok(self)
    }
}

/// QR factorization data shared by the fit and the HAC bread.
pub(crate) struct Factored {
    pub qr: nalgebra::linalg::QR<f64, nalgebra::Dyn, nalgebra::Dyn>,
    pub r: DMatrix<f64>,
}

pub(crate) fn factor(design: &DesignMatrix) -> Result<Factored, RegressionError> {
    let n = design.nobs();
    let k = design.ncols();
    if k == 0 || n <= k {
        return Err(RegressionError::InsufficientData { nobs: n, k });
    }
    let x = design.to_matrix();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(RegressionError::NonFinite("design"));
    }
    let max_norm = x
        .column_iter()
        .map(|c| c.norm())
        .fold(0.0_f64, f64::max);
    let qr = x.qr();
    let r = qr.r();
    for j in 0..k {
        if r[(j, j)].abs() <= RANK_TOL * max_norm {
            return Err(RegressionError::Singular(design.names()[j].clone()));
        }
    }
    Ok(Factored { qr, r })
}

pub(crate) fn r_inverse(r: &DMatrix<f64>) -> DMatrix<f64> {
    let k = r.ncols();
    r.solve_upper_triangular(&DMatrix::identity(k, k))
        .expect("R has a nonzero diagonal")
}

/// Least-squares fit of `y` on the columns of `design`.
pub fn ols_fit(design: &DesignMatrix, y: &[f64]) -> Result<ModelFit, RegressionError> {
    let n = design.nobs();
    let k = design.ncols();
    if y.len() != n {
        return Err(RegressionError::ResponseLength {
            expected: n,
            found: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(RegressionError::NonFinite("response"));
    }
    let Factored { qr, r } = factor(design)?;

    let mut qty = DVector::from_column_slice(y);
    qr.q_tr_mul(&mut qty);
    let head = qty.rows(0, k).into_owned();
    let beta = r
        .solve_upper_triangular(&head)
        .expect("R has a nonzero diagonal");

    let r_inv = r_inverse(&r);
    let xtx_inv = &r_inv * r_inv.transpose();

    let mut fitted = vec![0.0; n];
    for j in 0..k {
        let b = beta[j];
        for (f, x) in fitted.iter_mut().zip(design.column_at(j)) {
            *f += b * x;
        }
    }
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, f)| a - f).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();

    // The constant is in the column space iff its projection residual vanishes.
    let mut q_ones = DVector::from_element(n, 1.0);
    qr.q_tr_mul(&mut q_ones);
    let off_span = q_ones.rows(k, n - k).norm();
    let centered = off_span <= 1e-8 * (n as f64).sqrt();

    let tss: f64 = if centered {
        let mean = y.iter().sum::<f64>() / n as f64;
        y.iter().map(|v| (v - mean).powi(2)).sum()
    } else {
        y.iter().map(|v| v * v).sum()
    };
    let r_squared = if tss > 0.0 { 1.0 - ssr / tss } else { 1.0 };

    Ok(ModelFit {
        names: design.names().to_vec(),
        beta: beta.iter().copied().collect(),
        residuals,
        fitted,
        xtx_inv,
        hac_cov: None,
        bandwidth: None,
        r_squared,
        centered,
        ssr,
        nobs: n,
    })
}
