//! Newey-West covariance with Bartlett weights.
//!
//! ```text
//! V = B S B,   B = (X'X)^-1
//! S = G_0 + sum_{j=1..L} w_j (G_j + G_j'),   w_j = 1 - j / (L + 1)
//! G_j = sum_{t=j+1..n} (x_t u_t)(x_{t-j} u_{t-j})'
//! ```
//!
//! No small-sample degrees-of-freedom scaling is applied, so `L = 0` gives
//! the White HC0 sandwich.

use nalgebra::DMatrix;

use super::design::DesignMatrix;
use super::ols::{factor, r_inverse};
use crate::error::RegressionError;
use crate::exec::Exec;

/// HAC lag truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Bandwidth {
    /// floor(4 (n/100)^(2/9)).
    #[default]
    Auto,
    Fixed(usize),
}

impl Bandwidth {
    pub fn resolve(self, nobs: usize) -> Result<usize, RegressionError> {
        let lags = match self {
            Bandwidth::Auto => auto_bandwidth(nobs),
            Bandwidth::Fixed(l) => l,
        };
        if lags >= nobs {
            return Err(RegressionError::Bandwidth {
                bandwidth: lags,
                nobs,
            });
        }
        Ok(lags)
    }
}

impl std::fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bandwidth::Auto => f.write_str("auto"),
            Bandwidth::Fixed(l) => write!(f, "{l}"),
        }
    }
}

impl std::str::FromStr for Bandwidth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Bandwidth::Auto);
        }
        s.parse()
            .map(Bandwidth::Fixed)
            .map_err(|_| format!("bandwidth must be \"auto\" or a nonnegative integer, got {s:?}"))
    }
}

/// The common Newey-West plug-in lag, floor(4 (n/100)^(2/9)).
pub fn auto_bandwidth(nobs: usize) -> usize {
    (4.0 * (nobs as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// HAC covariance of the OLS coefficients for `design` given its residuals.
pub fn hac_cov(
    design: &DesignMatrix,
    residuals: &[f64],
    bandwidth: Bandwidth,
    exec: Exec,
) -> Result<DMatrix<f64>, RegressionError> {
    let lags = bandwidth.resolve(design.nobs())?;
    let f = factor(design)?;
    let r_inv = r_inverse(&f.r);
    let bread = &r_inv * r_inv.transpose();
    hac_cov_with_bread(design, residuals, &bread, lags, exec)
}

/// HAC covariance with a precomputed `(X'X)^-1`.
pub fn hac_cov_with_bread(
    design: &DesignMatrix,
    residuals: &[f64],
    bread: &DMatrix<f64>,
    lags: usize,
    exec: Exec,
) -> Result<DMatrix<f64>, RegressionError> {
    let n = design.nobs();
    let k = design.ncols();
    if residuals.len() != n {
        return Err(RegressionError::ResponseLength {
            expected: n,
            found: residuals.len(),
        });
    }
    if lags >= n {
        return Err(RegressionError::Bandwidth {
            bandwidth: lags,
            nobs: n,
        });
    }

    let scores = DMatrix::from_iterator(
        n,
        k,
        (0..k).flat_map(|j| {
            design
                .column_at(j)
                .iter()
                .zip(residuals)
                .map(|(x, u)| x * u)
        }),
    );

    let gammas = exec.map_range(lags + 1, |j| {
        let lead = scores.rows(j, n - j);
        let lagged = scores.rows(0, n - j);
        lead.transpose() * lagged
    });

    let mut meat = gammas[0].clone();
    for (j, g) in gammas.iter().enumerate().skip(1) {
        let w = 1.0 - j as f64 / (lags as f64 + 1.0);
        meat += (g + g.transpose()) * w;
    }

    let cov = bread * meat * bread;
    let sym = (&cov + cov.transpose()) * 0.5;
    if sym.iter().any(|v| !v.is_finite()) {
        return Err(RegressionError::NonFinite("HAC covariance"));
    }
    Ok(sym)
}
