//! Least-squares estimation with Newey-West HAC covariance and Wald tests.
//!
//! The pieces compose as:
//!
//! ```text
//! DesignMatrix --ols_fit--> ModelFit --with_hac--> ModelFit (hac_cov set) --wald_test--> WaldResult
//! ```
//!
//! Coefficients are solved through a Householder QR factorization of the
//! design; the normal equations are never formed.

mod chi2;
mod design;
mod hac;
mod ols;
mod wald;

pub use chi2::{chi2_sf, ln_gamma, regularized_gamma_p, regularized_gamma_q, Chi2Error};
pub use design::DesignMatrix;
pub use hac::{auto_bandwidth, hac_cov, hac_cov_with_bread, Bandwidth};
pub use ols::{ols_fit, ModelFit};
pub use wald::{wald_test, WaldResult};
