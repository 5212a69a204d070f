//! Daily temperature level and range dynamics.
//!
//! The crate turns GHCN-daily station records into daily AVG = (MAX+MIN)/2
//! and DTR = MAX-MIN series and fits a ladder of linear models to them:
//! a linear trend, fixed monthly seasonals on the de-trended series, monthly
//! seasonals with their own linear drift, and a joint trend/seasonal/AR(1)
//! regression. Inference uses Newey-West HAC covariances and Wald tests.
//!
//! Module map:
//!
//! - [`ghcn`]: `.dly` parsing, °F conversion, gap filling.
//! - [`fetch`]: archive client with an on-disk cache.
//! - [`series`]: aligned daily series and monthly dummies.
//! - [`linreg`]: QR least squares, HAC covariance, chi-square tails, Wald tests.
//! - [`models`]: the four specifications, hypothesis tests and table rows.
//! - [`density`]: kernel density estimates and mode finding.
//! - [`config`], [`report`]: run configuration and table/figure rendering.
//! - [`exec`]: sequential or rayon-parallel execution of batch loops.

pub mod config;
pub mod density;
pub mod error;
pub mod exec;
pub mod fetch;
pub mod ghcn;
pub mod linreg;
pub mod models;
pub mod report;
pub mod series;

pub use error::{
    ConfigError, DensityError, FetchError, IngestError, ModelError, RegressionError, SeriesError,
};
pub use exec::Exec;
pub use series::{TemperatureSeries, Variable};
