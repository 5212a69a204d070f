//! The four nested regressions and the statistics reported from them.
//!
//! | kind              | regressand   | regressors                                             |
//! |-------------------|--------------|--------------------------------------------------------|
//! | `Trend`           | Y            | c, TIME                                                |
//! | `FixedSeasonal`   | de-trended Y | D1..D12                                                |
//! | `EvolvingSeasonal`| de-trended Y | D1..D12, D1*TIME..D12*TIME                             |
//! | `Joint`           | Y, t = 2..T  | c, TIME, Y(-1), D_i and D_i*TIME for every month but July |
//!
//! TIME is the day index t = 1..T of the full series, in days.

use chrono::NaiveDate;

use crate::error::{ModelError, RegressionError};
use crate::exec::Exec;
use crate::linreg::{ols_fit, wald_test, Bandwidth, DesignMatrix, ModelFit, WaldResult};
use crate::series::{SeasonalDummies, TemperatureSeries, Variable};

pub const CONST: &str = "c";
pub const TIME: &str = "TIME";
pub const LAG: &str = "Y(-1)";
/// Month whose dummy and interaction are absorbed by the joint model's constant.
pub const BASE_MONTH: u32 = 7;
/// Significance level behind the table asterisks.
pub const STAR_LEVEL: f64 = 0.01;
/// Average days per decade, for rescaling per-day slopes.
pub const DAYS_PER_DECADE: f64 = 3652.5;

pub const MONTH_ABBR: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

pub fn dummy_name(month: u32) -> String {
    format!("D{month}")
}

pub fn interaction_name(month: u32) -> String {
    format!("D{month}*TIME")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Trend,
    FixedSeasonal,
    EvolvingSeasonal,
    Joint,
}

/// A model specification: which regressors enter for which regressand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub regressand: Variable,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, regressand: Variable) -> Self {
        ModelSpec { kind, regressand }
    }

    pub fn regressor_names(&self) -> Vec<String> {
        match self.kind {
            ModelKind::Trend => vec![CONST.into(), TIME.into()],
            ModelKind::FixedSeasonal => (1..=12).map(dummy_name).collect(),
            ModelKind::EvolvingSeasonal => (1..=12)
                .map(dummy_name)
                .chain((1..=12).map(interaction_name))
                .collect(),
            ModelKind::Joint => {
                let mut names = vec![CONST.to_string(), TIME.to_string(), LAG.to_string()];
                names.extend(joint_months().map(dummy_name));
                names.extend(joint_months().map(interaction_name));
                names
            }
        }
    }
}

fn joint_months() -> impl Iterator<Item = u32> + Clone {
    (1..=12).filter(|&m| m != BASE_MONTH)
}

/// Estimation settings shared by every model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FitOptions {
    pub bandwidth: Bandwidth,
    pub exec: Exec,
}

fn time_column(n: usize) -> Vec<f64> {
    (1..=n).map(|t| t as f64).collect()
}

/// {c, TIME} on `n` days.
pub fn trend_design(n: usize) -> Result<DesignMatrix, RegressionError> {
    DesignMatrix::from_columns([(CONST, vec![1.0; n]), (TIME, time_column(n))])
}

/// {D1..D12}.
pub fn fixed_seasonal_design(dummies: &SeasonalDummies) -> Result<DesignMatrix, RegressionError> {
    DesignMatrix::from_columns((1..=12).map(|m| (dummy_name(m), dummies.column(m))))
}

/// {D1..D12, D1*TIME..D12*TIME}.
pub fn evolving_seasonal_design(
    dummies: &SeasonalDummies,
    time: &[f64],
) -> Result<DesignMatrix, RegressionError> {
    let mut x = fixed_seasonal_design(dummies)?;
    for m in 1..=12 {
        let col = dummies
            .column(m)
            .iter()
            .zip(time)
            .map(|(d, t)| d * t)
            .collect();
        x.push(interaction_name(m), col)?;
    }
    Ok(x)
}

/// Design and response of the joint model over t = 2..T.
pub fn joint_design(
    y: &[f64],
    dummies: &SeasonalDummies,
) -> Result<(DesignMatrix, Vec<f64>), ModelError> {
    let n = y.len();
    if n < 2 {
        return Err(ModelError::TooShort(n));
    }
    if dummies.len() != n {
        return Err(ModelError::Length(n, dummies.len()));
    }
    let time: Vec<f64> = (2..=n).map(|t| t as f64).collect();
    let d = dummies.slice(1..n);
    let mut x = DesignMatrix::new(n - 1);
    x.push(CONST, vec![1.0; n - 1])?;
    x.push(TIME, time.clone())?;
    x.push(LAG, y[..n - 1].to_vec())?;
    for m in joint_months() {
        x.push(dummy_name(m), d.column(m))?;
    }
    for m in joint_months() {
        let col = d.column(m).iter().zip(&time).map(|(a, t)| a * t).collect();
        x.push(interaction_name(m), col)?;
    }
    Ok((x, y[1..].to_vec()))
}

/// Linear-trend fit and the trend movement it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendFit {
    pub variable: Option<Variable>,
    pub fit: ModelFit,
    /// slope * (T - 1), in °F.
    pub delta_trend: f64,
    /// HAC p-value of the slope.
    pub slope_p_value: f64,
}

impl TrendFit {
    pub fn slope(&self) -> f64 {
        self.fit.beta[1]
    }

    pub fn significant(&self) -> bool {
        self.slope_p_value < STAR_LEVEL
    }
}

pub fn fit_trend(
    series: &TemperatureSeries,
    variable: Variable,
    opts: FitOptions,
) -> Result<TrendFit, ModelError> {
    let mut t = fit_trend_values(series.values(variable), opts)?;
    t.variable = Some(variable);
    Ok(t)
}

/// Trend fit on a bare slice.
pub fn fit_trend_values(y: &[f64], opts: FitOptions) -> Result<TrendFit, ModelError> {
    let n = y.len();
    let x = trend_design(n)?;
    let fit = ols_fit(&x, y)?.with_hac(&x, opts.bandwidth, opts.exec)?;
    let slope_p_value = wald_test(&fit, &[TIME])?.p_value;
    Ok(TrendFit {
        variable: None,
        delta_trend: fit.beta[1] * (n as f64 - 1.0),
        fit,
        slope_p_value,
    })
}

/// Residuals of the trend regression for `variable`.
///
/// Panics if `trend` was fit to a different variable.
pub fn detrend(trend: &TrendFit, variable: Variable) -> Vec<f64> {
    assert!(
        trend.variable.map_or(true, |v| v == variable),
        "trend fit belongs to {:?}, not {variable:?}",
        trend.variable
    );
    trend.fit.residuals.clone()
}

/// Twelve monthly values, January first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeasonalPattern {
    pub month_effects: [f64; 12],
    /// Time index the pattern was evaluated at, for evolving patterns.
    pub evaluated_at: Option<f64>,
}

impl SeasonalPattern {
    /// Calendar month (1..=12) of the largest effect.
    pub fn argmax(&self) -> u32 {
        argbest(&self.month_effects, |a, b| a > b)
    }

    pub fn argmin(&self) -> u32 {
        argbest(&self.month_effects, |a, b| a < b)
    }

    /// Months (1..=12) that exceed both circular neighbours.
    pub fn local_maxima(&self) -> Vec<u32> {
        let e = &self.month_effects;
        (0..12)
            .filter(|&i| e[i] > e[(i + 11) % 12] && e[i] > e[(i + 1) % 12])
            .map(|i| i as u32 + 1)
            .collect()
    }

    pub fn amplitude(&self) -> f64 {
        let max = self.month_effects.iter().copied().fold(f64::MIN, f64::max);
        let min = self.month_effects.iter().copied().fold(f64::MAX, f64::min);
        max - min
    }
}

fn argbest(v: &[f64; 12], better: impl Fn(f64, f64) -> bool) -> u32 {
    let mut best = 0;
    for i in 1..12 {
        if better(v[i], v[best]) {
            best = i;
        }
    }
    best as u32 + 1
}

/// Seasonal-dummy regression of a de-trended series.
pub fn fit_fixed_seasonal(
    detrended: &[f64],
    dummies: &SeasonalDummies,
    opts: FitOptions,
) -> Result<(ModelFit, SeasonalPattern), ModelError> {
    if detrended.len() != dummies.len() {
        return Err(ModelError::Length(detrended.len(), dummies.len()));
    }
    let x = fixed_seasonal_design(dummies)?;
    let fit = ols_fit(&x, detrended)?.with_hac(&x, opts.bandwidth, opts.exec)?;
    let mut effects = [0.0; 12];
    effects.copy_from_slice(&fit.beta[..12]);
    Ok((
        fit,
        SeasonalPattern {
            month_effects: effects,
            evaluated_at: None,
        },
    ))
}

/// Dummy plus dummy-by-time regression of a de-trended series.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvingSeasonalFit {
    pub fit: ModelFit,
}

impl EvolvingSeasonalFit {
    pub fn intercepts(&self) -> &[f64] {
        &self.fit.beta[..12]
    }

    pub fn slopes(&self) -> &[f64] {
        &self.fit.beta[12..24]
    }

    /// Seasonal pattern at time index `t`: coef(D_i) + coef(D_i*TIME) t.
    pub fn pattern_at(&self, t: f64) -> SeasonalPattern {
        let mut e = [0.0; 12];
        for (i, v) in e.iter_mut().enumerate() {
            *v = self.fit.beta[i] + self.fit.beta[12 + i] * t;
        }
        SeasonalPattern {
            month_effects: e,
            evaluated_at: Some(t),
        }
    }

    /// HAC p-value of one month's interaction coefficient.
    pub fn interaction_p_value(&self, month: u32) -> Result<f64, RegressionError> {
        Ok(wald_test(&self.fit, &[interaction_name(month)])?.p_value)
    }
}

pub fn fit_evolving_seasonal(
    detrended: &[f64],
    dummies: &SeasonalDummies,
    time: &[f64],
    opts: FitOptions,
) -> Result<EvolvingSeasonalFit, ModelError> {
    if detrended.len() != dummies.len() {
        return Err(ModelError::Length(detrended.len(), dummies.len()));
    }
    if time.len() != dummies.len() {
        return Err(ModelError::Length(time.len(), dummies.len()));
    }
    let x = evolving_seasonal_design(dummies, time)?;
    let fit = ols_fit(&x, detrended)?.with_hac(&x, opts.bandwidth, opts.exec)?;
    Ok(EvolvingSeasonalFit { fit })
}

/// Where in a year an evolving pattern is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternAnchor {
    pub month: u32,
    pub day: u32,
}

impl Default for PatternAnchor {
    /// July 1, i.e. mid-year.
    fn default() -> Self {
        PatternAnchor { month: 7, day: 1 }
    }
}

impl PatternAnchor {
    /// Time index of the anchor date in `year`, measured from `first` (t = 1).
    /// May fall outside the sample; the pattern is then an extrapolation.
    pub fn t_in_year(&self, first: NaiveDate, year: i32) -> Option<f64> {
        let date = NaiveDate::from_ymd_opt(year, self.month, self.day)?;
        Some(((date - first).num_days() + 1) as f64)
    }
}

/// Joint trend/seasonal/AR(1) fit.
#[derive(Debug, Clone, PartialEq)]
pub struct JointFit {
    pub variable: Option<Variable>,
    pub fit: ModelFit,
}

impl JointFit {
    pub fn rho(&self) -> f64 {
        self.fit.coef(LAG).expect("joint fit has a lag")
    }

    pub fn rho_p_value(&self) -> Result<f64, RegressionError> {
        Ok(wald_test(&self.fit, &[LAG])?.p_value)
    }

    pub fn r_squared(&self) -> f64 {
        self.fit.r_squared
    }
}

pub fn fit_joint(
    series: &TemperatureSeries,
    variable: Variable,
    opts: FitOptions,
) -> Result<JointFit, ModelError> {
    let dummies = crate::series::month_dummies(series);
    let mut j = fit_joint_values(series.values(variable), &dummies, opts)?;
    j.variable = Some(variable);
    Ok(j)
}

pub fn fit_joint_values(
    y: &[f64],
    dummies: &SeasonalDummies,
    opts: FitOptions,
) -> Result<JointFit, ModelError> {
    let (x, resp) = joint_design(y, dummies)?;
    let fit = ols_fit(&x, &resp)?.with_hac(&x, opts.bandwidth, opts.exec)?;
    Ok(JointFit {
        variable: None,
        fit,
    })
}

/// The three joint-model hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisSuite {
    /// No trend: TIME and all interactions are zero (df 12).
    pub no_trend: WaldResult,
    /// No seasonality: all dummies and interactions are zero (df 22).
    pub no_seasonality: WaldResult,
    /// No trend in seasonality: all interactions are zero (df 11).
    pub no_trending_seasonality: WaldResult,
}

pub fn no_trend_restrictions() -> Vec<String> {
    std::iter::once(TIME.to_string())
        .chain(joint_months().map(interaction_name))
        .collect()
}

pub fn no_seasonality_restrictions() -> Vec<String> {
    joint_months()
        .map(dummy_name)
        .chain(joint_months().map(interaction_name))
        .collect()
}

pub fn no_trending_seasonality_restrictions() -> Vec<String> {
    joint_months().map(interaction_name).collect()
}

pub fn hypothesis_suite(joint: &JointFit) -> Result<HypothesisSuite, RegressionError> {
    Ok(HypothesisSuite {
        no_trend: wald_test(&joint.fit, &no_trend_restrictions())?,
        no_seasonality: wald_test(&joint.fit, &no_seasonality_restrictions())?,
        no_trending_seasonality: wald_test(&joint.fit, &no_trending_seasonality_restrictions())?,
    })
}

/// One table row for one station and variable.
#[derive(Debug, Clone, PartialEq)]
pub struct CityReport {
    pub station: String,
    pub variable: Variable,
    pub delta_trend: f64,
    pub delta_trend_p: f64,
    pub p_nt: f64,
    pub p_ns: f64,
    pub p_nts: f64,
    pub rho: f64,
    pub rho_p: f64,
    pub r_squared: f64,
    pub nobs: usize,
    pub trend_bandwidth: usize,
    pub joint_bandwidth: usize,
}

impl CityReport {
    pub fn delta_trend_star(&self) -> bool {
        self.delta_trend_p < STAR_LEVEL
    }

    pub fn rho_star(&self) -> bool {
        self.rho_p < STAR_LEVEL
    }
}

/// Trend fit plus joint fit plus hypothesis tests for one station.
pub fn city_report(
    station: &str,
    series: &TemperatureSeries,
    variable: Variable,
    opts: FitOptions,
) -> Result<CityReport, ModelError> {
    let trend = fit_trend(series, variable, opts)?;
    let joint = fit_joint(series, variable, opts)?;
    let suite = hypothesis_suite(&joint)?;
    Ok(CityReport {
        station: station.to_string(),
        variable,
        delta_trend: trend.delta_trend,
        delta_trend_p: trend.slope_p_value,
        p_nt: suite.no_trend.p_value,
        p_ns: suite.no_seasonality.p_value,
        p_nts: suite.no_trending_seasonality.p_value,
        rho: joint.rho(),
        rho_p: joint.rho_p_value()?,
        r_squared: joint.r_squared(),
        nobs: series.len(),
        trend_bandwidth: trend.fit.bandwidth.unwrap_or(0),
        joint_bandwidth: joint.fit.bandwidth.unwrap_or(0),
    })
}

/// Column-wise medians of a batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianRow {
    pub delta_trend: f64,
    pub p_nt: f64,
    pub p_ns: f64,
    pub p_nts: f64,
    pub rho: f64,
    pub r_squared: f64,
    pub count: usize,
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of nothing");
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Minimum number of successful rows for a median over `requested` stations:
/// a strict majority, e.g. 8 of 15.
pub fn median_quorum(requested: usize) -> usize {
    requested / 2 + 1
}

pub fn median_row(rows: &[&CityReport], requested: usize) -> Result<MedianRow, ModelError> {
    let needed = median_quorum(requested).max(1);
    if rows.len() < needed {
        return Err(ModelError::TooFewRows {
            ok: rows.len(),
            requested,
            needed,
        });
    }
    let col = |f: fn(&CityReport) -> f64| median(&mut rows.iter().map(|r| f(r)).collect::<Vec<_>>());
    Ok(MedianRow {
        delta_trend: col(|r| r.delta_trend),
        p_nt: col(|r| r.p_nt),
        p_ns: col(|r| r.p_ns),
        p_nts: col(|r| r.p_nts),
        rho: col(|r| r.rho),
        r_squared: col(|r| r.r_squared),
        count: rows.len(),
    })
}

/// Per-station rows, in input order, plus the median row.
#[derive(Debug)]
pub struct BatchReport {
    pub variable: Variable,
    pub rows: Vec<(String, Result<CityReport, ModelError>)>,
    pub median: Result<MedianRow, ModelError>,
}

impl BatchReport {
    pub fn successes(&self) -> impl Iterator<Item = &CityReport> {
        self.rows.iter().filter_map(|(_, r)| r.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (&str, &ModelError)> {
        self.rows
            .iter()
            .filter_map(|(s, r)| r.as_ref().err().map(|e| (s.as_str(), e)))
    }
}

/// Fit every station independently and join the results in input order.
pub fn batch_report(
    stations: &[(String, TemperatureSeries)],
    variable: Variable,
    opts: FitOptions,
) -> BatchReport {
    // Parallelism is across stations; the per-fit HAC sums stay sequential.
    let inner = FitOptions {
        exec: Exec::Sequential,
        ..opts
    };
    let rows: Vec<(String, Result<CityReport, ModelError>)> = opts.exec.map(stations, |(code, s)| {
        (code.clone(), city_report(code, s, variable, inner))
    });
    let ok: Vec<&CityReport> = rows.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
    let median = median_row(&ok, stations.len());
    BatchReport {
        variable,
        rows,
        median,
    }
}
