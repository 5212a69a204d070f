//! Table and figure-data rendering.
//!
//! Every rendered number goes through [`fmt2`], so the CSV and text versions
//! of a table agree digit for digit. Full-precision values are carried in
//! additional `*_raw` CSV columns.

use std::fmt::Write as _;
use std::path::Path;

use chrono::Datelike;

use crate::density::{kde, DensityEstimate, KdeBandwidth, DEFAULT_GRID_POINTS};
use crate::error::{DensityError, ModelError};
use crate::models::{
    detrend, fit_evolving_seasonal, fit_fixed_seasonal, fit_trend, BatchReport, CityReport,
    FitOptions, MedianRow, PatternAnchor, SeasonalPattern, MONTH_ABBR,
};
use crate::series::{month_dummies, TemperatureSeries, Variable};

/// Two-decimal rendering; never prints a negative zero.
pub fn fmt2(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

fn full(v: f64) -> String {
    format!("{v:.10e}")
}

pub const TABLE_COLUMNS: [&str; 7] = ["station", "delta_trend", "p_nt", "p_ns", "p_nts", "rho", "r_squared"];

/// CSV rendering of a batch: one row per successful station plus `Median`.
pub fn table_csv(report: &BatchReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "station",
        "delta_trend",
        "delta_trend_star",
        "p_nt",
        "p_ns",
        "p_nts",
        "rho",
        "rho_star",
        "r_squared",
        "delta_trend_raw",
        "delta_trend_p_raw",
        "p_nt_raw",
        "p_ns_raw",
        "p_nts_raw",
        "rho_raw",
        "rho_p_raw",
        "r_squared_raw",
        "nobs",
        "trend_bandwidth",
        "joint_bandwidth",
    ])
    .expect("in-memory write");
    for r in report.successes() {
        w.write_record([
            r.station.clone(),
            fmt2(r.delta_trend),
            r.delta_trend_star().to_string(),
            fmt2(r.p_nt),
            fmt2(r.p_ns),
            fmt2(r.p_nts),
            fmt2(r.rho),
            r.rho_star().to_string(),
            fmt2(r.r_squared),
            full(r.delta_trend),
            full(r.delta_trend_p),
            full(r.p_nt),
            full(r.p_ns),
            full(r.p_nts),
            full(r.rho),
            full(r.rho_p),
            full(r.r_squared),
            r.nobs.to_string(),
            r.trend_bandwidth.to_string(),
            r.joint_bandwidth.to_string(),
        ])
        .expect("in-memory write");
    }
    if let Ok(m) = &report.median {
        let mut rec = vec![
            "Median".to_string(),
            fmt2(m.delta_trend),
            String::new(),
            fmt2(m.p_nt),
            fmt2(m.p_ns),
            fmt2(m.p_nts),
            fmt2(m.rho),
            String::new(),
            fmt2(m.r_squared),
            full(m.delta_trend),
            String::new(),
            full(m.p_nt),
            full(m.p_ns),
            full(m.p_nts),
            full(m.rho),
            String::new(),
            full(m.r_squared),
        ];
        rec.extend([m.count.to_string(), String::new(), String::new()]);
        w.write_record(rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn starred(v: f64, star: bool) -> String {
    if star {
        format!("{}*", fmt2(v))
    } else {
        fmt2(v)
    }
}

/// Fixed-width text rendering, asterisks marking 1% significance.
pub fn table_text(report: &BatchReport) -> String {
    let mut rows: Vec<[String; 7]> = Vec::new();
    rows.push(TABLE_COLUMNS.map(String::from));
    for r in report.successes() {
        rows.push(text_row(r));
    }
    let median = report.median.as_ref().ok().map(median_text_row);
    let mut widths = [0usize; 7];
    for row in rows.iter().chain(median.iter()) {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let rule = "-".repeat(widths.iter().sum::<usize>() + 2 * 6);
    let mut out = String::new();
    let _ = writeln!(out, "{} table", report.variable);
    let _ = writeln!(out, "{rule}");
    let fmt_row = |out: &mut String, row: &[String; 7]| {
        let cells: Vec<String> = row
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    };
    fmt_row(&mut out, &rows[0]);
    let _ = writeln!(out, "{rule}");
    for row in &rows[1..] {
        fmt_row(&mut out, row);
    }
    if let Some(m) = &median {
        let _ = writeln!(out, "{rule}");
        fmt_row(&mut out, m);
    }
    let _ = writeln!(out, "{rule}");
    let _ = writeln!(out, "* significant at the 1% level (HAC)");
    out
}

fn text_row(r: &CityReport) -> [String; 7] {
    [
        r.station.clone(),
        starred(r.delta_trend, r.delta_trend_star()),
        fmt2(r.p_nt),
        fmt2(r.p_ns),
        fmt2(r.p_nts),
        starred(r.rho, r.rho_star()),
        fmt2(r.r_squared),
    ]
}

fn median_text_row(m: &MedianRow) -> [String; 7] {
    [
        "Median".to_string(),
        fmt2(m.delta_trend),
        fmt2(m.p_nt),
        fmt2(m.p_ns),
        fmt2(m.p_nts),
        fmt2(m.rho),
        fmt2(m.r_squared),
    ]
}

/// Figure data for one variable of one station.
#[derive(Debug, Clone)]
pub struct VariableFigures {
    pub variable: Variable,
    pub density: DensityEstimate,
    pub trend_fitted: Vec<f64>,
    pub delta_trend: f64,
    pub detrended: Vec<f64>,
    pub seasonal_fitted: Vec<f64>,
    pub fixed_r_squared: f64,
    pub fixed: SeasonalPattern,
    pub first: SeasonalPattern,
    pub last: SeasonalPattern,
    /// HAC p-values of the twelve D_i*TIME coefficients.
    pub interaction_p: [f64; 12],
}

#[derive(Debug, Clone)]
pub struct FigureBundle {
    pub station: String,
    pub first_year: i32,
    pub last_year: i32,
    pub dates: Vec<chrono::NaiveDate>,
    pub raw: [Vec<f64>; 2],
    pub variables: [VariableFigures; 2],
}

#[derive(Debug, thiserror::Error)]
pub enum FigureError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("empty series")]
    Empty,
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl From<crate::error::RegressionError> for FigureError {
    fn from(e: crate::error::RegressionError) -> Self {
        FigureError::Model(e.into())
    }
}

fn variable_figures(
    series: &TemperatureSeries,
    variable: Variable,
    opts: FitOptions,
    anchor: PatternAnchor,
    years: (i32, i32),
) -> Result<VariableFigures, FigureError> {
    let first_date = *series.dates().first().ok_or(FigureError::Empty)?;
    let y = series.values(variable);
    let density = kde(y, KdeBandwidth::Silverman, DEFAULT_GRID_POINTS, opts.exec)?;
    let trend = fit_trend(series, variable, opts)?;
    let detrended = detrend(&trend, variable);
    let dummies = month_dummies(series);
    let (fixed_fit, fixed) = fit_fixed_seasonal(&detrended, &dummies, opts)?;
    let evolving = fit_evolving_seasonal(&detrended, &dummies, &series.time_index(), opts)?;
    let t_of = |year| {
        anchor
            .t_in_year(first_date, year)
            .expect("anchor is a valid calendar date")
    };
    let mut interaction_p = [0.0; 12];
    for (m, p) in (1..=12).zip(interaction_p.iter_mut()) {
        *p = evolving.interaction_p_value(m)?;
    }
    Ok(VariableFigures {
        variable,
        density,
        trend_fitted: trend.fit.fitted.clone(),
        delta_trend: trend.delta_trend,
        seasonal_fitted: fixed_fit.fitted.clone(),
        fixed_r_squared: fixed_fit.r_squared,
        detrended,
        fixed,
        first: evolving.pattern_at(t_of(years.0)),
        last: evolving.pattern_at(t_of(years.1)),
        interaction_p,
    })
}

impl FigureBundle {
    pub fn compute(
        station: &str,
        series: &TemperatureSeries,
        opts: FitOptions,
        anchor: PatternAnchor,
    ) -> Result<Self, FigureError> {
        let dates = series.dates().to_vec();
        let (first, last) = match (dates.first(), dates.last()) {
            (Some(f), Some(l)) => (f.year(), l.year()),
            _ => return Err(FigureError::Empty),
        };
        Ok(FigureBundle {
            station: station.to_string(),
            first_year: first,
            last_year: last,
            raw: [series.avg().to_vec(), series.dtr().to_vec()],
            variables: [
                variable_figures(series, Variable::Avg, opts, anchor, (first, last))?,
                variable_figures(series, Variable::Dtr, opts, anchor, (first, last))?,
            ],
            dates,
        })
    }

    pub fn get(&self, variable: Variable) -> &VariableFigures {
        match variable {
            Variable::Avg => &self.variables[0],
            Variable::Dtr => &self.variables[1],
        }
    }

    /// Render every figure file as `(file name, contents)`.
    pub fn render(&self) -> Vec<(String, String)> {
        let code = self.station.to_ascii_lowercase();
        let mut files = Vec::new();
        for (raw, v) in self.raw.iter().zip(&self.variables) {
            let var = v.variable.label().to_ascii_lowercase();
            let mut s = String::from("grid,density\n");
            for (x, d) in v.density.grid.iter().zip(&v.density.values) {
                let _ = writeln!(s, "{x:.6},{d:.10e}");
            }
            files.push((format!("{code}_density_{var}.csv"), s));

            let mut s = String::from("date,value,trend\n");
            for ((d, y), f) in self.dates.iter().zip(raw).zip(&v.trend_fitted) {
                let _ = writeln!(s, "{d},{y},{f:.6}");
            }
            files.push((format!("{code}_trend_{var}.csv"), s));

            let mut s = String::from("date,detrended,fixed_seasonal\n");
            for ((d, y), f) in self.dates.iter().zip(&v.detrended).zip(&v.seasonal_fitted) {
                let _ = writeln!(s, "{d},{y:.6},{f:.6}");
            }
            files.push((format!("{code}_seasonal_fit_{var}.csv"), s));
        }

        let [avg, dtr] = &self.variables;
        let mut s = String::from("month,name,avg,dtr\n");
        for i in 0..12 {
            let _ = writeln!(
                s,
                "{},{},{:.6},{:.6}",
                i + 1,
                MONTH_ABBR[i],
                avg.fixed.month_effects[i],
                dtr.fixed.month_effects[i]
            );
        }
        files.push((format!("{code}_fixed_patterns.csv"), s));

        let (y0, y1) = (self.first_year, self.last_year);
        let mut s = format!(
            "month,name,avg_{y0},avg_{y1},dtr_{y0},dtr_{y1},avg_interaction_p,dtr_interaction_p\n"
        );
        for i in 0..12 {
            let _ = writeln!(
                s,
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                i + 1,
                MONTH_ABBR[i],
                avg.first.month_effects[i],
                avg.last.month_effects[i],
                dtr.first.month_effects[i],
                dtr.last.month_effects[i],
                avg.interaction_p[i],
                dtr.interaction_p[i]
            );
        }
        files.push((format!("{code}_evolving_patterns.csv"), s));
        files
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<String>, FigureError> {
        let io = |path: &Path, source| FigureError::Io {
            path: path.display().to_string(),
            source,
        };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut names = Vec::new();
        for (name, body) in self.render() {
            let path = dir.join(&name);
            crate::fetch::write_atomic(&path, body.as_bytes()).map_err(|e| io(&path, e))?;
            names.push(name);
        }
        Ok(names)
    }
}
