//! Daily AVG/DTR series with calendar features.

use std::io::{Read, Write};

use chrono::{Datelike, NaiveDate};

use crate::error::SeriesError;
use crate::ghcn::{DailyObservation, DateWindow};

/// Which derived temperature series a model is fit to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variable {
    /// Daily average, (MAX + MIN) / 2.
    Avg,
    /// Diurnal temperature range, MAX - MIN.
    Dtr,
}

impl Variable {
    pub const BOTH: [Variable; 2] = [Variable::Avg, Variable::Dtr];

    pub fn label(self) -> &'static str {
        match self {
            Variable::Avg => "AVG",
            Variable::Dtr => "DTR",
        }
    }
}

impl std::fmt::Display for Variable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Variable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "AVG" => Ok(Variable::Avg),
            "DTR" => Ok(Variable::Dtr),
            other => Err(format!("unknown variable {other:?} (expected AVG or DTR)")),
        }
    }
}

/// Contiguous daily temperature record.
///
/// Max/min are whole °F. AVG is held in f64, which represents the
/// half-degree values exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureSeries {
    dates: Vec<NaiveDate>,
    max_f: Vec<i32>,
    min_f: Vec<i32>,
    avg: Vec<f64>,
    dtr: Vec<f64>,
}

impl TemperatureSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn max_f(&self) -> &[i32] {
        &self.max_f
    }

    pub fn min_f(&self) -> &[i32] {
        &self.min_f
    }

    pub fn avg(&self) -> &[f64] {
        &self.avg
    }

    pub fn dtr(&self) -> &[f64] {
        &self.dtr
    }

    pub fn values(&self, variable: Variable) -> &[f64] {
        match variable {
            Variable::Avg => &self.avg,
            Variable::Dtr => &self.dtr,
        }
    }

    /// Time trend t = 1..T.
    pub fn time_index(&self) -> Vec<f64> {
        (1..=self.len()).map(|t| t as f64).collect()
    }

    /// Calendar month (1..=12) of every day.
    pub fn months(&self) -> Vec<u32> {
        self.dates.iter().map(|d| d.month()).collect()
    }

    pub fn window(&self) -> Option<DateWindow> {
        Some(DateWindow::new(*self.dates.first()?, *self.dates.last()?))
    }

    /// 1-based t of a date, if it lies in the series.
    pub fn t_of(&self, date: NaiveDate) -> Option<usize> {
        let first = *self.dates.first()?;
        let offset = (date - first).num_days();
        (offset >= 0 && (offset as usize) < self.len()).then(|| offset as usize + 1)
    }

    /// Write the series as CSV: date, tmax, tmin, avg, dtr, t, month.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SeriesError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "tmax", "tmin", "avg", "dtr", "t", "month"])?;
        for i in 0..self.len() {
            w.write_record([
                self.dates[i].to_string(),
                self.max_f[i].to_string(),
                self.min_f[i].to_string(),
                format_half(self.avg[i]),
                format_half(self.dtr[i]),
                (i + 1).to_string(),
                self.dates[i].month().to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Read a CSV written by [`TemperatureSeries::write_csv`]. Only the date,
    /// tmax and tmin columns are trusted; everything else is recomputed.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, SeriesError> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| SeriesError::CsvContent {
                    row: 1,
                    message: format!("missing column {name:?}"),
                })
        };
        let (di, hi, li) = (col("date")?, col("tmax")?, col("tmin")?);
        let mut obs = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            let bad = |message: String| SeriesError::CsvContent { row, message };
            let field = |j: usize| rec.get(j).unwrap_or("");
            let date = NaiveDate::parse_from_str(field(di), "%Y-%m-%d")
                .map_err(|e| bad(format!("date {:?}: {e}", field(di))))?;
            let tmax = field(hi)
                .parse()
                .map_err(|e| bad(format!("tmax {:?}: {e}", field(hi))))?;
            let tmin = field(li)
                .parse()
                .map_err(|e| bad(format!("tmin {:?}: {e}", field(li))))?;
            obs.push(DailyObservation {
                date,
                tmax_f: Some(tmax),
                tmin_f: Some(tmin),
            });
        }
        build_series(&obs, None)
    }
}

fn format_half(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.1}")
    }
}

/// Assemble the aligned series from complete observations.
///
/// When `window` is given the observations must cover it exactly.
pub fn build_series(
    observations: &[DailyObservation],
    window: Option<DateWindow>,
) -> Result<TemperatureSeries, SeriesError> {
    let (first, last) = match (observations.first(), observations.last()) {
        (Some(f), Some(l)) => (f.date, l.date),
        _ => return Err(SeriesError::Empty),
    };
    if let Some(w) = window {
        if first != w.start || last != w.end {
            return Err(SeriesError::Window {
                start: w.start,
                end: w.end,
            });
        }
    }

    for pair in observations.windows(2) {
        if pair[0].date.succ_opt() != Some(pair[1].date) {
            return Err(SeriesError::Gap {
                after: pair[0].date,
                next: pair[1].date,
            });
        }
    }

    let n = observations.len();
    let mut series = TemperatureSeries {
        dates: Vec::with_capacity(n),
        max_f: Vec::with_capacity(n),
        min_f: Vec::with_capacity(n),
        avg: Vec::with_capacity(n),
        dtr: Vec::with_capacity(n),
    };
    let mut inverted = Vec::new();
    for o in observations {
        let (Some(hi), Some(lo)) = (o.tmax_f, o.tmin_f) else {
            return Err(SeriesError::Incomplete(o.date));
        };
        if hi < lo {
            inverted.push(o.date);
        }
        series.dates.push(o.date);
        series.max_f.push(hi);
        series.min_f.push(lo);
        series.avg.push(f64::from(hi + lo) / 2.0);
        series.dtr.push(f64::from(hi - lo));
    }
    if !inverted.is_empty() {
        return Err(SeriesError::Inversion(inverted));
    }
    Ok(series)
}

/// Monthly indicator columns, D_i(t) = 1 when day t falls in month i.
///
/// Stored as the month of each day; the full indicator matrix is never
/// materialized unless asked for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeasonalDummies {
    months: Vec<u32>,
}

impl SeasonalDummies {
    pub fn from_months(months: Vec<u32>) -> Self {
        assert!(months.iter().all(|m| (1..=12).contains(m)), "month out of range");
        SeasonalDummies { months }
    }

    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    pub fn months(&self) -> &[u32] {
        &self.months
    }

    /// Value of D_month at 0-based day index `i`.
    pub fn get(&self, month: u32, i: usize) -> f64 {
        if self.months[i] == month {
            1.0
        } else {
            0.0
        }
    }

    /// The indicator column for `month` (1..=12).
    pub fn column(&self, month: u32) -> Vec<f64> {
        self.months
            .iter()
            .map(|&m| if m == month { 1.0 } else { 0.0 })
            .collect()
    }

    /// Number of days falling in each month, January first.
    pub fn column_sums(&self) -> [usize; 12] {
        let mut sums = [0; 12];
        for &m in &self.months {
            sums[m as usize - 1] += 1;
        }
        sums
    }

    /// Restrict to the day indices in `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> SeasonalDummies {
        SeasonalDummies {
            months: self.months[range].to_vec(),
        }
    }
}

pub fn month_dummies(series: &TemperatureSeries) -> SeasonalDummies {
    assert!(!series.is_empty(), "month_dummies on an empty series");
    SeasonalDummies::from_months(series.months())
}
