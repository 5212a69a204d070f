//! GHCN-daily `.dly` records: fixed-width parsing, unit conversion and
//! repair of isolated missing days.
//!
//! Each line of a `.dly` file holds one station-month of one element:
//!
//! ```text
//! cols  1-11  station id
//! cols 12-15  year
//! cols 16-17  month
//! cols 18-21  element (TMAX, TMIN, PRCP, ...)
//! then 31 groups of 8 columns: value (5, right aligned), mflag, qflag, sflag
//! ```
//!
//! Values are tenths of a degree Celsius for the temperature elements, with
//! `-9999` marking a missing day (and every slot past the end of the month).

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};

use crate::error::{GapError, IngestError};

/// Missing-value sentinel used in the value columns.
pub const MISSING: i32 = -9999;
/// Length of every record line, excluding the line terminator.
pub const LINE_LEN: usize = 269;
pub const SLOTS: usize = 31;

const ID_END: usize = 11;
const YEAR_END: usize = 15;
const MONTH_END: usize = 17;
const ELEMENT_END: usize = 21;
const SLOT_WIDTH: usize = 8;

/// One day's value column group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DaySlot {
    pub value: i32,
    pub mflag: char,
    pub qflag: char,
    pub sflag: char,
}

impl DaySlot {
    pub const EMPTY: DaySlot = DaySlot {
        value: MISSING,
        mflag: ' ',
        qflag: ' ',
        sflag: ' ',
    };

    pub fn is_missing(&self) -> bool {
        self.value == MISSING
    }

    /// A non-blank quality flag means the value failed one of NOAA's checks.
    pub fn failed_qc(&self) -> bool {
        self.qflag != ' '
    }
}

/// The two elements the pipeline consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Tmax,
    Tmin,
}

impl Element {
    pub fn code(self) -> &'static str {
        match self {
            Element::Tmax => "TMAX",
            Element::Tmin => "TMIN",
        }
    }

    pub fn from_code(code: &str) -> Option<Element> {
        match code {
            "TMAX" => Some(Element::Tmax),
            "TMIN" => Some(Element::Tmin),
            _ => None,
        }
    }
}

/// One parsed `.dly` line. Elements other than TMAX/TMIN are kept so that a
/// parse/serialize round trip is lossless; use [`RawDlyRecord::temperature_element`]
/// to filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDlyRecord {
    pub station_id: String,
    pub year: i32,
    pub month: u32,
    pub element: String,
    pub values: [DaySlot; SLOTS],
}

impl RawDlyRecord {
    pub fn temperature_element(&self) -> Option<Element> {
        Element::from_code(&self.element)
    }

    /// Serialize back to the 269-character fixed-width layout.
    pub fn to_line(&self) -> String {
        let mut line = String::with_capacity(LINE_LEN);
        line.push_str(&format!(
            "{:<11}{:04}{:02}{:<4}",
            self.station_id, self.year, self.month, self.element
        ));
        for slot in &self.values {
            line.push_str(&format!(
                "{:>5}{}{}{}",
                slot.value, slot.mflag, slot.qflag, slot.sflag
            ));
        }
        line
    }
}

/// Number of days in a calendar month.
pub fn days_in_month(year: i32, month: u32) -> u32 {
    let (ny, nm) = if month == 12 { (year + 1, 1) } else { (year, month + 1) };
    NaiveDate::from_ymd_opt(ny, nm, 1)
        .and_then(|d| d.pred_opt())
        .map(|d| d.day())
        .expect("valid month")
}

/// Parse one record line. `line_no` is 1-based and only used in errors.
pub fn parse_line(line: &str, line_no: usize) -> Result<RawDlyRecord, IngestError> {
    if !line.is_ascii() {
        return Err(IngestError::NotAscii { line: line_no });
    }
    if line.len() != LINE_LEN {
        return Err(IngestError::LineLength {
            line: line_no,
            expected: LINE_LEN,
            found: line.len(),
        });
    }
    let field_err = |field: &'static str, text: &str| IngestError::Field {
        line: line_no,
        field,
        text: text.to_string(),
    };

    let station_id = line[..ID_END].to_string();
    let year_text = &line[ID_END..YEAR_END];
    if !year_text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(field_err("year", year_text));
    }
    let year: i32 = year_text.parse().map_err(|_| field_err("year", year_text))?;
    let month_text = &line[YEAR_END..MONTH_END];
    if !month_text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(field_err("month", month_text));
    }
    let month: u32 = month_text.parse().map_err(|_| field_err("month", month_text))?;
    if !(1..=12).contains(&month) {
        return Err(IngestError::Month { line: line_no, month });
    }
    let element = line[MONTH_END..ELEMENT_END].to_string();
    let month_len = days_in_month(year, month) as usize;

    let bytes = line.as_bytes();
    let mut values = [DaySlot::EMPTY; SLOTS];
    for (day, slot) in values.iter_mut().enumerate() {
        let start = ELEMENT_END + day * SLOT_WIDTH;
        let text = &line[start..start + 5];
        let value: i32 = text
            .trim_start()
            .parse()
            .map_err(|_| field_err("value", text))?;
        if day >= month_len && value != MISSING {
            return Err(IngestError::BeyondMonthEnd {
                line: line_no,
                year,
                month,
                day: day + 1,
            });
        }
        *slot = DaySlot {
            value,
            mflag: bytes[start + 5] as char,
            qflag: bytes[start + 6] as char,
            sflag: bytes[start + 7] as char,
        };
    }

    Ok(RawDlyRecord {
        station_id,
        year,
        month,
        element,
        values,
    })
}

/// Parse a whole `.dly` payload. Blank lines are skipped and `\r\n` endings
/// are accepted; any other malformed line aborts with its line number.
pub fn parse_dly(bytes: &[u8]) -> Result<Vec<RawDlyRecord>, IngestError> {
    let mut out = Vec::new();
    for (i, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        if raw.is_empty() {
            continue;
        }
        let line = std::str::from_utf8(raw).map_err(|_| IngestError::NotAscii { line: i + 1 })?;
        out.push(parse_line(line, i + 1)?);
    }
    Ok(out)
}

/// Convert tenths of a degree Celsius to whole degrees Fahrenheit, rounding
/// half away from zero.
///
/// Panics on the [`MISSING`] sentinel; callers filter missing slots first.
pub fn to_fahrenheit_int(tenths_celsius: i32) -> i32 {
    assert_ne!(
        tenths_celsius, MISSING,
        "missing sentinel passed to to_fahrenheit_int"
    );
    // F = C/10 * 9/5 + 32 = (9 * tenths + 1600) / 50, exactly.
    let num = 9 * i64::from(tenths_celsius) + 1600;
    let rounded = if num >= 0 {
        (num + 25) / 50
    } else {
        -((-num + 25) / 50)
    };
    rounded as i32
}

/// Integer midpoint rounded half away from zero.
pub fn midpoint_round(a: i32, b: i32) -> i32 {
    let sum = i64::from(a) + i64::from(b);
    ((sum + sum.signum() * (sum % 2).abs()) / 2) as i32
}

/// Fill isolated missing values with the rounded average of their two
/// neighbours. Runs of two or more missing values are rejected, as are
/// missing values at either end.
pub fn interpolate_missing(series: &[Option<i32>]) -> Result<Vec<i32>, GapError> {
    interpolate_missing_with_max_gap(series, 1)
}

/// Like [`interpolate_missing`], but bridges runs of up to `max_gap`
/// consecutive missing values. Every day in a run receives the rounded
/// average of the nearest present values before and after the run.
pub fn interpolate_missing_with_max_gap(
    series: &[Option<i32>],
    max_gap: usize,
) -> Result<Vec<i32>, GapError> {
    let n = series.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if series[0].is_none() {
        return Err(GapError::Boundary(0));
    }
    if series[n - 1].is_none() {
        return Err(GapError::Boundary(n - 1));
    }
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        match series[i] {
            Some(v) => {
                out.push(v);
                i += 1;
            }
            None => {
                let start = i;
                while series[i].is_none() {
                    i += 1;
                }
                let len = i - start;
                if len > max_gap {
                    return Err(GapError::Run { start, len });
                }
                let prev = out[start - 1];
                let next = series[i].expect("run ends on a present value");
                let fill = midpoint_round(prev, next);
                out.extend(std::iter::repeat(fill).take(len));
            }
        }
    }
    Ok(out)
}

/// One station-day in whole degrees Fahrenheit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DailyObservation {
    pub date: NaiveDate,
    pub tmax_f: Option<i32>,
    pub tmin_f: Option<i32>,
}

impl DailyObservation {
    pub fn is_inverted(&self) -> bool {
        matches!((self.tmax_f, self.tmin_f), (Some(hi), Some(lo)) if hi < lo)
    }
}

/// Inclusive calendar window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Self {
        DateWindow { start, end }
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }

    /// Number of calendar days, inclusive of both ends.
    pub fn len_days(&self) -> usize {
        ((self.end - self.start).num_days() + 1).max(0) as usize
    }

    pub fn days(&self) -> impl Iterator<Item = NaiveDate> {
        self.start.iter_days().take(self.len_days())
    }
}

/// Options controlling how raw records become a complete daily record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestOptions {
    /// Treat values with a non-blank quality flag as missing.
    pub strict_qc: bool,
    /// Longest run of consecutive missing days that may be bridged.
    pub max_gap: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            strict_qc: false,
            max_gap: 1,
        }
    }
}

/// Result of ingesting one station.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestedStation {
    /// One complete observation per window day.
    pub observations: Vec<DailyObservation>,
    /// Days whose value was filled in, per element.
    pub interpolated: Vec<(NaiveDate, Element)>,
    /// Days where the reported maximum was below the minimum; both values were
    /// discarded and re-filled.
    pub inversions: Vec<NaiveDate>,
    /// Values discarded because of their quality flag (strict QC only).
    pub qc_rejected: usize,
}

/// Lay the TMAX/TMIN records of one station onto the daily window, in whole
/// °F, without repairing anything.
pub fn daily_observations(
    records: &[RawDlyRecord],
    window: DateWindow,
    strict_qc: bool,
) -> Result<(Vec<DailyObservation>, usize), IngestError> {
    let mut by_month: BTreeMap<(Element, i32, u32), &RawDlyRecord> = BTreeMap::new();
    for (i, rec) in records.iter().enumerate() {
        let Some(element) = rec.temperature_element() else {
            continue;
        };
        if by_month.insert((element, rec.year, rec.month), rec).is_some() {
            return Err(IngestError::Duplicate {
                line: i + 1,
                element: rec.element.clone(),
                year: rec.year,
                month: rec.month,
            });
        }
    }

    let mut rejected = 0;
    let mut lookup = |element: Element, date: NaiveDate| -> Option<i32> {
        let rec = by_month.get(&(element, date.year(), date.month()))?;
        let slot = rec.values[date.day0() as usize];
        if slot.is_missing() {
            return None;
        }
        if strict_qc && slot.failed_qc() {
            rejected += 1;
            return None;
        }
        Some(to_fahrenheit_int(slot.value))
    };

    let obs = window
        .days()
        .map(|date| DailyObservation {
            date,
            tmax_f: lookup(Element::Tmax, date),
            tmin_f: lookup(Element::Tmin, date),
        })
        .collect();
    Ok((obs, rejected))
}

/// Full ingest of one station: convert to °F, discard inverted days, then fill
/// missing days in integer °F.
pub fn ingest_records(
    records: &[RawDlyRecord],
    window: DateWindow,
    options: IngestOptions,
) -> Result<IngestedStation, IngestError> {
    let (mut obs, qc_rejected) = daily_observations(records, window, options.strict_qc)?;

    let mut inversions = Vec::new();
    for o in obs.iter_mut().filter(|o| o.is_inverted()) {
        inversions.push(o.date);
        o.tmax_f = None;
        o.tmin_f = None;
    }

    let mut interpolated = Vec::new();
    let mut filled = [Vec::new(), Vec::new()];
    for (k, element) in [Element::Tmax, Element::Tmin].into_iter().enumerate() {
        let column: Vec<Option<i32>> = obs
            .iter()
            .map(|o| match element {
                Element::Tmax => o.tmax_f,
                Element::Tmin => o.tmin_f,
            })
            .collect();
        let values = interpolate_missing_with_max_gap(&column, options.max_gap).map_err(|e| {
            match e {
                GapError::Boundary(i) => IngestError::BoundaryMissing {
                    element: element.code(),
                    date: obs[i].date,
                },
                GapError::Run { start, len } => IngestError::UnsupportedGap {
                    element: element.code(),
                    dates: obs[start..start + len].iter().map(|o| o.date).collect(),
                },
            }
        })?;
        interpolated.extend(
            column
                .iter()
                .zip(&obs)
                .filter(|(v, _)| v.is_none())
                .map(|(_, o)| (o.date, element)),
        );
        filled[k] = values;
    }
    interpolated.sort();

    for (i, o) in obs.iter_mut().enumerate() {
        let (mut hi, mut lo) = (filled[0][i], filled[1][i]);
        // A filled value can land on the wrong side of an observed partner;
        // pin it to the observation rather than invent an inversion.
        if hi < lo {
            match (o.tmax_f, o.tmin_f) {
                (None, Some(_)) => hi = lo,
                (Some(_), None) => lo = hi,
                _ => {}
            }
        }
        o.tmax_f = Some(hi);
        o.tmin_f = Some(lo);
    }

    Ok(IngestedStation {
        observations: obs,
        interpolated,
        inversions,
        qc_rejected,
    })
}
