use chrono::NaiveDate;
use thiserror::Error;

/// Errors raised while reading and repairing GHCN-daily records.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: expected {expected} characters, found {found}")]
    LineLength { line: usize, expected: usize, found: usize },
    #[error("line {line}: non-ASCII content")]
    NotAscii { line: usize },
    #[error("line {line}: invalid {field} field {text:?}")]
    Field { line: usize, field: &'static str, text: String },
    #[error("line {line}: month {month} out of range")]
    Month { line: usize, month: u32 },
    #[error("line {line}: day {day} lies beyond the end of {year}-{month:02} but is not the missing sentinel")]
    BeyondMonthEnd { line: usize, year: i32, month: u32, day: usize },
    #[error("line {line}: duplicate {element} record for {year}-{month:02}")]
    Duplicate { line: usize, element: String, year: i32, month: u32 },
    #[error("{element} missing at window boundary {date}")]
    BoundaryMissing { element: &'static str, date: NaiveDate },
    #[error("{element} has an unsupported gap of {} consecutive days: {}", .dates.len(), join_dates(.dates))]
    UnsupportedGap { element: &'static str, dates: Vec<NaiveDate> },
}

/// Errors from the fixed-length gap filler, in index space.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GapError {
    #[error("missing value at boundary index {0}")]
    Boundary(usize),
    #[error("run of {len} missing values starting at index {start}")]
    Run { start: usize, len: usize },
}

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("fetching {station}: HTTP status {status}")]
    Status { station: String, status: u16 },
    #[error("fetching {station}: {message}")]
    Transport { station: String, message: String },
    #[error("{station} is not cached and network access is disabled")]
    NotCached { station: String },
    #[error("cache I/O for {station}: {source}")]
    Io {
        station: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("no observations")]
    Empty,
    #[error("dates are not contiguous: {after} is followed by {next}")]
    Gap { after: NaiveDate, next: NaiveDate },
    #[error("observation for {0} has a missing value")]
    Incomplete(NaiveDate),
    #[error("observations do not cover the window {start}..={end}")]
    Window { start: NaiveDate, end: NaiveDate },
    #[error("daily maximum below minimum on {}", join_dates(.0))]
    Inversion(Vec<NaiveDate>),
    #[error("series CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("series CSV row {row}: {message}")]
    CsvContent { row: usize, message: String },
}

/// Errors from least-squares fitting and inference.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegressionError {
    #[error("design has {nobs} observations for {k} regressors")]
    InsufficientData { nobs: usize, k: usize },
    #[error("design is rank deficient: column {0:?} is linearly dependent on earlier columns")]
    Singular(String),
    #[error("column {name:?} has length {found}, expected {expected}")]
    ColumnLength { name: String, expected: usize, found: usize },
    #[error("duplicate column name {0:?}")]
    DuplicateName(String),
    #[error("response has length {found}, expected {expected}")]
    ResponseLength { expected: usize, found: usize },
    #[error("HAC bandwidth {bandwidth} must be below the sample size {nobs}")]
    Bandwidth { bandwidth: usize, nobs: usize },
    #[error("unknown coefficient {0:?}")]
    UnknownCoefficient(String),
    #[error("fit has no HAC covariance")]
    NoCovariance,
    #[error("restricted covariance block is singular for {0:?}")]
    Degenerate(Vec<String>),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("no data")]
    Empty,
    #[error("data have zero spread; supply an explicit bandwidth")]
    DegenerateBandwidth,
    #[error("bandwidth must be positive and finite, got {0}")]
    Bandwidth(f64),
    #[error("at least two grid points are required, got {0}")]
    Grid(usize),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate airport code {0}")]
    DuplicateStation(String),
    #[error("window start {start} is not before end {end}")]
    Window { start: NaiveDate, end: NaiveDate },
    #[error("no stations configured")]
    NoStations,
    #[error("unknown station {0}")]
    UnknownStation(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Errors from the model layer.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error("series of length {0} is too short for this model")]
    TooShort(usize),
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error("only {ok} of {requested} stations succeeded; the median row needs at least {needed}")]
    TooFewRows { ok: usize, requested: usize, needed: usize },
}

fn join_dates(dates: &[NaiveDate]) -> String {
    dates
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
