//! Run configuration: a flat `key = value` file followed by a `[stations]`
//! block of `code | ghcn_id | name [| excluded]` lines.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::error::ConfigError;
use crate::fetch::{CACHE_ENV, DEFAULT_ENDPOINT, ENDPOINT_ENV};
use crate::ghcn::{DateWindow, IngestOptions};
use crate::linreg::Bandwidth;

/// The shipped station map.
pub const DEFAULT_CONFIG: &str = include_str!("../data/cme_cities.conf");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Station {
    pub code: String,
    pub ghcn_id: String,
    pub name: String,
    /// Skipped unless requested by code.
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub stations: Vec<Station>,
    pub window: DateWindow,
    pub hac_bandwidth: Bandwidth,
    pub output_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub strict_qc: bool,
    pub max_gap: usize,
    pub endpoint: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            stations: Vec::new(),
            window: DateWindow::new(
                NaiveDate::from_ymd_opt(1960, 1, 1).unwrap(),
                NaiveDate::from_ymd_opt(2017, 12, 31).unwrap(),
            ),
            hac_bandwidth: Bandwidth::Auto,
            output_dir: PathBuf::from("out"),
            cache_dir: PathBuf::from("cache"),
            strict_qc: false,
            max_gap: 1,
            endpoint: DEFAULT_ENDPOINT.to_string(),
        }
    }
}

impl RunConfig {
    pub fn shipped() -> Self {
        RunConfig::parse(DEFAULT_CONFIG).expect("shipped config parses")
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        RunConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut in_stations = false;
        let (mut start, mut end) = (cfg.window.start, cfg.window.end);

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: String| ConfigError::Syntax {
                line: line_no,
                message,
            };
            if line.starts_with('[') {
                if line.eq_ignore_ascii_case("[stations]") {
                    in_stations = true;
                    continue;
                }
                return Err(syntax(format!("unknown section {line}")));
            }
            if in_stations {
                let station = parse_station(line).map_err(syntax)?;
                if cfg.stations.iter().any(|s| s.code == station.code) {
                    return Err(ConfigError::DuplicateStation(station.code));
                }
                cfg.stations.push(station);
                continue;
            }

            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let date = |v: &str| {
                NaiveDate::parse_from_str(v, "%Y-%m-%d")
                    .map_err(|e| syntax(format!("{key}: {e}")))
            };
            match key {
                "window_start" => start = date(value)?,
                "window_end" => end = date(value)?,
                "hac_bandwidth" => cfg.hac_bandwidth = value.parse().map_err(syntax)?,
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "cache_dir" => cfg.cache_dir = PathBuf::from(value),
                "endpoint" => cfg.endpoint = value.to_string(),
                "strict_qc" => {
                    cfg.strict_qc = value
                        .parse()
                        .map_err(|_| syntax(format!("strict_qc must be true or false, got {value:?}")))?
                }
                "max_gap" => {
                    cfg.max_gap = value
                        .parse()
                        .map_err(|_| syntax(format!("max_gap must be an integer, got {value:?}")))?
                }
                other => return Err(syntax(format!("unknown key {other:?}"))),
            }
        }

        if start >= end {
            return Err(ConfigError::Window { start, end });
        }
        cfg.window = DateWindow::new(start, end);
        if cfg.stations.is_empty() {
            return Err(ConfigError::NoStations);
        }
        Ok(cfg)
    }

    /// Apply `DTR_GHCN_ENDPOINT` / `DTR_GHCN_CACHE` when set.
    pub fn apply_env(&mut self) {
        if let Ok(v) = std::env::var(ENDPOINT_ENV) {
            if !v.is_empty() {
                self.endpoint = v;
            }
        }
        if let Ok(v) = std::env::var(CACHE_ENV) {
            if !v.is_empty() {
                self.cache_dir = PathBuf::from(v);
            }
        }
    }

    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            strict_qc: self.strict_qc,
            max_gap: self.max_gap,
        }
    }

    pub fn station(&self, code: &str) -> Option<&Station> {
        self.stations.iter().find(|s| s.code.eq_ignore_ascii_case(code))
    }

    /// Stations to process: the named ones (excluded or not), or every
    /// non-excluded station when `codes` is empty. Config order is kept.
    pub fn select(&self, codes: &[String]) -> Result<Vec<&Station>, ConfigError> {
        if codes.is_empty() {
            return Ok(self.stations.iter().filter(|s| !s.excluded).collect());
        }
        for c in codes {
            if self.station(c).is_none() {
                return Err(ConfigError::UnknownStation(c.clone()));
            }
        }
        Ok(self
            .stations
            .iter()
            .filter(|s| codes.iter().any(|c| c.eq_ignore_ascii_case(&s.code)))
            .collect())
    }
}

fn parse_station(line: &str) -> Result<Station, String> {
    let parts: Vec<&str> = line.split('|').map(str::trim).collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(format!("station line needs code | id | name [| excluded], got {line:?}"));
    }
    let code = parts[0];
    if code.is_empty() || !code.chars().all(|c| c.is_ascii_alphanumeric()) {
        return Err(format!("invalid station code {code:?}"));
    }
    let id = parts[1];
    if id.len() != 11 || !id.is_ascii() {
        return Err(format!("GHCN id must be 11 ASCII characters, got {id:?}"));
    }
    let excluded = match parts.get(3) {
        None | Some(&"") => false,
        Some(&"excluded") => true,
        Some(other) => return Err(format!("unknown station flag {other:?}")),
    };
    Ok(Station {
        code: code.to_ascii_uppercase(),
        ghcn_id: id.to_string(),
        name: parts[2].to_string(),
        excluded,
    })
}
