//! `manifest.json`: per-station ingest outcome. This is the only output
//! file that carries a timestamp.

use std::path::Path;

use anyhow::Result;
use serde::Serialize;

use dtr_core::config::{RunConfig, Station};

#[derive(Debug, Serialize)]
pub struct StationEntry {
    pub code: String,
    pub ghcn_id: String,
    pub name: String,
    pub status: String,
    pub rows: usize,
    pub source: Option<String>,
    pub sha256: Option<String>,
    pub integrity_warning: Option<String>,
    /// "TMAX 1996-09-15" style entries.
    pub interpolated: Vec<String>,
    pub inversions: Vec<String>,
    pub qc_rejected: usize,
    pub message: Option<String>,
}

impl StationEntry {
    pub fn new(st: &Station) -> Self {
        StationEntry {
            code: st.code.clone(),
            ghcn_id: st.ghcn_id.clone(),
            name: st.name.clone(),
            status: "pending".into(),
            rows: 0,
            source: None,
            sha256: None,
            integrity_warning: None,
            interpolated: Vec::new(),
            inversions: Vec::new(),
            qc_rejected: 0,
            message: None,
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    generated_at: String,
    window_start: String,
    window_end: String,
    strict_qc: bool,
    max_gap: usize,
    endpoint: &'a str,
    stations: &'a [StationEntry],
}

pub fn write(path: &Path, cfg: &RunConfig, entries: &[StationEntry]) -> Result<()> {
    let m = Manifest {
        generated_at: chrono::Utc::now().to_rfc3339(),
        window_start: cfg.window.start.to_string(),
        window_end: cfg.window.end.to_string(),
        strict_qc: cfg.strict_qc,
        max_gap: cfg.max_gap,
        endpoint: &cfg.endpoint,
        stations: entries,
    };
    let mut text = serde_json::to_string_pretty(&m)?;
    text.push('\n');
    dtr_core::fetch::write_atomic(path, text.as_bytes())?;
    Ok(())
}
