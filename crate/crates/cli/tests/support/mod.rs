//! Temporary run directories with synthetic cached stations, and a wrapper
//! around the built `dtr` binary.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use dtr_core::ghcn::DateWindow;

use crate::common::{synthetic_dly, ymd};

pub struct SyntheticStation {
    pub code: &'static str,
    pub ghcn_id: &'static str,
    pub seed: u64,
    /// Whether a cached `.dly` exists for it.
    pub cached: bool,
}

pub const fn station(code: &'static str, ghcn_id: &'static str, seed: u64) -> SyntheticStation {
    SyntheticStation {
        code,
        ghcn_id,
        seed,
        cached: true,
    }
}

pub struct Workspace {
    pub dir: TempDir,
}

pub fn window() -> DateWindow {
    DateWindow::new(ymd(1990, 1, 1), ymd(1994, 12, 31))
}

impl Workspace {
    pub fn new(stations: &[SyntheticStation]) -> Workspace {
        let dir = tempfile::tempdir().unwrap();
        let cache = dir.path().join("cache");
        fs::create_dir_all(&cache).unwrap();
        let w = window();
        let mut conf = format!(
            "window_start = {}\nwindow_end = {}\nhac_bandwidth = auto\noutput_dir = {}\ncache_dir = {}\n\
             endpoint = http://127.0.0.1:9\nmax_gap = 1\n\n[stations]\n",
            w.start,
            w.end,
            dir.path().join("out").display(),
            cache.display()
        );
        for s in stations {
            conf.push_str(&format!("{} | {} | Synthetic {}\n", s.code, s.ghcn_id, s.code));
            if s.cached {
                let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
                let holes = [(ymd(1991, 6, 11), "TMAX"), (ymd(1993, 2, 2), "TMIN")];
                let text = synthetic_dly(s.ghcn_id, w, &mut rng, &holes);
                fs::write(cache.join(format!("{}.dly", s.ghcn_id)), text).unwrap();
            }
        }
        fs::write(dir.path().join("run.conf"), conf).unwrap();
        Workspace { dir }
    }

    pub fn config(&self) -> PathBuf {
        self.dir.path().join("run.conf")
    }

    pub fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    /// Run `dtr --config <run.conf> <args>`.
    pub fn dtr(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_dtr"))
            .arg("--config")
            .arg(self.config())
            .args(args)
            .env("RUST_LOG", "warn")
            .env_remove("DTR_GHCN_CACHE")
            .env_remove("DTR_GHCN_ENDPOINT")
            .output()
            .unwrap()
    }

    pub fn dtr_ok(&self, args: &[&str]) -> Output {
        let out = self.dtr(args);
        assert!(
            out.status.success(),
            "dtr {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out
    }
}

/// Every file under `root` except the timestamped manifest, keyed by
/// relative path.
pub fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != "manifest.json" {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// The two-decimal cells of a text table row, stars stripped.
pub fn text_cells(line: &str) -> Vec<String> {
    line.split_whitespace()
        .map(|c| c.trim_end_matches('*').to_string())
        .collect()
}

/// Compare the display columns of the CSV and text renderings of a table.
/// Returns the number of rows compared.
pub fn tables_agree(csv: &str, text: &str) -> Result<usize, String> {
    let csv_rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let mut rows = 0;
    for c in &csv_rows {
        let line = text
            .lines()
            .find(|l| l.split_whitespace().next() == Some(c[0]))
            .ok_or_else(|| format!("row {} missing from text table", c[0]))?;
        let t = text_cells(line);
        let expected = [c[0], c[1], c[3], c[4], c[5], c[6], c[8]];
        if t.len() != expected.len() || t.iter().zip(expected).any(|(a, b)| a != b) {
            return Err(format!("row {}: text {t:?} vs csv {expected:?}", c[0]));
        }
        let star_cells = [(c[1], c[2]), (c[6], c[7])];
        for (value, star) in star_cells {
            let starred = line.split_whitespace().any(|cell| cell == format!("{value}*"));
            if star == "true" && !starred {
                return Err(format!("row {}: {value} should carry a star", c[0]));
            }
        }
        rows += 1;
    }
    Ok(rows)
}
