//! HTTP client for the GHCN-daily archive with an on-disk cache.
//!
//! Payloads are cached as `<cache_dir>/<station_id>.dly` together with a
//! `<station_id>.dly.sha256` digest. Files are written to a temporary name and
//! renamed into place so concurrent readers never see a partial payload.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use log::{debug, warn};
use sha2::{Digest, Sha256};

use crate::error::FetchError;

/// Default archive location of the per-station `.dly` files.
pub const DEFAULT_ENDPOINT: &str = "https://www.ncei.noaa.gov/pub/data/ghcn/daily/all";
/// Environment variable overriding the archive endpoint.
pub const ENDPOINT_ENV: &str = "DTR_GHCN_ENDPOINT";
/// Environment variable overriding the cache directory.
pub const CACHE_ENV: &str = "DTR_GHCN_CACHE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FetchMode {
    /// Serve from cache when present, otherwise download.
    #[default]
    CacheFirst,
    /// Always download; fall back to the cache if the download fails.
    Refresh,
    /// Never touch the network.
    Offline,
}

/// Where a payload came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Cache,
    Network,
}

#[derive(Debug, Clone)]
pub struct Fetched {
    pub bytes: Vec<u8>,
    pub source: Source,
    /// Set when a cached copy existed but did not match its digest or the
    /// freshly downloaded payload.
    pub integrity_warning: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Fetcher {
    pub endpoint: String,
    pub cache_dir: PathBuf,
    pub mode: FetchMode,
    pub timeout: Duration,
}

impl Fetcher {
    pub fn new(endpoint: impl Into<String>, cache_dir: impl Into<PathBuf>) -> Self {
        Fetcher {
            endpoint: endpoint.into(),
            cache_dir: cache_dir.into(),
            mode: FetchMode::CacheFirst,
            timeout: Duration::from_secs(60),
        }
    }

    pub fn with_mode(mut self, mode: FetchMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn url_for(&self, station_id: &str) -> String {
        format!("{}/{}.dly", self.endpoint.trim_end_matches('/'), station_id)
    }

    pub fn cache_path(&self, station_id: &str) -> PathBuf {
        self.cache_dir.join(format!("{station_id}.dly"))
    }

    fn digest_path(&self, station_id: &str) -> PathBuf {
        self.cache_dir.join(format!("{station_id}.dly.sha256"))
    }

    /// Return the `.dly` payload for `station_id`.
    pub fn fetch_station(&self, station_id: &str) -> Result<Fetched, FetchError> {
        let io_err = |source| FetchError::Io {
            station: station_id.to_string(),
            source,
        };
        let cached = self.read_cache(station_id).map_err(io_err)?;

        match self.mode {
            FetchMode::Offline => match cached {
                Some((bytes, warning)) => Ok(Fetched {
                    bytes,
                    source: Source::Cache,
                    integrity_warning: warning,
                }),
                None => Err(FetchError::NotCached {
                    station: station_id.to_string(),
                }),
            },
            FetchMode::CacheFirst => match cached {
                Some((bytes, None)) => {
                    debug!("{station_id}: cache hit");
                    Ok(Fetched {
                        bytes,
                        source: Source::Cache,
                        integrity_warning: None,
                    })
                }
                Some((_, Some(warning))) => {
                    warn!("{station_id}: {warning}; downloading a fresh copy");
                    let bytes = self.download(station_id)?;
                    self.write_cache(station_id, &bytes).map_err(io_err)?;
                    Ok(Fetched {
                        bytes,
                        source: Source::Network,
                        integrity_warning: Some(warning),
                    })
                }
                None => {
                    let bytes = self.download(station_id)?;
                    self.write_cache(station_id, &bytes).map_err(io_err)?;
                    Ok(Fetched {
                        bytes,
                        source: Source::Network,
                        integrity_warning: None,
                    })
                }
            },
            FetchMode::Refresh => match self.download(station_id) {
                Ok(bytes) => {
                    let warning = match &cached {
                        Some((old, _)) if old != &bytes => Some(format!(
                            "cached payload ({} bytes, sha256 {}) differs from archive ({} bytes, sha256 {})",
                            old.len(),
                            sha256_hex(old),
                            bytes.len(),
                            sha256_hex(&bytes)
                        )),
                        Some((_, w)) => w.clone(),
                        None => None,
                    };
                    if let Some(w) = &warning {
                        warn!("{station_id}: {w}; keeping the fresh payload");
                    }
                    self.write_cache(station_id, &bytes).map_err(io_err)?;
                    Ok(Fetched {
                        bytes,
                        source: Source::Network,
                        integrity_warning: warning,
                    })
                }
                Err(e) => match cached {
                    Some((bytes, warning)) => {
                        warn!("{station_id}: download failed ({e}); using cached copy");
                        Ok(Fetched {
                            bytes,
                            source: Source::Cache,
                            integrity_warning: warning,
                        })
                    }
                    None => Err(e),
                },
            },
        }
    }

    /// Cached bytes plus an integrity warning when the digest sidecar is
    /// missing or disagrees.
    fn read_cache(&self, station_id: &str) -> std::io::Result<Option<(Vec<u8>, Option<String>)>> {
        let path = self.cache_path(station_id);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e),
        };
        let actual = sha256_hex(&bytes);
        let warning = match fs::read_to_string(self.digest_path(station_id)) {
            Ok(expected) if expected.trim() == actual => None,
            Ok(expected) => Some(format!(
                "cache digest mismatch for {} (recorded {}, actual {actual})",
                path.display(),
                expected.trim()
            )),
            // A hand-placed cache file without a sidecar is trusted.
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(e),
        };
        Ok(Some((bytes, warning)))
    }

    fn write_cache(&self, station_id: &str, bytes: &[u8]) -> std::io::Result<()> {
        fs::create_dir_all(&self.cache_dir)?;
        write_atomic(&self.cache_path(station_id), bytes)?;
        write_atomic(&self.digest_path(station_id), sha256_hex(bytes).as_bytes())
    }

    fn download(&self, station_id: &str) -> Result<Vec<u8>, FetchError> {
        let url = self.url_for(station_id);
        debug!("GET {url}");
        let agent = ureq::AgentBuilder::new().timeout(self.timeout).build();
        match agent.get(&url).call() {
            Ok(resp) => {
                let mut bytes = Vec::new();
                resp.into_reader()
                    .read_to_end(&mut bytes)
                    .map_err(|e| FetchError::Transport {
                        station: station_id.to_string(),
                        message: e.to_string(),
                    })?;
                Ok(bytes)
            }
            Err(ureq::Error::Status(status, _)) => Err(FetchError::Status {
                station: station_id.to_string(),
                status,
            }),
            Err(e) => Err(FetchError::Transport {
                station: station_id.to_string(),
                message: e.to_string(),
            }),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Write to a sibling temporary file, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
