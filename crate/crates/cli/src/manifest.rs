//! Run manifests. A manifest is written with status `incomplete` before any
//! data and rewritten as `complete` (or `failed`) at the end, so an
//! interrupted run is recognizable from the manifest alone.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Incomplete,
    Complete,
    Failed,
}

/// One scheduled job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub path: String,
    pub seed: u64,
    pub attempts: u32,
}

/// Coupling data of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub magnitudes: [f64; 3],
    pub kappa_norm: Option<f64>,
    pub nishimori_temperature: Option<f64>,
    pub temperatures: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub status: Status,
    pub config_hash: String,
    pub config: RunConfig,
    pub workers: usize,
    pub started_unix: u64,
    pub wall_clock_s: Option<f64>,
    pub jobs: Vec<JobRecord>,
    pub grid: Vec<GridPoint>,
    /// Data rows per output file.
    pub outputs: BTreeMap<String, usize>,
    pub notes: Vec<String>,
}

pub fn manifest_path(out: &Path, command: &str) -> PathBuf {
    out.join(format!("manifest_{}.json", command.replace('-', "_")))
}

/// Live manifest of a running command.
pub struct ManifestWriter {
    path: PathBuf,
    started: Instant,
    pub manifest: Manifest,
}

impl ManifestWriter {
    pub fn begin(out: &Path, config: &RunConfig, workers: usize) -> CliResult<Self> {
        std::fs::create_dir_all(out)?;
        let command = config.command.name().to_owned();
        let manifest = Manifest {
            tool: "replab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.clone(),
            status: Status::Incomplete,
            config_hash: config.hash(),
            config: config.clone(),
            workers,
            started_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            wall_clock_s: None,
            jobs: Vec::new(),
            grid: Vec::new(),
            outputs: BTreeMap::new(),
            notes: Vec::new(),
        };
        let w = Self {
            path: manifest_path(out, &command),
            started: Instant::now(),
            manifest,
        };
        w.write()?;
        Ok(w)
    }

    pub fn write(&self) -> CliResult<()> {
        write_atomic(&self.path, &serde_json::to_vec_pretty(&self.manifest)?)
    }

    pub fn finish(mut self, status: Status) -> CliResult<Manifest> {
        self.manifest.status = status;
        self.manifest.wall_clock_s = Some(self.started.elapsed().as_secs_f64());
        self.write()?;
        Ok(self.manifest)
    }
}

/// Writes through a temporary file so readers never see a torn file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> CliResult<Manifest> {
    let bytes = std::fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| crate::error::CliError::user(format!("{}: {e}", path.display())))
}
