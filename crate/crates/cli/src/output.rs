//! Artifact schemas. CSV headers are written explicitly so an empty grid
//! still yields a header-only file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::manifest::write_atomic;

pub const DECODE_SWEEP_CSV: &str = "decode_sweep.csv";
pub const DECODE_CROSSING_JSON: &str = "decode_crossing.json";
pub const MC_RUN_CSV: &str = "mc_run.csv";
pub const FSS_JSON: &str = "fss.json";
pub const PHASE_DIAGRAM_CSV: &str = "phase_diagram.csv";
pub const RATES_JSON: &str = "rates.json";
pub const SAMPLE_JSON: &str = "sample.json";
pub const REPORT_JSON: &str = "report.json";

pub const DECODE_HEADER: [&str; 8] = ["d", "p", "q", "r", "trials", "failures", "rate", "stderr"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeRow {
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    pub stderr: f64,
}

pub const MC_HEADER: [&str; 14] = [
    "case",
    "p",
    "q",
    "r",
    "l",
    "temperature",
    "xi_over_l",
    "xi_err",
    "g0",
    "gq",
    "metropolis_acceptance",
    "swap_acceptance",
    "samples",
    "invalid_samples",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub case: String,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub l: usize,
    pub temperature: f64,
    pub xi_over_l: f64,
    pub xi_err: f64,
    /// Sample-averaged `G(0)` and `G(q)`.
    pub g0: f64,
    pub gq: f64,
    pub metropolis_acceptance: f64,
    /// Exchange rate with the next warmer temperature; empty on the last.
    pub swap_acceptance: Option<f64>,
    pub samples: usize,
    pub invalid_samples: usize,
}

pub const PHASE_HEADER: [&str; 4] = ["case", "p", "t_c", "err"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub case: String,
    pub p: f64,
    pub t_c: f64,
    pub err: f64,
}

/// Serializes `rows` under `header`; returns the row count.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> CliResult<usize> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| crate::error::CliError::Internal(format!("csv buffer: {e}")))?;
    write_atomic(path, &bytes)?;
    Ok(rows.len())
}

/// Reads a CSV whose header must equal `header`.
pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path, header: &[&str]) -> CliResult<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(crate::error::CliError::user(format!(
            "{}: unexpected header {found:?}, want {header:?}",
            path.display()
        )));
    }
    r.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| crate::error::CliError::user(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}
