use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::Value;

use super::CliError;

/// Decimal scientific notation with 15 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.14e}")
}

pub fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io { path: path.display().to_string(), message: e.to_string() }
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    if !header.is_empty() {
        w.write_record(header).map_err(|e| io_error(path, e))?;
    }
    for row in rows {
        w.write_record(row).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| fmt_num(m[(i, j)])).collect()).collect();
    write_csv(path, &[], &rows)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Wall-clock seconds per named phase.
#[derive(Default)]
pub struct Timings {
    phases: BTreeMap<String, f64>,
}

impl Timings {
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.phases.entry(phase.to_owned()).or_default() += start.elapsed().as_secs_f64();
        out
    }

    pub fn add(&mut self, phase: &str, seconds: f64) {
        *self.phases.entry(phase.to_owned()).or_default() += seconds;
    }
}

/// Common JSON report envelope. `timings` holds every wall-clock figure so
/// the rest of the report is reproducible from the same flags and seed.
#[derive(Serialize)]
pub struct Report {
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
    pub seed: u64,
    pub jitter: Value,
    pub results: Value,
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: &'static str, config: &impl Serialize, seed: u64) -> Result<Self, CliError> {
        Ok(Report {
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: serde_json::to_value(config).map_err(|e| CliError::Usage(e.to_string()))?,
            seed,
            jitter: Value::Null,
            results: Value::Null,
            timings: BTreeMap::new(),
        })
    }

    pub fn finish(mut self, jitter: impl Serialize, results: impl Serialize, timings: Timings) -> Result<Self, CliError> {
        self.jitter = serde_json::to_value(jitter).map_err(|e| CliError::Usage(e.to_string()))?;
        self.results = serde_json::to_value(results).map_err(|e| CliError::Usage(e.to_string()))?;
        self.timings = timings.phases;
        Ok(self)
    }
}
