//! Per-iteration metrics as CSV, with a JSON provenance sidecar.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// One CSV row. Column names are exactly the field names, in this order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub t: usize,
    pub free_energy_per_volume: f64,
    pub free_energy_per_basis: f64,
    pub hartree_energy_per_volume: f64,
    pub electrons_per_volume: f64,
    /// Only with dense validation.
    pub rel_density_error: Option<f64>,
    pub step_gamma: f64,
    /// Seconds for the batch of sqrt-FD matvecs; recorded on timing
    /// iterations only.
    pub wall_time_matvec_batch: Option<f64>,
    pub solver_iterations_max: usize,
    /// Error of the gold-standard estimator at the same sample count.
    pub gold_rel_density_error: Option<f64>,
}

pub const HEADER: [&str; 10] = [
    "t",
    "free_energy_per_volume",
    "free_energy_per_basis",
    "hartree_energy_per_volume",
    "electrons_per_volume",
    "rel_density_error",
    "step_gamma",
    "wall_time_matvec_batch",
    "solver_iterations_max",
    "gold_rel_density_error",
];

/// Streams records to a CSV file. The header is written up front, so an
/// empty run still leaves a well-formed file.
pub struct MetricsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl MetricsWriter<BufWriter<File>> {
    pub fn create(path: &Path) -> Result<Self, HarnessError> {
        Self::new(BufWriter::new(File::create(path)?))
    }
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(out: W) -> Result<Self, HarnessError> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        inner.write_record(HEADER)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, record: &MetricsRecord) -> Result<(), HarnessError> {
        self.inner.serialize(record)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, HarnessError> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| HarnessError::Io(e.into_error()))
    }
}

pub fn write_metrics(records: &[MetricsRecord], path: &Path) -> Result<(), HarnessError> {
    let mut w = MetricsWriter::create(path)?;
    for r in records {
        w.write(r)?;
    }
    w.finish()?;
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRecord>, HarnessError> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header != HEADER {
        return Err(HarnessError::Config(format!("unexpected metrics header {header:?}")));
    }
    Ok(reader.deserialize().collect::<Result<_, _>>()?)
}

/// Provenance written next to the metrics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sidecar<C, S> {
    pub program: String,
    pub version: String,
    pub command: String,
    pub config: C,
    pub summary: S,
}

pub fn write_sidecar<C: Serialize, S: Serialize>(
    command: &str,
    config: &C,
    summary: &S,
    path: &Path,
) -> Result<(), HarnessError> {
    let sidecar = Sidecar {
        program: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config,
        summary,
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &sidecar)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}
