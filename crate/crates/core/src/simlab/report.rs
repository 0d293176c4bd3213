//! Long-format experiment reports: CSV plus a JSON metadata sidecar.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub const CSV_HEADER: [&str; 6] = ["experiment", "grid_key", "grid_value", "stat", "value", "se"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub experiment: String,
    pub grid_key: String,
    pub grid_value: String,
    pub stat: String,
    pub value: f64,
    pub se: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub experiment: String,
    pub seed: u64,
    pub crate_version: String,
    pub wall_time_secs: f64,
    pub config: serde_json::Value,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub metadata: ReportMetadata,
}

impl ExperimentReport {
    pub fn new(experiment: &str, seed: u64, config: serde_json::Value) -> Self {
        ExperimentReport {
            rows: Vec::new(),
            metadata: ReportMetadata {
                experiment: experiment.to_string(),
                seed,
                crate_version: env!("CARGO_PKG_VERSION").to_string(),
                wall_time_secs: 0.0,
                config,
                notes: Vec::new(),
            },
        }
    }

    pub fn push(&mut self, grid_key: &str, grid_value: &str, stat: &str, value: f64, se: Option<f64>) {
        self.rows.push(ReportRow {
            experiment: self.metadata.experiment.clone(),
            grid_key: grid_key.to_string(),
            grid_value: grid_value.to_string(),
            stat: stat.to_string(),
            value,
            se,
        });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        let note = note.into();
        if !self.metadata.notes.contains(&note) {
            self.metadata.notes.push(note);
        }
    }

    /// Rows matching `stat`, in report order.
    pub fn stat(&self, stat: &str) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.stat == stat).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            let se = r.se.map(format_value).unwrap_or_default();
            w.write_record([&r.experiment, &r.grid_key, &r.grid_value, &r.stat, &format_value(r.value), &se])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

/// Sidecar path: `report.csv` -> `report.meta.json`.
pub fn metadata_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

/// Writes the CSV to `path` and the metadata to the sidecar next to it.
pub fn emit_report(report: &ExperimentReport, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    report.write_csv(&mut out)?;
    out.flush()?;
    let meta = BufWriter::new(File::create(metadata_path(path))?);
    serde_json::to_writer_pretty(meta, &report.metadata)?;
    Ok(())
}
