//! CSV and NDJSON emission for study results.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// One measurement row; every row carries seed and grid provenance.
#[derive(Debug, Clone, Serialize)]
pub struct CsvRow {
    pub quantity: String,
    pub parameter: f64,
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub seed_range: String,
    pub grid: String,
}

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(io_of_csv)?;
    for row in rows {
        w.serialize(row).map_err(io_of_csv)?;
    }
    w.flush()?;
    Ok(())
}

fn io_of_csv(e: csv::Error) -> crate::error::RippleError {
    crate::error::RippleError::Io(std::io::Error::other(e))
}

/// Appends one JSON document per line.
pub fn write_ndjson<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)?;
    for item in items {
        let line = serde_json::to_string(item)
            .map_err(|e| crate::error::RippleError::Io(std::io::Error::other(e)))?;
        writeln!(f, "{line}")?;
    }
    Ok(())
}

pub fn study_file(dir: &Path, kind: &str, name: &str) -> PathBuf {
    dir.join(format!("{kind}_{name}"))
}
