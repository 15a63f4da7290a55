use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::OutputFormat;
use crate::error::{CliError, Result};
use crate::experiments::ExperimentResult;

/// Default output directory when no path is given.
pub const OUT_DIR_ENV: &str = "TRANSMON_OUT_DIR";

/// Shortest round-trip decimal; scientific notation outside `[1e-4, 1e15)`.
pub fn format_value(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn csv_bytes(columns: &[String], rows: &[Vec<f64>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Serialize(e.to_string());
    w.write_record(columns).map_err(err)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| format_value(x))).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| CliError::Serialize(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// `$TRANSMON_OUT_DIR/<stem>.<ext>`, or the working directory.
pub fn default_path(stem: &str, format: OutputFormat) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_default();
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    dir.join(format!("{stem}.{ext}"))
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Writes a result and returns the files created. CSV output carries the
/// table and a JSON sidecar with everything else; JSON output is a single
/// document including the rows.
pub fn write_result(result: &ExperimentResult, path: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    match format {
        OutputFormat::Csv => {
            let side = sidecar_path(path);
            if side == path {
                return Err(CliError::config("output.path", "CSV output path must not end in .json"));
            }
            write_file(path, &csv_bytes(&result.columns, &result.rows)?)?;
            let mut meta = result.clone();
            meta.rows.clear();
            write_file(&side, &json_bytes(&meta)?)?;
            Ok(vec![path.to_path_buf(), side])
        }
        OutputFormat::Json => {
            write_file(path, &json_bytes(result)?)?;
            Ok(vec![path.to_path_buf()])
        }
    }
}
