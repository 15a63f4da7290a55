use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{OutputFormat, RunConfig, SweepAxis};
use crate::error::{CliError, Result};
use crate::experiments::{run, ExperimentResult, Provenance, SCHEMA_VERSION};
use crate::output::{csv_bytes, json_bytes, sidecar_path, write_file};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub result: ExperimentResult,
}

#[derive(Debug)]
pub struct SweepFailure {
    pub completed: Vec<(usize, f64)>,
    pub failed: (usize, f64),
    pub error: CliError,
}

/// Runs `template` once per value of `axis`. Points are computed in
/// parallel but returned in axis order. Every point is validated before any
/// computation starts.
pub fn sweep(template: &RunConfig, axis: SweepAxis, values: &[f64]) -> std::result::Result<Vec<SweepPoint>, SweepFailure> {
    let mut configs = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        let checked = axis.apply(template, v).and_then(|c| c.validate().map(|_| c));
        match checked {
            Ok(c) => configs.push(c),
            Err(error) => {
                return Err(SweepFailure {
                    completed: Vec::new(),
                    failed: (i, v),
                    error,
                })
            }
        }
    }
    let outcomes: Vec<Result<ExperimentResult>> = configs.par_iter().map(run).collect();
    let mut points = Vec::with_capacity(values.len());
    let mut first_error = None;
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(result) => points.push(SweepPoint {
                index: i,
                value: values[i],
                result,
            }),
            Err(e) => {
                first_error.get_or_insert((i, e));
            }
        }
    }
    match first_error {
        None => Ok(points),
        Some((i, error)) => Err(SweepFailure {
            completed: points.iter().map(|p| (p.index, p.value)).collect(),
            failed: (i, values[i]),
            error,
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub value: f64,
    pub warnings: Vec<String>,
    pub summary: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub schema_version: u32,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub config: RunConfig,
    /// Columns of each point's table, without the leading axis column.
    pub columns: Vec<String>,
    pub provenance: Provenance,
    pub points: Vec<PointRecord>,
}

/// Writes the combined table (axis value as first column) and sidecar.
pub fn write_sweep(
    template: &RunConfig,
    axis: SweepAxis,
    values: &[f64],
    points: &[SweepPoint],
    path: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    let columns = points.first().map(|p| p.result.columns.clone()).unwrap_or_default();
    if let Some(p) = points.iter().find(|p| p.result.columns != columns) {
        return Err(CliError::config(
            "sweep.axis",
            format!("point {} produced a different column set", p.value),
        ));
    }
    let keep_rows = format == OutputFormat::Json;
    let record = SweepResult {
        schema_version: SCHEMA_VERSION,
        axis,
        values: values.to_vec(),
        config: template.clone(),
        columns: columns.clone(),
        provenance: Provenance::now(template.seed),
        points: points
            .iter()
            .map(|p| PointRecord {
                value: p.value,
                warnings: p.result.warnings.clone(),
                summary: p.result.summary.clone(),
                rows: if keep_rows { p.result.rows.clone() } else { Vec::new() },
            })
            .collect(),
    };
    match format {
        OutputFormat::Json => {
            write_file(path, &json_bytes(&record)?)?;
            Ok(vec![path.to_path_buf()])
        }
        OutputFormat::Csv => {
            let mut header = vec![axis.name().to_string()];
            header.extend(columns);
            let rows: Vec<Vec<f64>> = points
                .iter()
                .flat_map(|p| {
                    p.result.rows.iter().map(move |r| {
                        let mut row = vec![p.value];
                        row.extend(r);
                        row
                    })
                })
                .collect();
            write_file(path, &csv_bytes(&header, &rows)?)?;
            let side = sidecar_path(path);
            write_file(&side, &json_bytes(&record)?)?;
            Ok(vec![path.to_path_buf(), side])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletedPoint {
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialManifest {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub completed: Vec<CompletedPoint>,
    pub failed: CompletedPoint,
    pub error: String,
    pub exit_code: u8,
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.partial.json"))
}

pub fn write_manifest(axis: SweepAxis, values: &[f64], failure: &SweepFailure, path: &Path) -> Result<PathBuf> {
    let manifest = PartialManifest {
        axis,
        values: values.to_vec(),
        completed: failure
            .completed
            .iter()
            .map(|&(index, value)| CompletedPoint { index, value })
            .collect(),
        failed: CompletedPoint {
            index: failure.failed.0,
            value: failure.failed.1,
        },
        error: failure.error.to_string(),
        exit_code: failure.error.exit_code(),
    };
    let out = manifest_path(path);
    write_file(&out, &json_bytes(&manifest)?)?;
    Ok(out)
}
