//! Trace CSV and result JSON.

use std::fs;
use std::path::Path;

use balanced::iteration::{IterationTrace, RunResult};
use balanced::Problem;
use serde::{Deserialize, Serialize};

use crate::init::gram_to_pairs;
use crate::{CliError, Result};

pub const TRACE_COLUMNS: [&str; 7] = ["step", "z_tilde", "log_det", "det_ratio", "trace_residual", "spread", "delta"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureInfo {
    pub order: usize,
    pub nodes: usize,
    pub eps_quad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub classification: String,
    pub iterations: usize,
    pub final_gram: Vec<[f64; 2]>,
    pub bergman_sup_residual: Option<f64>,
    pub quadrature: QuadratureInfo,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<String>,
}

impl ResultFile {
    pub fn new(result: &RunResult, problem: &Problem) -> Self {
        Self {
            classification: result.classification.to_string(),
            iterations: result.iterations,
            final_gram: gram_to_pairs(result.final_gram.gram()),
            bergman_sup_residual: result.bergman_sup_residual,
            quadrature: QuadratureInfo {
                order: problem.scheme.order(),
                nodes: problem.scheme.len(),
                eps_quad: problem.eps_quad(),
            },
            failure: result.failure.clone(),
        }
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir)
            .map_err(|source| CliError::Write { path: dir.display().to_string(), source }),
        _ => Ok(()),
    }
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the trace with 17 significant digits per float.
pub fn write_trace_csv(path: &Path, trace: &IterationTrace) -> Result<()> {
    ensure_parent(path)?;
    let err = |e: csv::Error| CliError::Write { path: path.display().to_string(), source: e.into() };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(TRACE_COLUMNS).map_err(err)?;
    for s in &trace.steps {
        w.write_record([
            s.step.to_string(),
            fmt_float(s.z_tilde),
            fmt_float(s.log_det),
            fmt_float(s.det_ratio),
            fmt_float(s.trace_residual),
            fmt_float(s.spread),
            fmt_float(s.delta),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|source| CliError::Write { path: path.display().to_string(), source })
}

pub fn write_result_json(path: &Path, result: &ResultFile) -> Result<()> {
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(result).expect("result serializes");
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Write { path: path.display().to_string(), source })
}

/// Column `name` of a trace CSV, parsed as floats.
pub fn read_trace_column(path: &Path, name: &str) -> Result<Vec<f64>> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let idx = r
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| bad(format!("no column `{name}`")))?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            rec[idx].parse::<f64>().map_err(|e| bad(e.to_string()))
        })
        .collect()
}
