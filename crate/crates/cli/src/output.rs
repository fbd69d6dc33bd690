//! CSV and manifest writers for a finished sweep.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use langevin_coupling::estimators::{ExperimentResult, ReplicaRecord};
use langevin_coupling::CouplingKind;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const REPLICAS_FILE: &str = "replicas.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

pub const REPLICA_HEADERS: [&str; 9] = [
    "kind",
    "eta",
    "replica",
    "alpha_hat",
    "summand_var",
    "asym_var_hat",
    "meet_fraction",
    "mean_sq_dist",
    "blowup",
];

pub const SUMMARY_HEADERS: [&str; 13] = [
    "kind",
    "eta",
    "status",
    "n_valid",
    "blowups",
    "alpha_hat",
    "se",
    "cross_var",
    "asym_var_hat",
    "summand_var",
    "meet_fraction",
    "mean_sq_dist",
    "n_steps",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

pub fn cell_status(cell: &ExperimentResult) -> &'static str {
    if cell.valid {
        "ok"
    } else {
        "invalid-blowups"
    }
}

fn sorted_cells(cells: &[ExperimentResult]) -> Vec<&ExperimentResult> {
    let mut v: Vec<&ExperimentResult> = cells.iter().collect();
    v.sort_by(|a, b| a.kind.cmp(&b.kind).then(a.eta.total_cmp(&b.eta)));
    v
}

fn csv_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn replica_row(r: &ReplicaRecord) -> Vec<String> {
    let mut row = vec![r.kind.to_string(), fmt_num(r.eta), r.replica.to_string()];
    match &r.estimate {
        Some(e) => row.extend([
            fmt_num(e.alpha_hat),
            fmt_num(e.summand_var),
            fmt_num(e.asym_var_hat),
            fmt_opt(e.meet_fraction),
            fmt_opt(e.mean_sq_dist),
            String::new(),
        ]),
        None => {
            row.extend(std::iter::repeat_n(String::new(), 5));
            row.push(r.blowup.clone().unwrap_or_default());
        }
    }
    row
}

/// One row per replica, sorted by `(kind, eta, replica)`.
pub fn write_replicas(path: &Path, cells: &[ExperimentResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(REPLICA_HEADERS)
        .map_err(|e| csv_err(path, e))?;
    for cell in sorted_cells(cells) {
        let mut records: Vec<&ReplicaRecord> = cell.records.iter().collect();
        records.sort_by_key(|r| r.replica);
        for r in records {
            w.write_record(replica_row(r))
                .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| csv_err(path, e))
}

/// One row per `(kind, eta)` cell.
pub fn write_summary(path: &Path, cells: &[ExperimentResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(SUMMARY_HEADERS)
        .map_err(|e| csv_err(path, e))?;
    for c in sorted_cells(cells) {
        w.write_record([
            c.kind.to_string(),
            fmt_num(c.eta),
            cell_status(c).to_string(),
            c.n_valid.to_string(),
            c.blowups.to_string(),
            fmt_num(c.alpha_hat),
            fmt_num(c.se),
            fmt_num(c.cross_var),
            fmt_num(c.asym_var_hat),
            fmt_num(c.summand_var),
            fmt_opt(c.meet_fraction),
            fmt_opt(c.mean_sq_dist),
            c.params.n_steps.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| csv_err(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellStatus {
    pub kind: CouplingKind,
    pub eta: f64,
    pub status: &'static str,
    pub n_valid: usize,
    pub blowups: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub version: &'static str,
    /// Seconds since the Unix epoch at which the run finished.
    pub timestamp: u64,
    pub cells: Vec<CellStatus>,
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig, cells: &[ExperimentResult]) -> Self {
        RunManifest {
            config: config.clone(),
            version: env!("CARGO_PKG_VERSION"),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            cells: sorted_cells(cells)
                .into_iter()
                .map(|c| CellStatus {
                    kind: c.kind,
                    eta: c.eta,
                    status: cell_status(c),
                    n_valid: c.n_valid,
                    blowups: c.blowups,
                })
                .collect(),
            files: [REPLICAS_FILE, SUMMARY_FILE, MANIFEST_FILE]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

/// Writes all three outputs into `dir` and returns their paths.
pub fn write_all(
    dir: &Path,
    config: &ExperimentConfig,
    cells: &[ExperimentResult],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let replicas = dir.join(REPLICAS_FILE);
    let summary = dir.join(SUMMARY_FILE);
    let manifest = dir.join(MANIFEST_FILE);
    write_replicas(&replicas, cells)?;
    write_summary(&summary, cells)?;
    let file = File::create(&manifest).map_err(|e| CliError::Io {
        path: manifest.clone(),
        source: e,
    })?;
    serde_json::to_writer_pretty(file, &RunManifest::new(config, cells))
        .map_err(|e| csv_err(&manifest, e))?;
    Ok(vec![replicas, summary, manifest])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_num(f64::NAN), "NaN");
    }
}
