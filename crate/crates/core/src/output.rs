//! CSV and JSON result files. Floats are written in shortest round-trip form
//! and JSON objects have sorted keys, so files are byte-stable for fixed inputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{AggregateCurve, TrialTrajectory};

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Serialize(format!("{}: {other:?}", path.display())),
    }
}

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `k,err_sq`
pub fn write_trajectory_csv(path: &Path, steps: &[(u64, f64)]) -> Result<()> {
    write_rows(
        path,
        &["k", "err_sq"],
        steps.iter().map(|(k, e)| vec![k.to_string(), e.to_string()]),
    )
}

/// `k,mean_err_sq,std`
pub fn write_curve_csv(path: &Path, curve: &AggregateCurve) -> Result<()> {
    write_rows(
        path,
        &["k", "mean_err_sq", "std"],
        curve
            .ks
            .iter()
            .zip(&curve.mean_err_sq)
            .zip(&curve.std_err_sq)
            .map(|((k, m), s)| vec![k.to_string(), m.to_string(), s.to_string()]),
    )
}

/// `k,err_sq,disagreement`: network-mean error and the edge-weighted
/// disagreement, both averaged over trials.
pub fn write_network_csv(path: &Path, mean: &AggregateCurve, disagreement: &AggregateCurve) -> Result<()> {
    write_rows(
        path,
        &["k", "err_sq", "disagreement"],
        mean.ks
            .iter()
            .zip(&mean.mean_err_sq)
            .zip(&disagreement.mean_err_sq)
            .map(|((k, m), d)| vec![k.to_string(), m.to_string(), d.to_string()]),
    )
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Serialize(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `trial_<t>.csv` for every trial; returns the paths.
pub fn write_trials(dir: &Path, trials: &[TrialTrajectory]) -> Result<Vec<PathBuf>> {
    trials
        .iter()
        .enumerate()
        .map(|(t, tr)| {
            let p = dir.join(format!("trial_{t}.csv"));
            write_trajectory_csv(&p, &tr.steps)?;
            Ok(p)
        })
        .collect()
}
