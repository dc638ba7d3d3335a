//! Random effects datasets on disk: `dataset.csv` with columns
//! `subject,replicate,y` (0-based indices) and a TOML `dataset.meta` sidecar.

use std::path::Path;

use cmh_core::models::{simulate_re_data, GeneratingHyper, ReDataset, SimulatedReData};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const DATASET_FILE: &str = "dataset.csv";
pub const META_FILE: &str = "dataset.meta";

/// Provenance of a simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub subjects: usize,
    pub replicates: usize,
    pub seed: u64,
    pub generating: GeneratingHyper,
    pub true_theta: Vec<f64>,
    pub true_mu: f64,
    pub true_lambda_theta: f64,
    pub true_lambda_e: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    subject: usize,
    replicate: usize,
    y: f64,
}

/// Simulates a dataset and records how it was produced.
pub fn simulate(
    subjects: usize,
    replicates: usize,
    hyper: &GeneratingHyper,
    seed: u64,
) -> Result<(SimulatedReData, DatasetMeta)> {
    let sim = simulate_re_data(subjects, replicates, hyper, seed)?;
    let meta = DatasetMeta {
        subjects,
        replicates,
        seed,
        generating: *hyper,
        true_theta: sim.truth.theta.clone(),
        true_mu: sim.truth.mu,
        true_lambda_theta: sim.truth.lambda_theta,
        true_lambda_e: sim.truth.lambda_e,
    };
    Ok((sim, meta))
}

/// Writes observations at full round-trip precision.
pub fn write_dataset(path: &Path, data: &ReDataset) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for (subject, ys) in data.observations().iter().enumerate() {
        for (replicate, &y) in ys.iter().enumerate() {
            writer.serialize(Row { subject, replicate, y })?;
        }
    }
    writer.flush().map_err(|source| HarnessError::Write {
        path: path.to_owned(),
        source,
    })
}

pub fn write_meta(path: &Path, meta: &DatasetMeta) -> Result<()> {
    let text = toml::to_string(meta).map_err(|e| HarnessError::Config(e.to_string()))?;
    std::fs::write(path, text).map_err(|source| HarnessError::Write {
        path: path.to_owned(),
        source,
    })
}

pub fn read_meta(path: &Path) -> Result<DatasetMeta> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Read {
        path: path.to_owned(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| HarnessError::Dataset {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

/// Reads a balanced dataset; every (subject, replicate) cell must appear exactly once.
pub fn read_dataset(path: &Path) -> Result<ReDataset> {
    let malformed = |message: String| HarnessError::Dataset {
        path: path.to_owned(),
        message,
    };
    let file = std::fs::File::open(path).map_err(|source| HarnessError::Read {
        path: path.to_owned(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(file);
    let mut rows = Vec::new();
    for row in reader.deserialize::<Row>() {
        rows.push(row.map_err(|e| malformed(e.to_string()))?);
    }
    if rows.is_empty() {
        return Err(malformed("no observations".into()));
    }
    let subjects = rows.iter().map(|r| r.subject).max().unwrap_or(0) + 1;
    let replicates = rows.iter().map(|r| r.replicate).max().unwrap_or(0) + 1;
    if rows.len() != subjects * replicates {
        return Err(malformed(format!(
            "{} rows do not form a balanced {subjects} x {replicates} layout",
            rows.len()
        )));
    }
    let mut y = vec![vec![f64::NAN; replicates]; subjects];
    for r in rows {
        let cell = &mut y[r.subject][r.replicate];
        if !cell.is_nan() {
            return Err(malformed(format!("duplicate cell ({}, {})", r.subject, r.replicate)));
        }
        *cell = r.y;
    }
    if y.iter().flatten().any(|v| v.is_nan()) {
        return Err(malformed("missing or non-numeric observations".into()));
    }
    ReDataset::new(y).map_err(|e| malformed(e.to_string()))
}
