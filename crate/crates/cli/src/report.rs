use std::fs::OpenOptions;
use std::path::Path;

use conflict_min::SelectionResult;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub path: String,
    /// Nodes and edges of the largest component actually used.
    pub n: usize,
    pub m: usize,
    /// How input ids were mapped to `0..n`.
    pub id_mapping: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub dataset: DatasetInfo,
    /// How unbounded opinion samples were mapped into `[0, 1]`.
    pub opinion_scaling: String,
    pub result: SelectionResult,
    pub delta_f: f64,
    /// `|Δf − Δf_ref| / Δf_ref` when a reference drop was supplied.
    pub gamma: Option<f64>,
    /// `f / n` before and after.
    pub polarization_index: (f64, f64),
}

impl RunReport {
    pub fn to_json(&self) -> Result<String, CliError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn table_header() -> String {
        format!(
            "{:<24} {:>8} {:>9} {:<11} {:<11} {:>4} {:>5} {:>6} {:>14} {:>10} {:>9}",
            "dataset", "n", "m", "method", "measure", "k", "eps", "seed", "delta_f", "gamma", "seconds"
        )
    }

    pub fn table_row(&self) -> String {
        let row = self.sweep_row();
        format!(
            "{:<24} {:>8} {:>9} {:<11} {:<11} {:>4} {:>5} {:>6} {:>14.6} {:>10} {:>9.3}",
            row.dataset,
            row.n,
            row.m,
            row.method,
            row.measure,
            row.k,
            row.epsilon,
            row.seed,
            row.delta_f,
            row.gamma.map(|g| format!("{g:.3e}")).unwrap_or_else(|| "-".into()),
            row.seconds
        )
    }

    pub fn sweep_row(&self) -> SweepRow {
        SweepRow {
            dataset: dataset_name(&self.dataset.path),
            n: self.dataset.n,
            m: self.dataset.m,
            method: self.result.method.to_string(),
            measure: self.result.measure.to_string(),
            k: self.result.k,
            epsilon: self.config.epsilon,
            seed: self.config.seed,
            delta_f: self.delta_f,
            gamma: self.gamma,
            seconds: self.result.elapsed_seconds,
        }
    }
}

pub(crate) fn dataset_name(path: &str) -> String {
    Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string())
}

/// One CSV line: `dataset,n,m,method,measure,k,epsilon,seed,delta_f,gamma,seconds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dataset: String,
    pub n: usize,
    pub m: usize,
    pub method: String,
    pub measure: String,
    pub k: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub delta_f: f64,
    pub gamma: Option<f64>,
    pub seconds: f64,
}

/// `|approx − reference| / reference`; undefined for a non-positive reference
/// unless both are equal.
pub fn relative_error(approx: f64, reference: f64) -> Option<f64> {
    if approx == reference {
        Some(0.0)
    } else if reference > 0.0 {
        Some((approx - reference).abs() / reference)
    } else {
        None
    }
}

/// Appends rows to `path`, writing the header only when the file is new or
/// empty.
pub fn append_csv(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut writer = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
