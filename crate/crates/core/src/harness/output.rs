//! CSV tables and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{MedianRow, RunRecord, SlopeRow};
use crate::error::{Error, Result};

/// Column set of run tables. Changing it is a schema change.
pub const RECORD_HEADER: [&str; 20] = [
    "config_hash",
    "label",
    "d",
    "n",
    "width",
    "seed_index",
    "seed",
    "epochs",
    "final_train_loss",
    "train_mse_vs_labels",
    "in_sample_mse",
    "holdout_mse",
    "generalization_gap",
    "final_sharpness",
    "clip_events",
    "sparse_share",
    "dead_share",
    "median_activation",
    "status",
    "schema",
];

const SCHEMA_VERSION: &str = "1";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn record_row(r: &RunRecord) -> Vec<String> {
    vec![
        r.config_hash.clone(),
        r.label.clone(),
        r.d.to_string(),
        r.n.to_string(),
        r.width.to_string(),
        r.seed_index.to_string(),
        r.seed.to_string(),
        r.epochs.to_string(),
        opt(r.final_train_loss),
        opt(r.train_mse_vs_labels),
        opt(r.in_sample_mse),
        opt(r.holdout_mse),
        opt(r.generalization_gap),
        opt(r.final_sharpness),
        opt(r.clip_events),
        opt(r.sparse_share),
        opt(r.dead_share),
        opt(r.median_activation),
        r.status.clone(),
        SCHEMA_VERSION.to_string(),
    ]
}

pub fn write_records(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record(record_row(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one record to its own file under `dir`, named after its cell.
pub fn write_cell_file(dir: &Path, record: &RunRecord) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(cell_file_name(record));
    write_records(&path, std::slice::from_ref(record))?;
    Ok(path)
}

fn cell_file_name(r: &RunRecord) -> String {
    format!("{}_d{}_n{}_s{}.csv", r.label, r.d, r.n, r.seed_index)
}

/// Concatenates the per-cell files of `records` (in that order) into `out`,
/// refusing files whose header differs from [`RECORD_HEADER`].
pub fn merge_cell_files(dir: &Path, records: &[RunRecord], out: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(RECORD_HEADER)?;
    for r in records {
        let path = dir.join(cell_file_name(r));
        let mut rd = csv::Reader::from_path(&path)?;
        let header = rd.headers()?.clone();
        if header.iter().ne(RECORD_HEADER.iter().copied()) {
            return Err(Error::Format(format!("{}: unexpected columns {header:?}", path.display())));
        }
        for row in rd.records() {
            w.write_record(&row?)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rows of a run table as raw strings, after a schema check.
pub fn read_records(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut rd = csv::Reader::from_path(path)?;
    let header = rd.headers()?.clone();
    if header.iter().ne(RECORD_HEADER.iter().copied()) {
        return Err(Error::Format(format!("{}: unexpected columns {header:?}", path.display())));
    }
    rd.records()
        .map(|r| Ok(r?.iter().map(str::to_string).collect()))
        .collect()
}

pub fn write_medians(path: &Path, rows: &[MedianRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["d", "n", "metric", "median", "runs"])?;
    for r in rows {
        w.write_record([r.d.to_string(), r.n.to_string(), r.metric.clone(), r.median.to_string(), r.runs.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_slopes(path: &Path, rows: &[SlopeRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["d", "metric", "slope", "intercept", "points"])?;
    for r in rows {
        w.write_record([
            r.d.to_string(),
            r.metric.clone(),
            r.slope.to_string(),
            r.intercept.to_string(),
            r.points.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

/// Description of one CLI invocation. Holds no timestamps or host details so
/// that reruns produce identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub package: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub outputs: Vec<OutputFile>,
}

impl Manifest {
    pub fn new<C: Serialize>(command: &str, seed: u64, config: &C) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        let hash_input = serde_json::json!({ "command": command, "seed": seed, "config": config });
        Ok(Self {
            command: command.to_string(),
            package: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config_hash: sha256_hex(hash_input.to_string().as_bytes()),
            config,
            outputs: Vec::new(),
        })
    }

    /// Records `path` (relative to `root`) with the hash of its current contents.
    pub fn add_output(&mut self, root: &Path, path: &Path) -> Result<()> {
        let bytes = fs::read(path)?;
        let rel = path.strip_prefix(root).unwrap_or(path);
        self.outputs.push(OutputFile {
            file: rel.to_string_lossy().replace('\\', "/"),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}
