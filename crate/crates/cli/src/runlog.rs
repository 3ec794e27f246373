//! Append-only JSONL record of runs, used to detect whether a rerun
//! reproduced its earlier outputs.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliResult;

pub const RUN_LOG_ENV: &str = "SUMGAP_RUN_LOG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reproduction {
    /// No earlier run with this command and config hash.
    New,
    /// Same digests as the most recent earlier run.
    Match,
    Mismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    /// Seconds since the Unix epoch.
    pub started_at: f64,
    pub finished_at: f64,
    /// File name to sha256 hex digest.
    pub outputs: BTreeMap<String, String>,
    pub reproduction: Reproduction,
}

pub fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// `$SUMGAP_RUN_LOG` if set, else `<out_dir>/runlog.jsonl`.
pub fn log_path(out_dir: &Path) -> PathBuf {
    match std::env::var_os(RUN_LOG_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => out_dir.join("runlog.jsonl"),
    }
}

pub fn file_digest(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Compare against the latest earlier record with the same command and hash,
/// then append `record` with the verdict filled in.
pub fn append(path: &Path, mut record: RunRecord) -> CliResult<RunRecord> {
    let mut previous = None;
    if path.exists() {
        for line in BufReader::new(fs::File::open(path)?).lines() {
            let line = line?;
            // foreign or truncated lines are skipped, not fatal
            if let Ok(r) = serde_json::from_str::<RunRecord>(&line) {
                if r.command == record.command && r.config_hash == record.config_hash {
                    previous = Some(r.outputs);
                }
            }
        }
    }
    record.reproduction = match previous {
        None => Reproduction::New,
        Some(outputs) if outputs == record.outputs => Reproduction::Match,
        Some(_) => Reproduction::Mismatch,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = serde_json::to_string(&record).map_err(|e| crate::error::CliError::Internal(e.to_string()))?;
    line.push('\n');
    file.write_all(line.as_bytes())?;
    Ok(record)
}
