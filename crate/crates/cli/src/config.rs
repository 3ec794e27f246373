//! Experiment configuration: flags, an optional TOML file, and the merge rule
//! (flags win).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config_err, CliResult};

/// Every parameter any subcommand reads. Unused fields are ignored by the
/// command and still take part in the config hash.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Exponent s of the model.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    /// Upper limit N of the sampled range.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Number of trials (sequences, Monte Carlo draws, or systems).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Trial index for `sample`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial: Option<u64>,
    /// Window length factor: the window is `[i, i + alpha ln i]`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_grid: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i_grid: Option<Vec<u64>>,
    /// Burn-in for histograms and densities.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_min: Option<u64>,
    /// Smallest left endpoint for gap statistics.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_b: Option<u64>,
    /// Largest representation count with its own histogram bucket.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_max: Option<u32>,
    /// Largest universe cap M for random event systems.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    /// Number of variables t for lemma sums (i) and (ii).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<u32>>,
    /// Write every gap instead of only record-setting ones.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub all_gaps: Option<bool>,
    /// Worker threads; does not affect any output.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| config_err(format!("bad config file: {e}")))
    }

    pub fn to_toml_string(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| config_err(format!("cannot serialize config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// `self` with every field set in `flags` replaced.
    pub fn overlaid(mut self, flags: &ExperimentConfig) -> Self {
        overlay!(self, flags; s, n, seed, trials, trial, alpha, z_grid, i_grid, n_min, min_b,
            d_max, m, t, coeffs, all_gaps, workers, out_dir);
        self
    }

    /// Hash of the parameters that determine the outputs: canonical JSON of the
    /// config without `out_dir` and `workers`, prefixed by the command name.
    pub fn hash(&self, command: &str) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = None;
        canonical.workers = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(b"\n");
        h.update(json.as_bytes());
        hex::encode(h.finalize())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub(crate) fn require_seed(&self, command: &str) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| config_err(format!("`{command}` is stochastic and needs --seed")))
    }

    pub(crate) fn require<T: Clone>(value: &Option<T>, name: &str, command: &str) -> CliResult<T> {
        value
            .clone()
            .ok_or_else(|| config_err(format!("`{command}` needs --{name}")))
    }
}
