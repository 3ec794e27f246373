//! Batch experiment driver for the sumgap laboratory.
//!
//! `sumgap <command> [flags]` runs one experiment, writes its data files into
//! `--out-dir`, and appends a line to the run log. Parameters can also come
//! from a TOML file given with `--config`; flags override it.

pub mod commands;
pub mod config;
pub mod error;
pub mod runlog;

use std::path::PathBuf;

use clap::Parser;

pub use commands::Command;
pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
use runlog::{Reproduction, RunRecord};

#[derive(Debug, Parser)]
#[command(name = "sumgap", version, about = "Pseudo s-th power sumset experiments")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML file with default parameters.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: ExperimentConfig,
}

pub struct RunSummary {
    pub record: RunRecord,
    pub message: String,
}

/// Resolve the config, run the command (on a dedicated pool when
/// `workers` is set) and log the run.
pub fn execute(cli: &Cli) -> CliResult<RunSummary> {
    let base = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let cfg = base.overlaid(&cli.flags);
    let out = cfg.out_dir();
    let started_at = runlog::now();

    let outcome = match cfg.workers {
        Some(0) => return Err(error::config_err("--workers must be at least 1")),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CliError::Internal(e.to_string()))?
            .install(|| commands::run(cli.command, &cfg, &out))?,
        None => commands::run(cli.command, &cfg, &out)?,
    };

    let mut outputs = std::collections::BTreeMap::new();
    for name in &outcome.files {
        outputs.insert(name.clone(), runlog::file_digest(&out.join(name))?);
    }
    let record = RunRecord {
        command: cli.command.name().to_string(),
        config_hash: cfg.hash(cli.command.name()),
        config: cfg.clone(),
        started_at,
        finished_at: runlog::now(),
        outputs,
        reproduction: Reproduction::New,
    };
    let record = runlog::append(&runlog::log_path(&out), record)?;
    Ok(RunSummary {
        record,
        message: outcome.message,
    })
}
