//! The subcommands. Each writes its files into the output directory and
//! returns their names together with a one-line summary for the terminal.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use sumgap_core::events::{
    exact_family_avoidance, janson_bounds, lemma_sum_i, lemma_sum_ii, lemma_sum_iii, montecarlo_gap_probability,
    omega_probability_sum, random_system, LemmaSumResult, RandomSystemSpec, EXACT_UNIVERSE_LIMIT,
};
use sumgap_core::model::{lambda_s, ModelParams};
use sumgap_core::sampler::{expected_count, sample_sequence};
use sumgap_core::stats::{
    aggregate, default_min_b, default_n_min, exponent_fit, format_real, poisson_reference, run_trial,
    run_trial_keep_profile, total_variation, EmpiricalDistribution, ExponentFit, Summary, TrialParams, TrialReport,
};
use sumgap_core::sumset::{gap_iter, write_gaps_csv, GapRecord};
use sumgap_core::{Error, InclusionLaw};

use crate::config::ExperimentConfig;
use crate::error::{config_err, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Sample,
    Gaps,
    Poisson,
    Lemma,
    Janson,
    Gapprob,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Gaps => "gaps",
            Command::Poisson => "poisson",
            Command::Lemma => "lemma",
            Command::Janson => "janson",
            Command::Gapprob => "gapprob",
        }
    }
}

pub struct Outcome {
    /// File names relative to the output directory, in write order.
    pub files: Vec<String>,
    pub message: String,
}

pub fn run(command: Command, cfg: &ExperimentConfig, out: &Path) -> CliResult<Outcome> {
    fs::create_dir_all(out)?;
    match command {
        Command::Sample => cmd_sample(cfg, out),
        Command::Gaps => cmd_gaps(cfg, out),
        Command::Poisson => cmd_poisson(cfg, out),
        Command::Lemma => cmd_lemma(cfg, out),
        Command::Janson => cmd_janson(cfg, out),
        Command::Gapprob => cmd_gapprob(cfg, out),
    }
}

fn create(out: &Path, name: &str) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(out.join(name))?))
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> CliResult<()> {
    let mut w = create(out, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| crate::error::CliError::Internal(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn model_s(cfg: &ExperimentConfig) -> CliResult<u32> {
    let s = cfg.s.unwrap_or(2);
    ModelParams::new(s)?;
    Ok(s)
}

fn limit_n(cfg: &ExperimentConfig, command: &str) -> CliResult<u64> {
    let n = ExperimentConfig::require(&cfg.n, "n", command)?;
    if n < 1 {
        return Err(config_err("--n must be at least 1"));
    }
    Ok(n)
}

fn trial_count(cfg: &ExperimentConfig, default: u64) -> CliResult<u64> {
    let trials = cfg.trials.unwrap_or(default);
    if trials < 1 {
        return Err(config_err("--trials must be at least 1"));
    }
    Ok(trials)
}

fn cmd_sample(cfg: &ExperimentConfig, out: &Path) -> CliResult<Outcome> {
    let seed = cfg.require_seed("sample")?;
    let s = ExperimentConfig::require(&cfg.s, "s", "sample")?;
    let n = limit_n(cfg, "sample")?;
    let seq = sample_sequence(s, n, seed, cfg.trial.unwrap_or(0))?;
    let mut w = create(out, "sequence.txt")?;
    seq.write_text(&mut w)?;
    w.flush()?;
    Ok(Outcome {
        files: vec!["sequence.txt".into()],
        message: format!("{} elements (expected {:.1})", seq.len(), expected_count(s, n)?),
    })
}

/// Trials `0..trials` in parallel, returned in trial order.
fn run_trials(params: &[TrialParams]) -> CliResult<Vec<TrialReport>> {
    Ok(params.par_iter().map(run_trial).collect::<Result<Vec<_>, Error>>()?)
}

fn trial_params(cfg: &ExperimentConfig, s: u32, n: u64, seed: u64, trials: u64) -> CliResult<Vec<TrialParams>> {
    let n_min = cfg.n_min.unwrap_or_else(|| default_n_min(n));
    let min_b = cfg.min_b.unwrap_or_else(|| default_min_b(n));
    if min_b < 2 {
        return Err(config_err("--min-b must be at least 2"));
    }
    Ok((0..trials)
        .map(|k| TrialParams {
            n_min,
            min_b,
            ..TrialParams::new(s, n, seed, k)
        })
        .collect())
}

#[derive(Serialize)]
struct GapsSummary<'a> {
    s: u32,
    n: u64,
    seed: u64,
    min_b: u64,
    n_min: u64,
    gap_constant: f64,
    summary: &'a Summary,
}

/// Gaps whose normalized length beats every earlier one.
fn record_gaps(records: impl Iterator<Item = GapRecord>) -> Vec<GapRecord> {
    let mut best = f64::NEG_INFINITY;
    records
        .filter(|g| {
            let keep = g.normalized > best;
            best = best.max(g.normalized);
            keep
        })
        .collect()
}

fn cmd_gaps(cfg: &ExperimentConfig, out: &Path) -> CliResult<Outcome> {
    let seed = cfg.require_seed("gaps")?;
    let s = model_s(cfg)?;
    let n = limit_n(cfg, "gaps")?;
    let trials = trial_count(cfg, 1)?;
    let params = trial_params(cfg, s, n, seed, trials)?;
    let all = cfg.all_gaps.unwrap_or(false);

    // each trial writes its own file; reports come back in trial order
    let reports = params
        .par_iter()
        .map(|p| -> CliResult<TrialReport> {
            let (report, profile) = run_trial_keep_profile(p)?;
            let mut w = create(out, &format!("gaps_trial{}.csv", p.trial_index))?;
            if all {
                write_gaps_csv(&mut w, gap_iter(&profile, p.min_b).collect::<Vec<_>>().iter())?;
            } else {
                write_gaps_csv(&mut w, record_gaps(gap_iter(&profile, p.min_b)).iter())?;
            }
            w.flush()?;
            Ok(report)
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut w = create(out, "trend.csv")?;
    writeln!(w, "trial,max_normalized_gap,left,right,gap,density,sequence_size")?;
    for r in &reports {
        let (left, right, gap) = r
            .widest_gap
            .map(|g| (g.left.to_string(), g.right.to_string(), g.gap.to_string()))
            .unwrap_or_default();
        let max = r.max_normalized_gap.map(format_real).unwrap_or_default();
        writeln!(
            w,
            "{},{max},{left},{right},{gap},{},{}",
            r.trial_index,
            format_real(r.sumset_density),
            r.sequence_size
        )?;
    }
    w.flush()?;

    let summary = aggregate(&reports)?;
    let gap_constant = ModelParams::new(s)?.gap_constant;
    write_json(
        out,
        "summary.json",
        &GapsSummary {
            s,
            n,
            seed,
            min_b: params[0].min_b,
            n_min: params[0].n_min,
            gap_constant,
            summary: &summary,
        },
    )?;

    let mut files: Vec<String> = (0..trials).map(|k| format!("gaps_trial{k}.csv")).collect();
    files.extend(["trend.csv".into(), "summary.json".into()]);
    let median = summary
        .max_normalized_gap
        .map(|m| format!("{:.4}", m.median))
        .unwrap_or_else(|| "n/a".into());
    Ok(Outcome {
        files,
        message: format!("median max normalized gap {median} (constant {gap_constant:.4})"),
    })
}

#[derive(Serialize)]
struct PoissonSummary {
    s: u32,
    n: u64,
    seed: u64,
    trials: u64,
    n_min: u64,
    d_max: u32,
    lambda: f64,
    total_variation: f64,
    mean_density: f64,
    model_density: f64,
    pooled_histogram: BTreeMap<u32, u64>,
}

fn cmd_poisson(cfg: &ExperimentConfig, out: &Path) -> CliResult<Outcome> {
    let seed = cfg.require_seed("poisson")?;
    let s = model_s(cfg)?;
    let n = limit_n(cfg, "poisson")?;
    let trials = trial_count(cfg, 1)?;
    let d_max = cfg.d_max.unwrap_or(10);
    let params = trial_params(cfg, s, n, seed, trials)?;
    let reports = run_trials(&params)?;
    let summary = aggregate(&reports)?;

    let model = ModelParams::new(s)?;
    let empirical = EmpiricalDistribution::from_histogram(&summary.pooled_histogram, d_max);
    let p = empirical.frequencies();
    let q = poisson_reference(model.lambda_s, d_max)?;
    let tv = total_variation(&p, &q)?;

    let mut w = create(out, "histogram.csv")?;
    writeln!(w, "d,count,empirical,poisson")?;
    let counts = empirical.counts.iter().chain(std::iter::once(&empirical.overflow));
    for (d, ((c, pe), pq)) in counts.zip(&p).zip(&q).enumerate() {
        let label = if d as u32 > d_max { format!(">{d_max}") } else { d.to_string() };
        writeln!(w, "{label},{c},{},{}", format_real(*pe), format_real(*pq))?;
    }
    w.flush()?;

    write_json(
        out,
        "summary.json",
        &PoissonSummary {
            s,
            n,
            seed,
            trials,
            n_min: params[0].n_min,
            d_max,
            lambda: model.lambda_s,
            total_variation: tv,
            mean_density: summary.sumset_density.mean,
            model_density: model.sumset_density(),
            pooled_histogram: summary.pooled_histogram.clone(),
        },
    )?;
    Ok(Outcome {
        files: vec!["histogram.csv".into(), "summary.json".into()],
        message: format!(
            "TV distance {tv:.5}, density {:.5} (model {:.5})",
            summary.sumset_density.mean,
            model.sumset_density()
        ),
    })
}

fn write_sweep(out: &Path, name: &str, rows: &[LemmaSumResult]) -> CliResult<()> {
    let mut w = create(out, name)?;
    writeln!(w, "z,value,envelope,bound_ratio")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.z,
            format_real(r.value),
            format_real(r.envelope),
            format_real(r.bound_ratio)
        )?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_lemma(cfg: &ExperimentConfig, out: &Path) -> CliResult<Outcome> {
    let s = model_s(cfg)?;
    let grid = ExperimentConfig::require(&cfg.z_grid, "z-grid", "lemma")?;
    if grid.is_empty() {
        return Err(config_err("--z-grid is empty"));
    }
    let t = cfg.t.unwrap_or(1);
    let coeffs = cfg.coeffs.clone().unwrap_or_else(|| vec![1; t as usize]);
    let lambda = lambda_s(s)?;

    let sweep = |f: &(dyn Fn(u64) -> sumgap_core::Result<LemmaSumResult> + Sync)| -> CliResult<Vec<LemmaSumResult>> {
        Ok(grid.par_iter().map(|&z| f(z)).collect::<Result<Vec<_>, Error>>()?)
    };
    let i = sweep(&|z| lemma_sum_i(t, s, &coeffs, z))?;
    let ii = sweep(&|z| lemma_sum_ii(t, s, &coeffs, z))?;
    let iii = sweep(&|z| lemma_sum_iii(s, z))?;
    let omega = sweep(&|z| {
        let value = omega_probability_sum(z, s)?;
        Ok(LemmaSumResult {
            z,
            value,
            envelope: lambda,
            bound_ratio: value / lambda,
        })
    })?;
    write_sweep(out, "lemma_i.csv", &i)?;
    write_sweep(out, "lemma_ii.csv", &ii)?;
    write_sweep(out, "lemma_iii.csv", &iii)?;
    write_sweep(out, "omega_sum.csv", &omega)?;
    let last = iii.last().expect("non-empty grid");
    Ok(Outcome {
        files: ["lemma_i.csv", "lemma_ii.csv", "lemma_iii.csv", "omega_sum.csv"].map(String::from).to_vec(),
        message: format!("sum (iii) at z={}: ratio {:.5}", last.z, last.bound_ratio),
    })
}

const SANDWICH_TOL: f64 = 1e-12;

struct JansonRow {
    s: u32,
    cap: u64,
    i: u64,
    alpha: f64,
    members: usize,
    family: usize,
    lower: f64,
    exact: f64,
    upper: f64,
}

fn cmd_janson(cfg: &ExperimentConfig, out: &Path) -> CliResult<Outcome> {
    let seed = cfg.require_seed("janson")?;
    let systems = cfg.trials.unwrap_or(100);
    let max_cap = cfg.m.unwrap_or(20);
    if max_cap > EXACT_UNIVERSE_LIMIT {
        return Err(Error::Guard {
            cap: max_cap,
            limit: EXACT_UNIVERSE_LIMIT,
        }
        .into());
    }
    let spec = RandomSystemSpec {
        s_choices: match cfg.s {
            Some(s) => vec![s],
            None => vec![2, 3],
        },
        max_cap,
        min_cap: RandomSystemSpec::default().min_cap.min(max_cap),
        ..RandomSystemSpec::default()
    };
    let rows = (0..systems)
        .into_par_iter()
        .map(|k| -> sumgap_core::Result<JansonRow> {
            let sys = random_system(&spec, seed, k)?;
            let bounds = janson_bounds(&sys)?;
            Ok(JansonRow {
                s: sys.s,
                cap: sys.universe_cap,
                i: sys.interval.i,
                alpha: sys.interval.alpha.unwrap_or(0.0),
                members: sys.interval.members.len(),
                family: sys.len(),
                lower: bounds.lower,
                exact: exact_family_avoidance(&sys)?,
                upper: bounds.upper,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mut w = create(out, "janson.csv")?;
    writeln!(w, "system,s,m,i,alpha,members,family,lower,exact,upper,sandwich_ok")?;
    let mut violations = 0;
    for (k, r) in rows.iter().enumerate() {
        // equal bounds (no dependent pairs) may differ from exact by rounding
        let ok = r.lower <= r.exact * (1.0 + SANDWICH_TOL) && r.exact <= r.upper * (1.0 + SANDWICH_TOL);
        violations += usize::from(!ok);
        writeln!(
            w,
            "{k},{},{},{},{},{},{},{},{},{},{ok}",
            r.s,
            r.cap,
            r.i,
            format_real(r.alpha),
            r.members,
            r.family,
            format_real(r.lower),
            format_real(r.exact),
            format_real(r.upper)
        )?;
    }
    w.flush()?;
    Ok(Outcome {
        files: vec!["janson.csv".into()],
        message: format!("{systems} systems, {violations} sandwich violations"),
    })
}

#[derive(Serialize)]
struct FitReport {
    s: u32,
    alpha: f64,
    trials: u64,
    seed: u64,
    /// `-α λ_s`.
    model_slope: f64,
    fit: ExponentFit,
}

fn cmd_gapprob(cfg: &ExperimentConfig, out: &Path) -> CliResult<Outcome> {
    let seed = cfg.require_seed("gapprob")?;
    let s = model_s(cfg)?;
    let alpha = cfg.alpha.unwrap_or(2.0);
    let grid = ExperimentConfig::require(&cfg.i_grid, "i-grid", "gapprob")?;
    let trials = trial_count(cfg, 100_000)?;
    let law = InclusionLaw::pseudo_power(s)?;
    let lambda = lambda_s(s)?;

    // every grid point reuses the streams (seed, 0..trials)
    let mut estimates = Vec::with_capacity(grid.len());
    for &i in &grid {
        estimates.push(montecarlo_gap_probability(&law, i, alpha, trials, seed)?);
    }
    let mut w = create(out, "gapprob.csv")?;
    writeln!(w, "i,estimate,std_error,model")?;
    for (&i, e) in grid.iter().zip(&estimates) {
        let model = (i as f64).powf(-alpha * lambda);
        writeln!(
            w,
            "{i},{},{},{}",
            format_real(e.estimate),
            format_real(e.std_error),
            format_real(model)
        )?;
    }
    w.flush()?;

    let points: Vec<(f64, f64)> = grid.iter().zip(&estimates).map(|(&i, e)| (i as f64, e.estimate)).collect();
    let fit = exponent_fit(&points)?;
    write_json(
        out,
        "fit.json",
        &FitReport {
            s,
            alpha,
            trials,
            seed,
            model_slope: -alpha * lambda,
            fit,
        },
    )?;
    Ok(Outcome {
        files: vec!["gapprob.csv".into(), "fit.json".into()],
        message: format!(
            "slope {:.4} (model {:.4}), r^2 {:.4}",
            fit.slope,
            -alpha * lambda,
            fit.r_squared
        ),
    })
}
