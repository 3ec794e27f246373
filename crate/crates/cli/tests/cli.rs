use std::path::Path;
use std::process::{Command, Output};

use sumgap_cli::runlog::{Reproduction, RunRecord};
use sumgap_cli::ExperimentConfig;
use sumgap_core::sampler::{count_variance, expected_count, PseudoSequence};

fn sumgap(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumgap"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove("SUMGAP_RUN_LOG")
        .output()
        .expect("spawn sumgap")
}

fn log_records(path: &Path) -> Vec<RunRecord> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn sample_is_reproducible_and_logged() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(sumgap(&["sample", "--s", "2", "--n", "1000", "--seed", "7"], &a).status.success());
    assert!(sumgap(&["sample", "--s", "2", "--n", "1000", "--seed", "7"], &b).status.success());
    let fa = std::fs::read(a.join("sequence.txt")).unwrap();
    assert_eq!(fa, std::fs::read(b.join("sequence.txt")).unwrap());
    assert!(fa.starts_with(b"# s=2 N=1000 seed=7 trial=0\n"));

    // second run into the same directory reproduces the first
    assert!(sumgap(&["sample", "--s", "2", "--n", "1000", "--seed", "7"], &a).status.success());
    let log = log_records(&a.join("runlog.jsonl"));
    assert_eq!(log.len(), 2);
    assert_eq!(log[0].reproduction, Reproduction::New);
    assert_eq!(log[1].reproduction, Reproduction::Match);
    assert_eq!(log[0].config_hash, log[1].config_hash);
    assert_eq!(log[0].outputs.len(), 1);
    assert!(log[0].finished_at >= log[0].started_at);
}

#[test]
fn tampered_output_digest_is_a_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sample", "--s", "3", "--n", "500", "--seed", "1"];
    assert!(sumgap(&args, dir.path()).status.success());
    let log_path = dir.path().join("runlog.jsonl");
    let mut rec = log_records(&log_path).remove(0);
    rec.outputs.insert("sequence.txt".into(), "0".repeat(64));
    std::fs::write(&log_path, serde_json::to_string(&rec).unwrap() + "\n").unwrap();
    assert!(sumgap(&args, dir.path()).status.success());
    assert_eq!(log_records(&log_path)[1].reproduction, Reproduction::Mismatch);
}

#[test]
fn run_log_path_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("elsewhere").join("log.jsonl");
    let out = Command::new(env!("CARGO_BIN_EXE_sumgap"))
        .args(["lemma", "--z-grid", "10,20", "--out-dir"])
        .arg(dir.path().join("o"))
        .env("SUMGAP_RUN_LOG", &log)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(log_records(&log).len(), 1);
    assert!(!dir.path().join("o").join("runlog.jsonl").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let code = |args: &[&str]| sumgap(args, d).status.code().unwrap();
    assert_eq!(code(&["sample", "--s", "1", "--n", "100", "--seed", "1"]), 2);
    assert_eq!(code(&["sample", "--s", "2", "--n", "100"]), 2);
    assert_eq!(code(&["gaps", "--n", "100"]), 2);
    assert_eq!(code(&["gapprob", "--seed", "1"]), 2);
    assert_eq!(code(&["lemma", "--s", "2"]), 2);
    assert_eq!(code(&["lemma", "--z-grid", "100", "--t", "3"]), 2);
    assert_eq!(code(&["janson", "--seed", "1", "--m", "27"]), 3);
    assert_eq!(code(&["sample", "--bogus"]), 2);
    let bad = d.join("bad.toml");
    std::fs::write(&bad, "s = 2\nunknown = 1\n").unwrap();
    assert_eq!(code(&["sample", "--config", bad.to_str().unwrap()]), 2);
    assert_eq!(code(&["sample", "--s", "2", "--n", "10", "--seed", "1", "--workers", "0"]), 2);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(&cfg_path, "s = 3\nn = 2000\nseed = 5\n").unwrap();
    let out = dir.path().join("o");
    let c = cfg_path.to_str().unwrap();
    assert!(sumgap(&["sample", "--config", c, "--s", "2"], &out).status.success());
    let text = std::fs::read_to_string(out.join("sequence.txt")).unwrap();
    assert!(text.starts_with("# s=2 N=2000 seed=5 trial=0\n"), "{text}");
    let rec = &log_records(&out.join("runlog.jsonl"))[0];
    assert_eq!(rec.config.s, Some(2));
    assert_eq!(rec.config.n, Some(2000));
}

#[test]
fn config_round_trip() {
    let cfg = ExperimentConfig {
        s: Some(3),
        n: Some(1_000_000),
        seed: Some(u64::MAX),
        trials: Some(10),
        alpha: Some(0.1 + 0.2),
        z_grid: Some(vec![10, 100, 1000]),
        coeffs: Some(vec![1, 2]),
        all_gaps: Some(true),
        out_dir: Some("runs/a".into()),
        ..Default::default()
    };
    let text = cfg.to_toml_string().unwrap();
    let back = ExperimentConfig::from_toml_str(&text).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.to_toml_string().unwrap(), text);
    assert_eq!(ExperimentConfig::from_toml_str("").unwrap(), ExperimentConfig::default());
}

#[test]
fn sample_count_near_expectation() {
    let dir = tempfile::tempdir().unwrap();
    assert!(sumgap(&["sample", "--s", "2", "--n", "1000000", "--seed", "7"], dir.path()).status.success());
    let file = std::fs::File::open(dir.path().join("sequence.txt")).unwrap();
    let seq = PseudoSequence::read_text(std::io::BufReader::new(file)).unwrap();
    let mean = expected_count(2, 1_000_000).unwrap();
    let sd = count_variance(2, 1_000_000).unwrap().sqrt();
    assert!((seq.len() as f64 - mean).abs() < 4.0 * sd, "{} vs {mean}", seq.len());
}

#[test]
fn gaps_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = sumgap(&["gaps", "--n", "200000", "--trials", "3", "--seed", "4"], dir.path());
    assert!(out.status.success());
    let trend = std::fs::read_to_string(dir.path().join("trend.csv")).unwrap();
    let rows: Vec<&str> = trend.lines().collect();
    assert_eq!(rows[0], "trial,max_normalized_gap,left,right,gap,density,sequence_size");
    assert_eq!(rows.len(), 4);
    for (k, row) in rows[1..].iter().enumerate() {
        assert!(row.starts_with(&format!("{k},")));
        // the trend maximum is the last record of that trial's gap file
        let gaps = std::fs::read_to_string(dir.path().join(format!("gaps_trial{k}.csv"))).unwrap();
        let last = gaps.lines().last().unwrap();
        let max_field = row.split(',').nth(1).unwrap();
        assert_eq!(last.split(',').nth(3).unwrap(), max_field);
    }
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["summary"]["trials"], 3);
    assert_eq!(summary["min_b"], 448);

    // --all-gaps keeps every gap, so at least as many rows
    let all = dir.path().join("all");
    assert!(sumgap(&["gaps", "--n", "200000", "--seed", "4", "--all-gaps", "true"], &all).status.success());
    let n_all = std::fs::read_to_string(all.join("gaps_trial0.csv")).unwrap().lines().count();
    let n_rec = std::fs::read_to_string(dir.path().join("gaps_trial0.csv")).unwrap().lines().count();
    assert!(n_all > n_rec);
}

#[test]
fn lemma_and_janson_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert!(sumgap(&["lemma", "--s", "2", "--z-grid", "100,1000", "--t", "2"], dir.path()).status.success());
    for name in ["lemma_i.csv", "lemma_ii.csv", "lemma_iii.csv", "omega_sum.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "z,value,envelope,bound_ratio");
        assert_eq!(lines.len(), 3, "{name}");
    }
    let iii = std::fs::read_to_string(dir.path().join("lemma_iii.csv")).unwrap();
    assert!(iii.contains("1000,1.5236125751315908e0,"));

    assert!(sumgap(&["janson", "--seed", "3", "--trials", "30", "--m", "14"], dir.path()).status.success());
    let text = std::fs::read_to_string(dir.path().join("janson.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 30);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn gapprob_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gapprob", "--i-grid", "100,200,400", "--trials", "20000", "--seed", "2"];
    assert!(sumgap(&args, dir.path()).status.success());
    let text = std::fs::read_to_string(dir.path().join("gapprob.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "i,estimate,std_error,model");
    assert_eq!(text.lines().count(), 4);
    let fit: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("fit.json")).unwrap()).unwrap();
    assert!(fit["fit"]["slope"].as_f64().unwrap() < 0.0);
    assert!((fit["model_slope"].as_f64().unwrap() + std::f64::consts::PI / 4.0).abs() < 1e-12);
}
