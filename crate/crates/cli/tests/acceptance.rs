//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is always printed
//! in order. Exits non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use sumgap_core::events::{
    exact_gap_probability, janson_bounds, lemma_sum_iii, montecarlo_avoidance, montecarlo_gap_probability,
    omega_probability_sum, random_system, IntervalSpec, RandomSystemSpec,
};
use sumgap_core::model::{gamma_reciprocal_power, gap_constant, lambda_s};
use sumgap_core::sampler::{sample_sequence, TrialStream};
use sumgap_core::stats::{
    aggregate, exponent_fit, poisson_reference, run_trial, sumset_density, total_variation, EmpiricalDistribution,
    TrialParams,
};
use sumgap_core::sumset::{representation_counts, sumset, widest_normalized_gap};
use sumgap_core::InclusionLaw;

type Check = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn constants() -> Verdict {
    // Γ(1), Γ(1/2) = √π, Γ(1/3) from a 40-digit evaluation
    let oracles = [(1u32, 1.0), (2, PI.sqrt()), (3, 2.678_938_534_707_747_6)];
    let worst_gamma = oracles
        .iter()
        .map(|&(s, g)| rel(gamma_reciprocal_power(s).unwrap(), g))
        .fold(0.0, f64::max);
    let e_lambda = rel(lambda_s(2).unwrap(), PI / 8.0);
    let e_gap = rel(gap_constant(2).unwrap(), 8.0 / PI);
    verdict(
        worst_gamma <= 1e-12 && e_lambda <= 1e-10 && e_gap <= 1e-10,
        format!("rel err: gamma {worst_gamma:.1e}, lambda_2 {e_lambda:.1e}, gap_constant {e_gap:.1e}"),
    )
}

/// Counts of non-decreasing s-tuples from `a` by exhaustive recursion.
fn brute_counts(a: &[u64], s: u32, limit: u64) -> Vec<u32> {
    fn rec(a: &[u64], from: usize, left: u32, sum: u64, limit: u64, out: &mut [u32]) {
        if left == 0 {
            out[sum as usize] += 1;
            return;
        }
        for k in from..a.len() {
            let next = sum + a[k];
            if next > limit {
                break;
            }
            rec(a, k, left - 1, next, limit, out);
        }
    }
    let mut out = vec![0u32; limit as usize + 1];
    rec(a, 0, s, 0, limit, &mut out);
    out
}

fn oracle_equivalence() -> Verdict {
    let mut mismatches = 0;
    let instances = 240u64;
    for k in 0..instances {
        let mut rng = TrialStream::new(0xACCE, k);
        let s = [2u32, 3, 4][rng.range_inclusive(0, 2) as usize];
        let limit = rng.range_inclusive(1, 500);
        let size = rng.range_inclusive(0, 30.min(limit));
        let mut a: Vec<u64> = (0..size).map(|_| rng.range_inclusive(1, limit)).collect();
        a.sort_unstable();
        a.dedup();
        let expect = brute_counts(&a, s, limit);
        let profile = sumset(&a, s, limit).unwrap();
        let table = representation_counts(&a, s, limit).unwrap();
        let bad = (1..=limit).any(|n| {
            let e = expect[n as usize];
            profile.contains(n) != (e > 0) || table.get(n) != e
        });
        mismatches += usize::from(bad);
    }
    verdict(mismatches == 0, format!("{instances} instances, {mismatches} mismatches"))
}

/// Plain loop over all `2^M` subsets of `[1, M]`, testing sums directly.
fn brute_gap_probability(law: &InclusionLaw, cap: u64, members: &[u64]) -> f64 {
    let s = law.s();
    let target = members.iter().fold(0u128, |m, &z| m | 1 << z);
    let probs: Vec<f64> = (1..=cap).map(|n| law.probability(n)).collect();
    let mut total = 0.0;
    for mask in 0u64..1 << cap {
        let mut weight = 1.0;
        let mut base = 0u128;
        for n in 1..=cap {
            if mask >> (n - 1) & 1 == 1 {
                weight *= probs[n as usize - 1];
                base |= 1 << n;
            } else {
                weight *= 1.0 - probs[n as usize - 1];
            }
        }
        let mut sums = base;
        for _ in 1..s {
            let mut next = 0u128;
            for n in 1..=cap {
                if mask >> (n - 1) & 1 == 1 {
                    next |= sums << n;
                }
            }
            sums = next;
        }
        if sums & target == 0 {
            total += weight;
        }
    }
    total
}

fn janson_sandwich() -> Verdict {
    let spec = RandomSystemSpec::default();
    let systems = 120u64;
    let mut violations = 0;
    let mut max_m = 0;
    for k in 0..systems {
        let sys = random_system(&spec, 0x1A5, k).unwrap();
        max_m = max_m.max(sys.universe_cap);
        let bounds = janson_bounds(&sys).unwrap();
        let exact = brute_gap_probability(sys.law(), sys.universe_cap, &sys.interval.members);
        let slack = 1e-12;
        if !(bounds.lower <= exact + slack && exact <= bounds.upper + slack) {
            violations += 1;
        }
    }
    verdict(
        violations == 0 && max_m <= 20,
        format!("{systems} systems (M <= {max_m}), {violations} violations"),
    )
}

fn exact_vs_montecarlo() -> Verdict {
    const TRIALS: u64 = 100_000;
    let mut checked = 0;
    let mut worst_z = 0.0f64;
    let mut failures = Vec::new();

    // worked example: M = 3, I = {4, 5}, s = 2
    let law2 = InclusionLaw::pseudo_power(2).unwrap();
    let example = IntervalSpec::explicit(&[4, 5]);
    let exact = exact_gap_probability(&law2, 3, &example).unwrap();
    let mc = montecarlo_avoidance(&law2, 3, &example, TRIALS, 31).unwrap();
    let z = (mc.estimate - exact).abs() / mc.std_error;
    worst_z = worst_z.max(z);
    checked += 1;
    if z > 3.0 {
        failures.push("M=3 example".to_string());
    }
    let example_ok = (exact - 0.553_140_078_417_302_7).abs() < 1e-12;

    for s in [2u32, 3] {
        let law = InclusionLaw::pseudo_power(s).unwrap();
        for (k, i) in [3u64, 5, 7, 9, 11, 13, 15, 17, 19, 21].into_iter().enumerate() {
            let alpha = if k % 2 == 0 { 1.0 } else { 1.5 };
            let interval = IntervalSpec::new(i, alpha).unwrap();
            let exact = exact_gap_probability(&law, interval.universe(), &interval).unwrap();
            let mc = montecarlo_gap_probability(&law, i, alpha, TRIALS, 1000 + i).unwrap();
            let z = if mc.std_error > 0.0 {
                (mc.estimate - exact).abs() / mc.std_error
            } else if (mc.estimate - exact).abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            worst_z = worst_z.max(z);
            checked += 1;
            if z > 3.0 {
                failures.push(format!("s={s} i={i}"));
            }
        }
    }
    verdict(
        failures.is_empty() && example_ok,
        format!(
            "{checked} systems, worst |mc - exact| = {worst_z:.2} SE, M=3 exact {exact:.10}{}",
            if failures.is_empty() { String::new() } else { format!(", outside 3 SE: {failures:?}") }
        ),
    )
}

fn lemma_iii() -> Verdict {
    let half_pi = PI / 2.0;
    let errs: Vec<f64> = [1_000u64, 10_000, 100_000]
        .iter()
        .map(|&z| (lemma_sum_iii(2, z).unwrap().value - half_pi).abs())
        .collect();
    let at_1e4 = errs[1] / half_pi;
    let s2_ok = at_1e4 <= 0.02 && errs[0] > errs[1] && errs[1] > errs[2];

    let target3 = 27.0 * lambda_s(3).unwrap();
    let grid3: Vec<(u64, f64)> = [100u64, 300, 1_000, 3_000]
        .iter()
        .map(|&z| (z, lemma_sum_iii(3, z).unwrap().value))
        .collect();
    let at_3e3 = grid3.last().unwrap().1;
    let s3_dev = rel(at_3e3, target3);
    let s3_ok = s3_dev <= 0.10;
    let trend: Vec<String> = grid3.iter().map(|(z, v)| format!("{z}:{:.4}", v / target3)).collect();
    verdict(
        s2_ok && s3_ok,
        format!(
            "s=2: z=1e4 off by {:.3}%, |err| {:.2e} > {:.2e} > {:.2e} [{}]; s=3: z=3e3 value {at_3e3:.6} vs 27*lambda_3 {target3:.6}, off by {:.2}% [{}], ratio by z {}",
            100.0 * at_1e4,
            errs[0],
            errs[1],
            errs[2],
            if s2_ok { "ok" } else { "FAIL" },
            100.0 * s3_dev,
            if s3_ok { "ok" } else { "FAIL" },
            trend.join(" ")
        ),
    )
}

fn omega_sums() -> Verdict {
    let lambda = PI / 8.0;
    let errs: Vec<(u64, f64)> = [100u64, 1_000, 10_000]
        .iter()
        .map(|&z| (z, (omega_probability_sum(z, 2).unwrap() - lambda).abs()))
        .collect();
    let at_1e4 = errs[2].1 / lambda;
    let decreasing = errs.windows(2).all(|w| w[1].1 < w[0].1);
    verdict(
        at_1e4 < 0.05 && decreasing,
        format!(
            "z=1e4 off by {:.3}%, |err| along z: {}",
            100.0 * at_1e4,
            errs.iter().map(|(z, e)| format!("{z}:{e:.2e}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn poisson_profile() -> Verdict {
    let seed = 7_2024;
    let params: Vec<TrialParams> = (0..5)
        .map(|k| TrialParams {
            n_min: 1_000,
            ..TrialParams::new(2, 1_000_000, seed, k)
        })
        .collect();
    let reports: Vec<_> = params.iter().map(|p| run_trial(p).unwrap()).collect();
    let pooled = aggregate(&reports).unwrap().pooled_histogram;
    let d_max = 12;
    let p = EmpiricalDistribution::from_histogram(&pooled, d_max).frequencies();
    let q = poisson_reference(PI / 8.0, d_max).unwrap();
    let tv = total_variation(&p, &q).unwrap();

    let seq = sample_sequence(2, 10_000_000, seed, 0).unwrap();
    let profile = sumset(seq.elements(), 2, 10_000_000).unwrap();
    let density = sumset_density(&profile, 1_000).unwrap();
    let model = -(-PI / 8.0).exp_m1();
    verdict(
        tv < 0.02 && (density - model).abs() <= 0.01,
        format!("pooled TV {tv:.5} (< 0.02); density at N=1e7 {density:.5} vs {model:.5} (+-0.01)"),
    )
}

fn gap_trend() -> Verdict {
    let seed = 2024;
    let n = 10_000_000;
    let mut maxima = Vec::new();
    for k in 0..10 {
        let seq = sample_sequence(2, n, seed, k).unwrap();
        let profile = sumset(seq.elements(), 2, n).unwrap();
        let g = widest_normalized_gap(&profile, 1_000).expect("gaps above 1e3");
        maxima.push(g.normalized);
    }
    let mut sorted = maxima.clone();
    sorted.sort_by(f64::total_cmp);
    let median = 0.5 * (sorted[4] + sorted[5]);
    let per_trial_ok = maxima.iter().all(|m| (1.2..=4.8).contains(m));
    let median_ok = (1.7..=3.6).contains(&median);
    verdict(
        per_trial_ok && median_ok,
        format!(
            "per-trial max [{}] in [1.2, 4.8]: {}; median {median:.3} in [1.7, 3.6]: {} (8/pi = {:.3})",
            maxima.iter().map(|m| format!("{m:.2}")).collect::<Vec<_>>().join(" "),
            if per_trial_ok { "ok" } else { "FAIL" },
            if median_ok { "ok" } else { "FAIL" },
            8.0 / PI
        ),
    )
}

fn exponent() -> Verdict {
    let law = InclusionLaw::pseudo_power(2).unwrap();
    let grid = [200u64, 400, 800, 1600];
    let points: Vec<(f64, f64)> = grid
        .iter()
        .map(|&i| (i as f64, montecarlo_gap_probability(&law, i, 2.0, 100_000, 99).unwrap().estimate))
        .collect();
    let fit = exponent_fit(&points).unwrap();
    let model = -PI / 4.0;
    let dev = rel(fit.slope, model);
    verdict(
        dev <= 0.15 && fit.r_squared > 0.9,
        format!(
            "slope {:.4} vs {model:.4} (off {:.1}%), r^2 {:.4}",
            fit.slope,
            100.0 * dev,
            fit.r_squared
        ),
    )
}

fn run_cli(args: &[&str], out: &Path, workers: usize) -> BTreeMap<String, Vec<u8>> {
    let status = Command::new(env!("CARGO_BIN_EXE_sumgap"))
        .args(args)
        .arg("--workers")
        .arg(workers.to_string())
        .arg("--out-dir")
        .arg(out)
        .env("SUMGAP_RUN_LOG", out.join("..").join(format!("runlog_{workers}.jsonl")))
        .output()
        .expect("run sumgap");
    assert!(status.status.success(), "{args:?}: {}", String::from_utf8_lossy(&status.stderr));
    std::fs::read_dir(out)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn determinism() -> Verdict {
    let root = tempfile::tempdir().unwrap();
    let commands: [&[&str]; 5] = [
        &["sample", "--s", "2", "--n", "1000000", "--seed", "7"],
        &["gaps", "--n", "1000000", "--trials", "8", "--seed", "11"],
        &["poisson", "--n", "300000", "--trials", "8", "--seed", "12"],
        &["janson", "--trials", "40", "--seed", "13"],
        &["gapprob", "--i-grid", "50,100,200", "--trials", "40000", "--seed", "14"],
    ];
    let mut differing = Vec::new();
    let mut files = 0;
    for (k, args) in commands.iter().enumerate() {
        let mut runs = Vec::new();
        for (r, workers) in [1usize, 8, 8].into_iter().enumerate() {
            let out = root.path().join(format!("c{k}_r{r}"));
            runs.push(run_cli(args, &out, workers));
        }
        files += runs[0].len();
        if runs[0].is_empty() || runs.iter().any(|r| *r != runs[0]) {
            differing.push(args[0]);
        }
    }
    verdict(
        differing.is_empty(),
        format!(
            "5 commands x (1, 8, 8 workers), {files} files compared, differing: {}",
            if differing.is_empty() { "none".to_string() } else { differing.join(", ") }
        ),
    )
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("constants", constants),
        ("sumset oracle equivalence", oracle_equivalence),
        ("Janson sandwich", janson_sandwich),
        ("exact vs Monte Carlo", exact_vs_montecarlo),
        ("lattice sum (iii)", lemma_iii),
        ("omega probability sums", omega_sums),
        ("Poisson profile and density", poisson_profile),
        ("gap trend", gap_trend),
        ("gap probability exponent", exponent),
        ("determinism across workers", determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} {:>2} {name}: {} ({:.1}s)",
            k + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
        if !v.pass {
            failed.push(k + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
