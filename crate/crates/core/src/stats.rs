//! Per-trial statistics and their aggregation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::poisson_pmf;
use crate::sampler::sample_sequence;
use crate::sum::CompensatedSum;
use crate::sumset::{representation_counts, sumset, widest_normalized_gap, GapRecord, RepCountTable, SumsetProfile};

/// Real formatting for data files: 17 significant digits, `.` separator.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Default burn-in for Poisson profiles and densities: `max(100, √N)`, capped at `N`.
pub fn default_n_min(limit_n: u64) -> u64 {
    (limit_n as f64).sqrt().ceil().max(100.0).min(limit_n as f64) as u64
}

/// Default lower end for the gap trend: `⌈√N⌉`, at least 2.
pub fn default_min_b(limit_n: u64) -> u64 {
    ((limit_n as f64).sqrt().ceil() as u64).max(2)
}

/// Frequencies of `r_s(A, n) = d` for `d <= d_max`, plus an overflow bucket.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub counts: Vec<u64>,
    pub overflow: u64,
}

impl EmpiricalDistribution {
    pub fn from_histogram(histogram: &BTreeMap<u32, u64>, d_max: u32) -> Self {
        let mut counts = vec![0u64; d_max as usize + 1];
        let mut overflow = 0;
        for (&d, &c) in histogram {
            match counts.get_mut(d as usize) {
                Some(slot) => *slot += c,
                None => overflow += c,
            }
        }
        Self { counts, overflow }
    }

    pub fn d_max(&self) -> u32 {
        self.counts.len() as u32 - 1
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.overflow
    }

    /// `counts[d] / total` for `d <= d_max`, then the overflow share.
    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.counts
            .iter()
            .chain(std::iter::once(&self.overflow))
            .map(|&c| c as f64 / total)
            .collect()
    }
}

/// Histogram `d ↦ #{n ∈ [n_min, N] : r_s(A, n) = d}`.
pub fn rep_histogram(table: &RepCountTable, n_min: u64) -> Result<BTreeMap<u32, u64>> {
    if n_min < 1 {
        return Err(domain("n_min must be at least 1"));
    }
    if n_min > table.limit_n {
        return Err(Error::NoData(format!("n_min {n_min} exceeds N = {}", table.limit_n)));
    }
    let mut hist = BTreeMap::new();
    for &c in &table.counts()[n_min as usize..] {
        *hist.entry(c).or_insert(0) += 1;
    }
    Ok(hist)
}

pub fn poisson_profile(table: &RepCountTable, n_min: u64, d_max: u32) -> Result<EmpiricalDistribution> {
    Ok(EmpiricalDistribution::from_histogram(&rep_histogram(table, n_min)?, d_max))
}

/// Poisson(λ) masses for `d <= d_max` followed by the tail mass, matching
/// the layout of [`EmpiricalDistribution::frequencies`].
pub fn poisson_reference(lambda: f64, d_max: u32) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = (0..=u64::from(d_max)).map(|d| poisson_pmf(lambda, d)).collect::<Result<_>>()?;
    let mut tail = CompensatedSum::default();
    let mut d = u64::from(d_max) + 1;
    loop {
        let p = poisson_pmf(lambda, d)?;
        tail.add(p);
        if (p < 1e-20 && d as f64 > lambda) || d > u64::from(d_max) + 10_000 {
            break;
        }
        d += 1;
    }
    out.push(tail.value());
    Ok(out)
}

/// `½ Σ |p_d - q_d|`, zero-extending the shorter vector.
pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    for (name, v) in [("p", p), ("q", q)] {
        let total: f64 = v.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Precondition(format!("{name} sums to {total}, not 1")));
        }
    }
    let len = p.len().max(q.len());
    let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    let l1: f64 = (0..len).map(|k| (at(p, k) - at(q, k)).abs()).sum();
    Ok((0.5 * l1).clamp(0.0, 1.0))
}

/// `|sA ∩ [n_min, N]| / (N - n_min + 1)`.
pub fn sumset_density(profile: &SumsetProfile, n_min: u64) -> Result<f64> {
    if n_min < 1 || n_min > profile.limit_n {
        return Err(domain(format!("n_min must lie in [1, {}], got {n_min}", profile.limit_n)));
    }
    let span = profile.limit_n - n_min + 1;
    Ok(profile.count_between(n_min, profile.limit_n) as f64 / span as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// Least-squares slope of `ln p` against `ln i`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub used: usize,
    /// Points dropped because their probability was zero.
    pub excluded: usize,
}

/// Unweighted log-log least squares over `(i, p)` points.
pub fn exponent_fit(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 3 {
        return Err(domain(format!("exponent fit needs at least 3 points, got {}", points.len())));
    }
    if let Some(&(x, p)) = points.iter().find(|&&(x, p)| x.is_nan() || x <= 0.0 || p.is_nan() || p < 0.0 || p.is_infinite()) {
        return Err(domain(format!("invalid fit point ({x}, {p})")));
    }
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, p)| p > 0.0)
        .map(|&(x, p)| (x.ln(), p.ln()))
        .collect();
    let excluded = points.len() - usable.len();
    if usable.len() < 2 {
        return Err(Error::NoData(format!("{excluded} of {} points have zero probability", points.len())));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(domain("exponent fit needs at least two distinct abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = usable.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(ExponentFit {
        slope,
        intercept,
        r_squared,
        used: usable.len(),
        excluded,
    })
}

/// Parameters of one simulated trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialParams {
    pub s: u32,
    pub limit_n: u64,
    pub seed: u64,
    pub trial_index: u64,
    /// Burn-in for the histogram and density.
    pub n_min: u64,
    /// Smallest left endpoint considered for the gap maximum.
    pub min_b: u64,
}

impl TrialParams {
    pub fn new(s: u32, limit_n: u64, seed: u64, trial_index: u64) -> Self {
        Self {
            s,
            limit_n,
            seed,
            trial_index,
            n_min: default_n_min(limit_n),
            min_b: default_min_b(limit_n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub s: u32,
    pub limit_n: u64,
    pub seed: u64,
    pub trial_index: u64,
    pub n_min: u64,
    pub min_b: u64,
    pub sequence_size: u64,
    pub sumset_density: f64,
    pub max_normalized_gap: Option<f64>,
    pub widest_gap: Option<GapRecord>,
    pub rep_histogram: BTreeMap<u32, u64>,
}

/// Sample `A`, sieve `sA`, and collect the per-trial statistics.
pub fn run_trial(params: &TrialParams) -> Result<TrialReport> {
    let (report, _) = run_trial_keep_profile(params)?;
    Ok(report)
}

/// Like [`run_trial`], also returning the sumset for export.
pub fn run_trial_keep_profile(params: &TrialParams) -> Result<(TrialReport, SumsetProfile)> {
    let seq = sample_sequence(params.s, params.limit_n, params.seed, params.trial_index)?;
    let profile = sumset(seq.elements(), params.s, params.limit_n)?;
    let table = representation_counts(seq.elements(), params.s, params.limit_n)?;
    let widest = widest_normalized_gap(&profile, params.min_b.max(2));
    let report = TrialReport {
        s: params.s,
        limit_n: params.limit_n,
        seed: params.seed,
        trial_index: params.trial_index,
        n_min: params.n_min,
        min_b: params.min_b,
        sequence_size: seq.len() as u64,
        sumset_density: sumset_density(&profile, params.n_min)?,
        max_normalized_gap: widest.map(|g| g.normalized),
        widest_gap: widest,
        rep_histogram: rep_histogram(&table, params.n_min)?,
    };
    Ok((report, profile))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation over `√count`; zero for a single value.
    pub std_error: f64,
}

impl StatSummary {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().copied().collect::<CompensatedSum>().value() / n;
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            0.5 * (sorted[mid - 1] + sorted[mid])
        };
        let std_error = if values.len() > 1 {
            let ss = values.iter().map(|v| (v - mean).powi(2)).collect::<CompensatedSum>().value();
            (ss / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        };
        Some(Self {
            count: values.len(),
            mean,
            median,
            std_error,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub s: u32,
    pub limit_n: u64,
    pub trials: usize,
    pub sequence_size: StatSummary,
    pub sumset_density: StatSummary,
    /// Absent when no trial had a gap above its `min_b`.
    pub max_normalized_gap: Option<StatSummary>,
    pub pooled_histogram: BTreeMap<u32, u64>,
}

/// Combine reports sharing `(s, N)`. Reports are ordered by
/// `(seed, trial_index)` first, so the result does not depend on arrival order.
pub fn aggregate(reports: &[TrialReport]) -> Result<Summary> {
    let first = reports.first().ok_or_else(|| Error::NoData("no trial reports".into()))?;
    if let Some(r) = reports.iter().find(|r| (r.s, r.limit_n) != (first.s, first.limit_n)) {
        return Err(Error::Precondition(format!(
            "mixed parameters: (s={}, N={}) vs (s={}, N={})",
            first.s, first.limit_n, r.s, r.limit_n
        )));
    }
    let mut sorted: Vec<&TrialReport> = reports.iter().collect();
    sorted.sort_by_key(|r| (r.seed, r.trial_index));
    let sizes: Vec<f64> = sorted.iter().map(|r| r.sequence_size as f64).collect();
    let densities: Vec<f64> = sorted.iter().map(|r| r.sumset_density).collect();
    let gaps: Vec<f64> = sorted.iter().filter_map(|r| r.max_normalized_gap).collect();
    let mut pooled = BTreeMap::new();
    for r in &sorted {
        for (&d, &c) in &r.rep_histogram {
            *pooled.entry(d).or_insert(0) += c;
        }
    }
    Ok(Summary {
        s: first.s,
        limit_n: first.limit_n,
        trials: sorted.len(),
        sequence_size: StatSummary::of(&sizes).expect("non-empty"),
        sumset_density: StatSummary::of(&densities).expect("non-empty"),
        max_normalized_gap: StatSummary::of(&gaps),
        pooled_histogram: pooled,
    })
}
