//! Exact and Monte Carlo probabilities of the gap event `sA ∩ I = ∅`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{guard, EventSystem, IntervalSpec};
use crate::bitset::Bitset;
use crate::error::{domain, Result};
use crate::sampler::{InclusionLaw, TrialStream};
use crate::sumset::sumset;

/// Largest universe `[1, M]` enumerated exhaustively (`2^26` subsets).
pub const EXACT_UNIVERSE_LIMIT: u64 = 26;

/// Tests whether the s-fold sumset of a set meets a fixed target set.
struct HitTest {
    s: u32,
    max_target: u64,
    targets: Bitset,
    /// targets as a bitmask when every target is below 128
    small: Option<u128>,
}

impl HitTest {
    fn new(s: u32, members: &[u64]) -> Self {
        let max_target = members.last().copied().unwrap_or(0);
        let mut targets = Bitset::new(max_target as usize + 1);
        for &z in members {
            targets.set(z as usize);
        }
        let small = (max_target < 128).then(|| members.iter().fold(0u128, |m, &z| m | 1 << z));
        Self {
            s,
            max_target,
            targets,
            small,
        }
    }

    /// `elements` is sorted and holds only values `<= max_target`.
    fn hits(&self, elements: &[u64]) -> bool {
        if elements.is_empty() {
            return false;
        }
        if let Some(mask) = self.small {
            return sumset_mask(elements, self.s) & mask != 0;
        }
        let profile = sumset(elements, self.s, self.max_target).expect("elements lie within the window");
        profile.membership().intersects(&self.targets)
    }
}

/// s-fold sumset of `elements` as a bitmask over `[0, 128)`.
fn sumset_mask(elements: &[u64], s: u32) -> u128 {
    let base = elements.iter().filter(|&&a| a < 128).fold(0u128, |m, &a| m | 1 << a);
    let mut current = base;
    for _ in 1..s {
        let mut next = 0u128;
        for &a in elements {
            if a >= 128 {
                break;
            }
            next |= current << a;
        }
        current = next;
        if current == 0 {
            break;
        }
    }
    current
}

/// Elements of `[1, cap]` that can take part in a sum landing in the window.
/// Anything else is marginalized out (its weights sum to one).
#[allow(clippy::reversed_empty_ranges)]
fn relevant_range(s: u32, cap: u64, members: &[u64]) -> std::ops::RangeInclusive<u64> {
    let (Some(&lo_t), Some(&hi_t)) = (members.first(), members.last()) else {
        return 1..=0;
    };
    let others = u64::from(s - 1);
    let hi = cap.min(hi_t.saturating_sub(others));
    // with every other part at most hi, x must still reach lo_t
    let lo = lo_t.saturating_sub(others * hi).max(1);
    lo..=hi
}

/// `P(sA ∩ I = ∅)` for `A` drawn from `[1, M]`, by weighted enumeration of
/// all subsets. Subtrees are cut as soon as the partial set already hits `I`.
pub fn exact_gap_probability(law: &InclusionLaw, universe_cap: u64, interval: &IntervalSpec) -> Result<f64> {
    guard(universe_cap)?;
    let members = &interval.members;
    let relevant: Vec<u64> = relevant_range(law.s(), universe_cap, members).collect();
    if relevant.is_empty() {
        return Ok(1.0);
    }
    let test = HitTest::new(law.s(), members);
    let probs: Vec<f64> = relevant.iter().map(|&n| law.probability(n)).collect();
    let mut chosen = Vec::with_capacity(relevant.len());
    Ok(avoid_rec(&relevant, &probs, 0, &mut chosen, &test))
}

fn avoid_rec(relevant: &[u64], probs: &[f64], k: usize, chosen: &mut Vec<u64>, test: &HitTest) -> f64 {
    if k == relevant.len() {
        return 1.0;
    }
    let p = probs[k];
    let without = if p < 1.0 {
        (1.0 - p) * avoid_rec(relevant, probs, k + 1, chosen, test)
    } else {
        0.0
    };
    let mut with = 0.0;
    if p > 0.0 {
        chosen.push(relevant[k]);
        if !test.hits(chosen) {
            with = p * avoid_rec(relevant, probs, k + 1, chosen, test);
        }
        chosen.pop();
    }
    without + with
}

/// `P(⋂_{ω ∈ family} E_ω^c)` by enumerating subsets of `[1, M]` against the
/// family itself rather than against sums.
pub fn exact_family_avoidance(system: &EventSystem) -> Result<f64> {
    guard(system.universe_cap)?;
    let cap = system.universe_cap as usize;
    let masks: Vec<u32> = system
        .family
        .iter()
        .map(|w| w.support.iter().fold(0u32, |m, &x| m | 1 << (x - 1)))
        .collect();
    // supports grouped by their largest element, checked when it is added
    let mut closing: Vec<Vec<u32>> = vec![Vec::new(); cap + 1];
    for (w, &m) in system.family.iter().zip(&masks) {
        closing[*w.support.last().unwrap() as usize].push(m);
    }
    let used: Vec<usize> = (1..=cap).filter(|&n| !closing[n].is_empty() || masks.iter().any(|m| m >> (n - 1) & 1 == 1)).collect();
    let probs: Vec<f64> = used.iter().map(|&n| system.law().probability(n as u64)).collect();
    fn rec(used: &[usize], probs: &[f64], closing: &[Vec<u32>], k: usize, mask: u32) -> f64 {
        if k == used.len() {
            return 1.0;
        }
        let p = probs[k];
        let n = used[k];
        let without = (1.0 - p) * rec(used, probs, closing, k + 1, mask);
        let grown = mask | 1 << (n - 1);
        let blocked = closing[n].iter().any(|&m| m & !grown == 0);
        let with = if blocked { 0.0 } else { p * rec(used, probs, closing, k + 1, grown) };
        without + with
    }
    Ok(rec(&used, &probs, &closing, 0, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// `sqrt(p̂ (1 - p̂) / trials)`.
    pub std_error: f64,
    pub avoided: u64,
    pub trials: u64,
}

impl McEstimate {
    fn from_counts(avoided: u64, trials: u64) -> Self {
        let p = avoided as f64 / trials as f64;
        Self {
            estimate: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            avoided,
            trials,
        }
    }
}

/// Fraction of sampled sets `A ⊆ [1, universe]` whose s-fold sumset avoids
/// the window. Trial `t` uses stream `(seed, t)`, so the estimate does not
/// depend on how trials are spread over threads.
pub fn montecarlo_avoidance(
    law: &InclusionLaw,
    universe: u64,
    interval: &IntervalSpec,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials < 1 {
        return Err(domain("need at least one trial"));
    }
    let test = HitTest::new(law.s(), &interval.members);
    // draws above the window cannot matter and are not consumed
    let top = universe.min(test.max_target);
    let probs: Vec<f64> = (1..=top).map(|n| law.probability(n)).collect();
    let avoided = (0..trials)
        .into_par_iter()
        .map_init(Vec::new, |elements, t| {
            let mut stream = TrialStream::new(seed, t);
            elements.clear();
            for (n, &p) in (1u64..).zip(&probs) {
                if stream.uniform() < p {
                    elements.push(n);
                }
            }
            u64::from(!test.hits(elements))
        })
        .sum();
    Ok(McEstimate::from_counts(avoided, trials))
}

/// Monte Carlo estimate of `P(F_i)` for `I_i = [i, i + α ln i]`, sampling
/// `A ⊆ [1, i + ⌈α ln i⌉]`.
pub fn montecarlo_gap_probability(
    law: &InclusionLaw,
    i: u64,
    alpha: f64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    let interval = IntervalSpec::new(i, alpha)?;
    montecarlo_avoidance(law, interval.universe(), &interval, trials, seed)
}
