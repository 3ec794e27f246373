//! Exact finite-universe probability machinery.
//!
//! A *support* `ω` is a set of distinct positive integers and `E_ω` is the
//! event `ω ⊆ A`, so `P(E_ω) = Π_{x ∈ ω} p_x`. `σ(ω)` is the set of sums
//! `a_1 x_1 + … + a_r x_r` with every `a_i >= 1` and `Σ a_i = s`, i.e. the
//! s-fold sums that use every element of `ω`. For a target `z`,
//! `Ω_z = {ω : z ∈ σ(ω)}`; for an interval `I`, `Ω_I` collects the supports
//! whose `σ` meets `I`. The gap event `F = {sA ∩ I = ∅}` is exactly
//! `⋂_{ω ∈ Ω_I} E_ω^c`.

mod exact;
mod janson;
mod lemma;
mod random;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::sampler::InclusionLaw;
use crate::sum::CompensatedSum;

pub use exact::{
    exact_family_avoidance, exact_gap_probability, montecarlo_avoidance, montecarlo_gap_probability,
    McEstimate, EXACT_UNIVERSE_LIMIT,
};
pub use janson::{
    independent_product, janson_bounds, pairwise_dependence_sum, pairwise_dependence_sum_with,
    related, JansonBounds,
};
pub use lemma::{lemma_sum_i, lemma_sum_ii, lemma_sum_iii, LemmaSumResult};
pub use random::{random_system, RandomSystemSpec};

/// One way of writing `target = Σ coeffs[k] · xs[k]` with `Σ coeffs = s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepPattern {
    pub xs: Vec<u64>,
    pub coeffs: Vec<u32>,
    pub target: u64,
}

impl RepPattern {
    /// Collapse a non-decreasing tuple into distinct values and multiplicities.
    pub fn from_tuple(tuple: &[u64]) -> Self {
        let mut xs: Vec<u64> = Vec::new();
        let mut coeffs: Vec<u32> = Vec::new();
        for &x in tuple {
            if xs.last() == Some(&x) {
                *coeffs.last_mut().unwrap() += 1;
            } else {
                xs.push(x);
                coeffs.push(1);
            }
        }
        Self {
            target: tuple.iter().sum(),
            xs,
            coeffs,
        }
    }

    pub fn s(&self) -> u32 {
        self.coeffs.iter().sum()
    }
}

/// A support `ω` together with `P(E_ω)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaSet {
    /// Strictly increasing.
    pub support: Vec<u64>,
    pub prob: f64,
}

impl OmegaSet {
    pub fn new(support: Vec<u64>, law: &InclusionLaw) -> Self {
        let prob = support_probability(&support, law);
        Self { support, prob }
    }

    /// `ω ∼ ω'`: the supports intersect but differ.
    pub fn is_related(&self, other: &OmegaSet) -> bool {
        related(&self.support, &other.support)
    }
}

pub(crate) fn support_probability(support: &[u64], law: &InclusionLaw) -> f64 {
    support.iter().map(|&x| law.probability(x)).product()
}

/// `σ(ω)`: all `Σ a_k x_k` with `a_k >= 1`, `Σ a_k = s`, sorted.
pub fn sigma(support: &[u64], s: u32) -> Vec<u64> {
    fn rec(support: &[u64], parts_left: u32, partial: u64, out: &mut Vec<u64>) {
        let Some((&x, rest)) = support.split_first() else {
            if parts_left == 0 {
                out.push(partial);
            }
            return;
        };
        // leave at least one part for each remaining element
        let max_here = parts_left.saturating_sub(rest.len() as u32);
        for a in 1..=max_here {
            rec(rest, parts_left - a, partial + u64::from(a) * x, out);
        }
    }
    let mut out = Vec::new();
    if !support.is_empty() && support.len() as u32 <= s {
        rec(support, s, 0, &mut out);
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Visit every non-decreasing s-tuple with parts in `[1, cap]` summing to `z`.
pub fn for_each_tuple<F: FnMut(&[u64])>(z: u64, s: u32, cap: u64, mut visit: F) {
    fn rec<F: FnMut(&[u64])>(tuple: &mut Vec<u64>, left: u32, rem: u64, cap: u64, visit: &mut F) {
        let lo = tuple.last().copied().unwrap_or(1);
        if left == 1 {
            if rem >= lo && rem <= cap {
                tuple.push(rem);
                visit(tuple);
                tuple.pop();
            }
            return;
        }
        let k = u64::from(left);
        // x <= rem / k keeps the tuple non-decreasing; the rest must fit under cap
        let hi = (rem / k).min(cap);
        let lo = lo.max(rem.saturating_sub((k - 1) * cap));
        for x in lo..=hi {
            tuple.push(x);
            rec(tuple, left - 1, rem - x, cap, visit);
            tuple.pop();
        }
    }
    if s == 0 || z < u64::from(s) || cap == 0 {
        return;
    }
    let mut tuple = Vec::with_capacity(s as usize);
    rec(&mut tuple, s, z, cap, &mut visit);
}

/// All representation patterns of `z` with parts `<= cap`.
pub fn rep_patterns(z: u64, s: u32, cap: u64) -> Vec<RepPattern> {
    let mut out = Vec::new();
    for_each_tuple(z, s, cap, |t| out.push(RepPattern::from_tuple(t)));
    out
}

fn collect_supports(z: u64, s: u32, cap: u64, into: &mut HashSet<Vec<u64>>) {
    for_each_tuple(z, s, cap, |t| {
        let mut support = t.to_vec();
        support.dedup();
        into.insert(support);
    });
}

/// `Ω_z` restricted to supports in `[1, cap]`, lexicographically sorted and
/// duplicate-free.
pub fn enumerate_omega_with(z: u64, law: &InclusionLaw, cap: u64) -> Vec<OmegaSet> {
    let mut supports = HashSet::new();
    collect_supports(z, law.s(), cap, &mut supports);
    let mut supports: Vec<Vec<u64>> = supports.into_iter().collect();
    supports.sort_unstable();
    supports.into_iter().map(|w| OmegaSet::new(w, law)).collect()
}

/// `Ω_z` under the power-law inclusion probabilities.
pub fn enumerate_omega(z: u64, s: u32, cap: u64) -> Result<Vec<OmegaSet>> {
    Ok(enumerate_omega_with(z, &InclusionLaw::pseudo_power(s)?, cap))
}

/// `Σ_{ω ∈ Ω_z} P(E_ω)` with supports ranging over `[1, z]`.
pub fn omega_probability_sum(z: u64, s: u32) -> Result<f64> {
    let law = InclusionLaw::pseudo_power(s)?;
    omega_probability_sum_with(z, &law)
}

pub fn omega_probability_sum_with(z: u64, law: &InclusionLaw) -> Result<f64> {
    if z < u64::from(law.s()) {
        return Err(domain(format!("omega_probability_sum requires z >= s, got z={z}")));
    }
    let family = enumerate_omega_with(z, law, z);
    let mut probs: Vec<f64> = family.iter().map(|w| w.prob).collect();
    probs.sort_unstable_by(f64::total_cmp);
    Ok(probs.into_iter().collect::<CompensatedSum>().value())
}

/// The integer window `[i, i + α ln i]`, or an explicit list of targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSpec {
    pub i: u64,
    pub alpha: Option<f64>,
    /// Strictly increasing.
    pub members: Vec<u64>,
}

impl IntervalSpec {
    /// Integers `z` with `i <= z <= i + α ln i`.
    pub fn new(i: u64, alpha: f64) -> Result<Self> {
        if i < 2 {
            return Err(domain(format!("interval left endpoint must be >= 2, got {i}")));
        }
        if alpha.is_nan() || alpha <= 0.0 || alpha.is_infinite() {
            return Err(domain(format!("alpha must be positive, got {alpha}")));
        }
        let top = (i as f64 + alpha * (i as f64).ln()).floor() as u64;
        Ok(Self {
            i,
            alpha: Some(alpha),
            members: (i..=top.max(i)).collect(),
        })
    }

    pub fn explicit(members: &[u64]) -> Self {
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        Self {
            i: members.first().copied().unwrap_or(0),
            alpha: None,
            members,
        }
    }

    pub fn single(z: u64) -> Self {
        Self::explicit(&[z])
    }

    /// `i + ⌈α ln i⌉`, the universe sampled for this window.
    pub fn universe(&self) -> u64 {
        match self.alpha {
            Some(alpha) => self.i + (alpha * (self.i as f64).ln()).ceil() as u64,
            None => self.members.last().copied().unwrap_or(0),
        }
    }

    pub fn max_member(&self) -> Option<u64> {
        self.members.last().copied()
    }
}

/// A duplicate-free family of supports attached to a window.
#[derive(Debug, Clone)]
pub struct EventSystem {
    pub s: u32,
    pub universe_cap: u64,
    pub family: Vec<OmegaSet>,
    pub interval: IntervalSpec,
    law: InclusionLaw,
}

impl EventSystem {
    pub fn law(&self) -> &InclusionLaw {
        &self.law
    }

    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }
}

/// `Ω_I` over supports in `[1, cap]`: the union of `Ω_z` for `z ∈ I`.
pub fn build_system(law: &InclusionLaw, universe_cap: u64, interval: IntervalSpec) -> Result<EventSystem> {
    if universe_cap < 1 {
        return Err(domain("universe cap must be at least 1"));
    }
    let mut supports = HashSet::new();
    for &z in &interval.members {
        collect_supports(z, law.s(), universe_cap, &mut supports);
    }
    let family: BTreeMap<Vec<u64>, ()> = supports.into_iter().map(|w| (w, ())).collect();
    Ok(EventSystem {
        s: law.s(),
        universe_cap,
        family: family.into_keys().map(|w| OmegaSet::new(w, law)).collect(),
        interval,
        law: law.clone(),
    })
}

/// `Ω_{I_i}` for `I_i = [i, i + α ln i]` under the power law.
pub fn build_interval_system(i: u64, alpha: f64, s: u32, universe_cap: u64) -> Result<EventSystem> {
    let law = InclusionLaw::pseudo_power(s)?;
    build_system(&law, universe_cap, IntervalSpec::new(i, alpha)?)
}

pub(crate) fn guard(cap: u64) -> Result<()> {
    if cap > EXACT_UNIVERSE_LIMIT {
        Err(Error::Guard {
            cap,
            limit: EXACT_UNIVERSE_LIMIT,
        })
    } else {
        Ok(())
    }
}
