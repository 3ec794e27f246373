//! Dependence sums and Janson's correlation bounds.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{enumerate_omega_with, support_probability, EventSystem, OmegaSet};
use crate::error::{domain, Error, Result};
use crate::sampler::InclusionLaw;
use crate::sum::CompensatedSum;

/// `ω ∼ ω'`: sorted supports that intersect but are not equal.
pub fn related(a: &[u64], b: &[u64]) -> bool {
    if a == b {
        return false;
    }
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

fn union(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out.sort_unstable();
    out.dedup();
    out
}

/// Element → indices of the supports containing it.
fn element_index(family: &[OmegaSet]) -> HashMap<u64, Vec<usize>> {
    let mut index: HashMap<u64, Vec<usize>> = HashMap::new();
    for (k, w) in family.iter().enumerate() {
        for &x in &w.support {
            index.entry(x).or_default().push(k);
        }
    }
    index
}

/// `Σ P(E_ω ∩ E_ω')` over unordered related pairs inside one family.
fn family_dependence(family: &[OmegaSet], law: &InclusionLaw) -> f64 {
    let index = element_index(family);
    let mut terms = Vec::new();
    let mut marker = vec![usize::MAX; family.len()];
    for (a, w) in family.iter().enumerate() {
        for x in &w.support {
            for &b in &index[x] {
                if b > a && marker[b] != a {
                    marker[b] = a;
                    terms.push(support_probability(&union(&w.support, &family[b].support), law));
                }
            }
        }
    }
    terms.sort_unstable_by(f64::total_cmp);
    terms.into_iter().collect::<CompensatedSum>().value()
}

/// `Σ_{ω ∼ ω', ω ∈ Ω_z, ω' ∈ Ω_{z'}} P(E_ω ∩ E_ω')`, each unordered pair once.
pub fn pairwise_dependence_sum(z: u64, z_prime: u64, s: u32) -> Result<f64> {
    pairwise_dependence_sum_with(z, z_prime, &InclusionLaw::pseudo_power(s)?)
}

pub fn pairwise_dependence_sum_with(z: u64, z_prime: u64, law: &InclusionLaw) -> Result<f64> {
    let s = u64::from(law.s());
    if !(s <= z && z <= z_prime) {
        return Err(domain(format!("need s <= z <= z', got z={z}, z'={z_prime}")));
    }
    let left = enumerate_omega_with(z, law, z_prime);
    if z == z_prime {
        return Ok(family_dependence(&left, law));
    }
    let right = enumerate_omega_with(z_prime, law, z_prime);
    let in_left: HashSet<&[u64]> = left.iter().map(|w| w.support.as_slice()).collect();
    let in_right: HashSet<&[u64]> = right.iter().map(|w| w.support.as_slice()).collect();
    let index = element_index(&right);
    let mut terms = Vec::new();
    let mut marker = vec![usize::MAX; right.len()];
    for (a, w) in left.iter().enumerate() {
        for x in &w.support {
            let Some(hits) = index.get(x) else { continue };
            for &b in hits {
                if marker[b] == a {
                    continue;
                }
                marker[b] = a;
                let v = &right[b].support;
                if *v == w.support {
                    continue;
                }
                // both supports sit in both families: count {ω, ω'} once
                let mirrored = in_left.contains(v.as_slice()) && in_right.contains(w.support.as_slice());
                if mirrored && v < &w.support {
                    continue;
                }
                terms.push(support_probability(&union(&w.support, v), law));
            }
        }
    }
    terms.sort_unstable_by(f64::total_cmp);
    Ok(terms.into_iter().collect::<CompensatedSum>().value())
}

/// `Π_{ω} (1 - P(E_ω))`; the empty product is 1.
pub fn independent_product(system: &EventSystem) -> f64 {
    system.family.iter().map(|w| 1.0 - w.prob).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JansonBounds {
    pub lower: f64,
    pub upper: f64,
    /// `Σ_{ω ∼ ω'} P(E_ω ∩ E_ω')` over unordered pairs.
    pub dependence_sum: f64,
}

/// `Π P(E_ω^c) <= P(⋂ E_ω^c) <= Π P(E_ω^c) · exp(2 Σ_{ω∼ω'} P(E_ω ∩ E_ω'))`,
/// valid when every `P(E_ω) <= 1/2`.
pub fn janson_bounds(system: &EventSystem) -> Result<JansonBounds> {
    if let Some(w) = system.family.iter().find(|w| w.prob > 0.5) {
        return Err(Error::Precondition(format!(
            "P(E_ω) = {} > 1/2 for support {:?}",
            w.prob, w.support
        )));
    }
    let lower = independent_product(system);
    let dependence_sum = family_dependence(&system.family, system.law());
    Ok(JansonBounds {
        lower,
        upper: lower * (2.0 * dependence_sum).exp(),
        dependence_sum,
    })
}
