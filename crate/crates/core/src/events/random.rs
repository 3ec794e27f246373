//! Seeded generator of small event systems for sandwich and Monte Carlo checks.

use serde::{Deserialize, Serialize};

use super::{build_system, EventSystem, IntervalSpec};
use crate::error::{domain, Result};
use crate::sampler::{InclusionLaw, TrialStream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSystemSpec {
    /// Exponents to draw `s` from.
    pub s_choices: Vec<u32>,
    /// Universe caps are drawn from `[min_cap, max_cap]`.
    pub min_cap: u64,
    pub max_cap: u64,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

impl Default for RandomSystemSpec {
    fn default() -> Self {
        Self {
            s_choices: vec![2, 3],
            min_cap: 3,
            max_cap: 20,
            alpha_min: 0.25,
            alpha_max: 3.0,
        }
    }
}

/// System number `index` of the stream keyed by `seed`: a cap `M`, a window
/// `[i, i + α ln i]` with `2 <= i <= sM`, and `Ω_I` over `[1, M]`.
pub fn random_system(spec: &RandomSystemSpec, seed: u64, index: u64) -> Result<EventSystem> {
    if spec.s_choices.is_empty() || spec.min_cap < 1 || spec.min_cap > spec.max_cap {
        return Err(domain(format!("invalid random system spec {spec:?}")));
    }
    let mut rng = TrialStream::new(seed, index);
    let s = spec.s_choices[rng.range_inclusive(0, spec.s_choices.len() as u64 - 1) as usize];
    let law = InclusionLaw::pseudo_power(s)?;
    let cap = rng.range_inclusive(spec.min_cap, spec.max_cap);
    let i = rng.range_inclusive(2, (u64::from(s) * cap).max(2));
    let alpha = spec.alpha_min + (spec.alpha_max - spec.alpha_min) * rng.uniform();
    build_system(&law, cap, IntervalSpec::new(i, alpha)?)
}
