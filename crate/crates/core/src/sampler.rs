//! Seeded sampling of pseudo s-th power sequences.
//!
//! Every `n` in `[1, N]` consumes exactly one uniform draw, in increasing
//! order, from a ChaCha8 stream keyed by the run seed with the trial index
//! as the stream id. The resulting set depends only on
//! `(s, N, seed, trial_index)`, never on scheduling.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{domain, Error, Result};
use crate::model::{membership_probability, power_law_probability};

type ProbabilityFn = dyn Fn(u64) -> f64 + Send + Sync;

/// Per-integer inclusion probability `n ↦ P(n ∈ A)`.
///
/// Normally `(1/s) n^{-1+1/s}`; tests may replace it with an arbitrary
/// function through [`InclusionLaw::with_override`].
#[derive(Clone)]
pub struct InclusionLaw {
    s: u32,
    custom: Option<Arc<ProbabilityFn>>,
}

impl InclusionLaw {
    pub fn pseudo_power(s: u32) -> Result<Self> {
        membership_probability(1, s)?;
        Ok(Self { s, custom: None })
    }

    /// Replace `p(n)` by `f(n)` while keeping the exponent `s` for sums.
    pub fn with_override<F>(mut self, f: F) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        self.custom = Some(Arc::new(f));
        self
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn is_overridden(&self) -> bool {
        self.custom.is_some()
    }

    #[inline]
    pub fn probability(&self, n: u64) -> f64 {
        match &self.custom {
            Some(f) => f(n),
            None => power_law_probability(n, self.s),
        }
    }
}

impl fmt::Debug for InclusionLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InclusionLaw")
            .field("s", &self.s)
            .field("overridden", &self.custom.is_some())
            .finish()
    }
}

/// Uniform stream for one trial.
///
/// ChaCha8 keyed by `seed` (expanded with `SeedableRng::seed_from_u64`),
/// stream id `trial_index`; each draw takes the top 53 bits of one `u64`.
#[derive(Debug, Clone)]
pub struct TrialStream {
    rng: ChaCha8Rng,
}

impl TrialStream {
    pub fn new(seed: u64, trial_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial_index);
        Self { rng }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        let span = hi - lo + 1;
        lo + ((u128::from(self.next_u64()) * u128::from(span)) >> 64) as u64
    }
}

/// One realization of `A ∩ [1, N]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoSequence {
    pub s: u32,
    pub limit_n: u64,
    pub seed: u64,
    pub trial_index: u64,
    elements: Vec<u64>,
}

impl PseudoSequence {
    /// Strictly increasing members of `A ∩ [1, N]`.
    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn header(&self) -> String {
        format!(
            "# s={} N={} seed={} trial={}",
            self.s, self.limit_n, self.seed, self.trial_index
        )
    }

    /// Header line followed by one decimal element per line.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.header())?;
        for a in &self.elements {
            writeln!(out, "{a}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let bad = |m: &str| Error::Precondition(format!("malformed sequence file: {m}"));
        let header = lines
            .next()
            .ok_or_else(|| bad("missing header"))?
            .map_err(|e| bad(&e.to_string()))?;
        let rest = header.strip_prefix("# ").ok_or_else(|| bad("header must start with '# '"))?;
        let (mut s, mut n, mut seed, mut trial) = (None, None, None, None);
        for field in rest.split_whitespace() {
            let (key, value) = field.split_once('=').ok_or_else(|| bad(field))?;
            let slot = match key {
                "s" => {
                    s = Some(value.parse::<u32>().map_err(|_| bad(field))?);
                    continue;
                }
                "N" => &mut n,
                "seed" => &mut seed,
                "trial" => &mut trial,
                _ => return Err(bad(field)),
            };
            *slot = Some(value.parse::<u64>().map_err(|_| bad(field))?);
        }
        let mut elements = Vec::new();
        for line in lines {
            let line = line.map_err(|e| bad(&e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            elements.push(line.trim().parse::<u64>().map_err(|_| bad(&line))?);
        }
        let seq = Self {
            s: s.ok_or_else(|| bad("missing s"))?,
            limit_n: n.ok_or_else(|| bad("missing N"))?,
            seed: seed.ok_or_else(|| bad("missing seed"))?,
            trial_index: trial.ok_or_else(|| bad("missing trial"))?,
            elements,
        };
        let increasing = seq.elements.windows(2).all(|w| w[0] < w[1]);
        let in_range = seq.elements.iter().all(|&a| (1..=seq.limit_n).contains(&a));
        if !increasing || !in_range {
            return Err(bad("elements must be strictly increasing within [1, N]"));
        }
        Ok(seq)
    }
}

/// Sample `A ∩ [1, limit_n]` with `P(n ∈ A) = (1/s) n^{-1+1/s}`.
pub fn sample_sequence(s: u32, limit_n: u64, seed: u64, trial_index: u64) -> Result<PseudoSequence> {
    let law = InclusionLaw::pseudo_power(s)?;
    sample_with_law(&law, limit_n, seed, trial_index)
}

/// Sample under an arbitrary inclusion law.
pub fn sample_with_law(
    law: &InclusionLaw,
    limit_n: u64,
    seed: u64,
    trial_index: u64,
) -> Result<PseudoSequence> {
    if limit_n < 1 {
        return Err(domain("limit_n must be at least 1"));
    }
    let mut stream = TrialStream::new(seed, trial_index);
    let mut elements = Vec::with_capacity(expected_len_hint(law, limit_n));
    for n in 1..=limit_n {
        if stream.uniform() < law.probability(n) {
            elements.push(n);
        }
    }
    Ok(PseudoSequence {
        s: law.s(),
        limit_n,
        seed,
        trial_index,
        elements,
    })
}

fn expected_len_hint(law: &InclusionLaw, limit_n: u64) -> usize {
    if law.is_overridden() {
        return 0;
    }
    let root = (limit_n as f64).powf(1.0 / f64::from(law.s()));
    (root * 1.2) as usize + 16
}

/// `Σ_{n ≤ N} P(n ∈ A)`.
pub fn expected_count(s: u32, limit_n: u64) -> Result<f64> {
    membership_probability(1, s)?;
    if limit_n < 1 {
        return Err(domain("limit_n must be at least 1"));
    }
    // smallest terms first
    Ok((1..=limit_n).rev().map(|n| power_law_probability(n, s)).sum())
}

/// `Σ_{n ≤ N} p(n)(1 - p(n))`, the variance of `|A ∩ [1, N]|`.
pub fn count_variance(s: u32, limit_n: u64) -> Result<f64> {
    membership_probability(1, s)?;
    Ok((1..=limit_n)
        .rev()
        .map(|n| {
            let p = power_law_probability(n, s);
            p * (1.0 - p)
        })
        .sum())
}
