//! Simulation and exact-verification toolkit for pseudo s-th power sequences.
//!
//! A pseudo s-th power sequence is a random set `A` of positive integers in
//! which every `n` is included independently with probability
//! `(1/s) n^{-1+1/s}`. The crate samples such sets reproducibly, sieves their
//! s-fold sumsets `sA` with a bit-parallel shifted-OR, measures gaps and
//! representation counts, and evaluates the exact finite-universe event
//! probabilities (supports `ω`, Janson bounds, gap events) used to reason about
//! the largest normalized gaps `(b_{n+1} - b_n) / ln b_n` in `sA`.
//!
//! Modules:
//! - [`model`]: constants `λ_s`, `1/λ_s`, Γ, inclusion probabilities, Poisson pmf.
//! - [`sampler`]: seeded sampling of `A ∩ [1, N]`.
//! - [`sumset`]: sumset bitmaps, representation counts and gap records.
//! - [`events`]: supports, lemma sums, Janson bounds, exact and Monte Carlo gap probabilities.
//! - [`stats`]: per-trial reports, Poisson profiles, exponent fits and aggregation.

pub mod bitset;
pub mod error;
pub mod events;
pub mod model;
pub mod sampler;
pub mod stats;
pub mod sumset;
mod sum;

pub use error::{Error, Result};
pub use model::ModelParams;
pub use sampler::{InclusionLaw, PseudoSequence};
pub use sumset::{GapRecord, RepCountTable, SumsetProfile};
