//! Exact evaluation of the weighted lattice sums behind the support estimates.
//!
//! With `e = -1 + 1/s` and `w(x) = x^e`:
//! - (i)   `Σ_{a·x = z} Π w(x_k)`, envelope `z^{-1+t/s}`;
//! - (ii)  `Σ_{a·x < z} Π w(x_k) (z - a·x)^{-2t/s}`, envelope `z^{-1/s} ln z`;
//! - (iii) `Σ_{x_1 < … < x_s, Σ x = z} Π w(x_k)`, envelope `s^s λ_s`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::lambda_s;
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaSumResult {
    pub z: u64,
    pub value: f64,
    /// The claimed asymptotic size of `value`.
    pub envelope: f64,
    /// `value / envelope`.
    pub bound_ratio: f64,
}

impl LemmaSumResult {
    fn new(z: u64, value: f64, envelope: f64) -> Self {
        Self {
            z,
            value,
            envelope,
            bound_ratio: value / envelope,
        }
    }
}

/// `table[x] = x^exponent` for `x` in `[1, len)`; `table[0]` unused.
fn power_table(len: u64, exponent: f64) -> Vec<f64> {
    let mut table = Vec::with_capacity(len as usize);
    table.push(0.0);
    table.extend((1..len).map(|x| (x as f64).powf(exponent)));
    table
}

fn check_coeffs(t: u32, s: u32, coeffs: &[u32]) -> Result<()> {
    if s < 2 {
        return Err(domain(format!("lemma sums require s >= 2, got {s}")));
    }
    if t < 1 || t > s {
        return Err(domain(format!("t must lie in [1, s], got t={t}, s={s}")));
    }
    if coeffs.len() != t as usize || coeffs.contains(&0) {
        return Err(domain(format!("need {t} positive coefficients, got {coeffs:?}")));
    }
    Ok(())
}

/// Sum (i): ordered positive `x` with `Σ a_k x_k = z`.
pub fn lemma_sum_i(t: u32, s: u32, coeffs: &[u32], z: u64) -> Result<LemmaSumResult> {
    check_coeffs(t, s, coeffs)?;
    if z < 1 {
        return Err(domain("z must be positive"));
    }
    let w = power_table(z + 1, -1.0 + 1.0 / f64::from(s));
    let coeffs: Vec<u64> = coeffs.iter().map(|&a| u64::from(a)).collect();
    let mut acc = CompensatedSum::default();
    solutions_eq(&coeffs, z, 1.0, &w, &mut acc);
    let envelope = (z as f64).powf(-1.0 + f64::from(t) / f64::from(s));
    Ok(LemmaSumResult::new(z, acc.value(), envelope))
}

/// Accumulate `weight · Π w(x_k)` over positive solutions of `Σ coeffs_k x_k = rem`.
fn solutions_eq(coeffs: &[u64], rem: u64, weight: f64, w: &[f64], acc: &mut CompensatedSum) {
    let (&a, rest) = coeffs.split_first().expect("non-empty coefficients");
    if rest.is_empty() {
        if rem > 0 && rem.is_multiple_of(a) {
            acc.add(weight * w[(rem / a) as usize]);
        }
        return;
    }
    let reserve: u64 = rest.iter().sum();
    if rem <= reserve {
        return;
    }
    let max_x = (rem - reserve) / a;
    for x in 1..=max_x {
        solutions_eq(rest, rem - a * x, weight * w[x as usize], w, acc);
    }
}

/// Sum (ii): ordered positive `x` with `Σ a_k x_k < z`, weighted by the
/// distance to `z`.
pub fn lemma_sum_ii(t: u32, s: u32, coeffs: &[u32], z: u64) -> Result<LemmaSumResult> {
    check_coeffs(t, s, coeffs)?;
    if z < 2 {
        return Err(domain("sum (ii) requires z >= 2 so that ln z > 0"));
    }
    let w = power_table(z + 1, -1.0 + 1.0 / f64::from(s));
    let gap_w = power_table(z + 1, -2.0 * f64::from(t) / f64::from(s));
    let coeffs: Vec<u64> = coeffs.iter().map(|&a| u64::from(a)).collect();
    let mut acc = CompensatedSum::default();
    solutions_below(&coeffs, z, 1.0, &w, &gap_w, &mut acc);
    let zf = z as f64;
    let envelope = zf.powf(-1.0 / f64::from(s)) * zf.ln();
    Ok(LemmaSumResult::new(z, acc.value(), envelope))
}

/// `rem` is the distance `z - Σ` still available.
fn solutions_below(coeffs: &[u64], rem: u64, weight: f64, w: &[f64], gap_w: &[f64], acc: &mut CompensatedSum) {
    let Some((&a, rest)) = coeffs.split_first() else {
        acc.add(weight * gap_w[rem as usize]);
        return;
    };
    let reserve: u64 = rest.iter().sum();
    // need a·x + reserve < rem
    if rem <= reserve + a {
        return;
    }
    let max_x = (rem - reserve - 1) / a;
    for x in 1..=max_x {
        solutions_below(rest, rem - a * x, weight * w[x as usize], w, gap_w, acc);
    }
}

/// Sum (iii): strictly increasing `x_1 < … < x_s` summing to `z`.
pub fn lemma_sum_iii(s: u32, z: u64) -> Result<LemmaSumResult> {
    let envelope = f64::from(s).powi(s as i32) * lambda_s(s)?;
    let w = power_table(z + 1, -1.0 + 1.0 / f64::from(s));
    let mut acc = CompensatedSum::default();
    increasing(s as u64, 1, z, 1.0, &w, &mut acc);
    Ok(LemmaSumResult::new(z, acc.value(), envelope))
}

fn increasing(parts: u64, lo: u64, rem: u64, weight: f64, w: &[f64], acc: &mut CompensatedSum) {
    if parts == 1 {
        if rem >= lo {
            acc.add(weight * w[rem as usize]);
        }
        return;
    }
    // the smallest completion is x, x+1, …, x+parts-1
    let tri = parts * (parts - 1) / 2;
    let mut x = lo;
    while x * parts + tri <= rem {
        increasing(parts - 1, x + 1, rem - x, weight * w[x as usize], w, acc);
        x += 1;
    }
}
