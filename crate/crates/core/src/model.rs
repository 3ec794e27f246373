//! Closed-form constants of the pseudo s-th power model.
//!
//! `λ_s = Γ(1/s)^s / (s^s s!)` is the Poisson parameter of the representation
//! counts `r_s(A, n)`; its reciprocal is the almost-sure limsup of the
//! normalized gaps in `sA`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Lanczos series for `x >= 1`, returning `(t, a)` with
/// `Γ(x) = sqrt(2π) t^{x-1/2} e^{-t} a`.
fn lanczos_parts(x: f64) -> (f64, f64) {
    let y = x - 1.0;
    let mut a = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        a += c / (y + k as f64);
    }
    (y + LANCZOS_G + 0.5, a)
}

/// Γ(x) for real `x > 0`.
pub fn gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 1.0 {
        return gamma(x + 1.0) / x;
    }
    if x > 170.0 {
        return ln_gamma(x).exp();
    }
    let (t, a) = lanczos_parts(x);
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x - 0.5) * (-t).exp() * a
}

/// ln Γ(x) for real `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 1.0 {
        return ln_gamma(x + 1.0) - x.ln();
    }
    let (t, a) = lanczos_parts(x);
    HALF_LN_TWO_PI + (x - 0.5) * t.ln() - t + a.ln()
}

/// Γ(1/s), the building block of `λ_s`.
pub fn gamma_reciprocal_power(s: u32) -> Result<f64> {
    if s < 1 {
        return Err(domain("gamma_reciprocal_power requires s >= 1"));
    }
    Ok(gamma(1.0 / f64::from(s)))
}

fn check_s(s: u32) -> Result<()> {
    if s < 2 {
        Err(domain(format!("model requires s >= 2, got {s}")))
    } else {
        Ok(())
    }
}

/// `λ_s = Γ(1/s)^s / (s^s s!)`.
pub fn lambda_s(s: u32) -> Result<f64> {
    check_s(s)?;
    let g = gamma_reciprocal_power(s)?;
    if s <= 20 {
        let sf = f64::from(s);
        let factorial: f64 = (1..=s).map(f64::from).product();
        Ok(g.powi(s as i32) / (sf.powi(s as i32) * factorial))
    } else {
        let sf = f64::from(s);
        Ok((sf * g.ln() - sf * sf.ln() - ln_gamma(sf + 1.0)).exp())
    }
}

/// `s^s s! / Γ(1/s)^s`, the limsup of `(b_{n+1} - b_n) / ln b_n`.
pub fn gap_constant(s: u32) -> Result<f64> {
    Ok(1.0 / lambda_s(s)?)
}

/// `P(n ∈ A) = (1/s) n^{-1+1/s}`.
pub fn membership_probability(n: u64, s: u32) -> Result<f64> {
    check_s(s)?;
    if n < 1 {
        return Err(domain("membership probability is defined for n >= 1"));
    }
    Ok(power_law_probability(n, s))
}

/// Unchecked form of [`membership_probability`] for hot loops.
#[inline]
pub(crate) fn power_law_probability(n: u64, s: u32) -> f64 {
    let sf = f64::from(s);
    (n as f64).powf(-1.0 + 1.0 / sf) / sf
}

/// `λ^d e^{-λ} / d!`, evaluated in log space.
pub fn poisson_pmf(lambda: f64, d: u64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 || lambda.is_infinite() {
        return Err(domain(format!("poisson_pmf requires lambda > 0, got {lambda}")));
    }
    let df = d as f64;
    Ok((df * lambda.ln() - lambda - ln_gamma(df + 1.0)).exp())
}

/// The model's exponent together with its two constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub s: u32,
    pub lambda_s: f64,
    pub gap_constant: f64,
}

impl ModelParams {
    pub fn new(s: u32) -> Result<Self> {
        let lambda = lambda_s(s)?;
        Ok(Self {
            s,
            lambda_s: lambda,
            gap_constant: 1.0 / lambda,
        })
    }

    /// Asymptotic density of `sA`, `1 - e^{-λ_s}`.
    pub fn sumset_density(&self) -> f64 {
        -(-self.lambda_s).exp_m1()
    }
}
