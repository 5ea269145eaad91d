//! Closed-form evaluators for the displayed bounds.
//!
//! Logarithms are natural. Dimensions are taken as `f64` so that the
//! evaluators can be probed at non-integer points such as `d = e^e`.

use std::f64::consts::{E, PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Unspecified universal constants. All default to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundConstants {
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub c_prime: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self {
            c: 1.0,
            big_c: 1.0,
            l: 1.0,
            c_prime: 1.0,
        }
    }
}

impl BoundConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c", self.c),
            ("C", self.big_c),
            ("L", self.l),
            ("c_prime", self.c_prime),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("constant {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }
}

/// Sweep constant `K` for `dudley_sum <= K L log(M) sqrt(MB/d)` on
/// `M in [4, 2^12]`, `d in [1e2, 1e6]`. The measured maximum ratio is
/// about 33.2, attained at `M = 4`.
pub const DUDLEY_SWEEP_CONSTANT: f64 = 40.0;

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg()))
    }
}

fn require_dims(d: f64, k: f64, d_min: f64) -> Result<()> {
    require(d >= d_min && d.is_finite(), || format!("d must be at least {d_min}, got {d}"))?;
    require(k >= 1.0 && k.is_finite(), || format!("k must be at least 1, got {k}"))
}

fn require_loglog(d: f64) -> Result<()> {
    require(d > E && d.is_finite(), || {
        format!("d must exceed e so that log log d > 0, got {d}")
    })
}

/// `sigma (sqrt(k) (A + 1) + k) / (d - 1)`.
pub fn annealed_bound(sigma: f64, d: f64, k: f64, a: f64) -> Result<f64> {
    require_dims(d, k, 2.0)?;
    require(a >= 0.0, || format!("A must be nonnegative, got {a}"))?;
    require(sigma > 0.0, || format!("sigma must be positive, got {sigma}"))?;
    Ok(sigma * (k.sqrt() * (a + 1.0) + k) / (d - 1.0))
}

/// `C exp(-c d eps^2 / B)`.
pub fn concentration_tail(d: f64, b: f64, eps: f64, constants: &BoundConstants) -> Result<f64> {
    require(d >= 1.0, || format!("d must be at least 1, got {d}"))?;
    require(b > 0.0, || format!("B must be positive, got {b}"))?;
    require(eps >= 0.0, || format!("eps must be nonnegative, got {eps}"))?;
    Ok(constants.big_c * (-constants.c * d * eps * eps / b).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalBound {
    pub full: f64,
    pub simplified: f64,
}

/// Both displayed forms of the conditional (typical frame) bound.
pub fn conditional_bound(
    d: f64,
    k: f64,
    a: f64,
    b: f64,
    sigma: f64,
    constants: &BoundConstants,
) -> Result<ConditionalBound> {
    require_dims(d, k, 2.0)?;
    require(b > 0.0, || format!("B must be positive, got {b}"))?;
    let ln_d = d.ln();
    let d_pow = d.powf(2.0 / (3.0 * k + 4.0));
    let first = (k * b + b * ln_d) * b.powf(2.0 / (9.0 * k + 12.0)) / ((k * b).powf(2.0 / 3.0) * d_pow);
    let full = constants.big_c * (first + annealed_bound(sigma, d, k, a)?);
    let simplified = constants.big_c * (k + ln_d) / (k.powf(2.0 / 3.0) * d_pow);
    Ok(ConditionalBound { full, simplified })
}

/// `ln` of the simplified conditional bound, evaluated from `ln d` so that it
/// stays finite for astronomically large `d`.
pub fn ln_conditional_simplified(ln_d: f64, k: f64, constants: &BoundConstants) -> f64 {
    constants.big_c.ln() + (k + ln_d).ln() - (2.0 / 3.0) * k.ln() - 2.0 * ln_d / (3.0 * k + 4.0)
}

/// `2 exp(-c log(log d) / delta)`.
pub fn corollary_epsilon(d: f64, delta: f64, constants: &BoundConstants) -> Result<f64> {
    require_loglog(d)?;
    require(delta > 0.0, || format!("delta must be positive, got {delta}"))?;
    Ok(2.0 * (-constants.c * d.ln().ln() / delta).exp())
}

/// `coefficient log d / log log d`.
pub fn critical_k(d: f64, coefficient: f64) -> Result<f64> {
    require_loglog(d)?;
    Ok(critical_k_ln(d.ln(), coefficient))
}

/// [`critical_k`] from `ln d`.
pub fn critical_k_ln(ln_d: f64, coefficient: f64) -> f64 {
    coefficient * ln_d / ln_d.ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallVolume {
    pub exact: f64,
    pub asymptotic: f64,
}

/// Volume of the unit ball in R^k, exactly and by its large-k asymptotic.
///
/// The asymptotic form is Stirling's `(2 pi e / k)^{k/2} / sqrt(k pi)`. A
/// prefactor of `sqrt(2 / (k pi))` overestimates by `sqrt 2`, which is harmless
/// inside [`sharpness_gaussian_bound`] (an upper bound) but not here.
pub fn unit_ball_volume(k: usize) -> BallVolume {
    let kf = k as f64;
    let exact = (0.5 * kf * PI.ln() - ln_gamma(0.5 * kf + 1.0)).exp();
    let asymptotic = (2.0 * PI * E / kf).powf(0.5 * kf) / (kf * PI).sqrt();
    BallVolume { exact, asymptotic }
}

/// Upper bound on the Gaussian mass captured by the unit balls around the
/// `2d` projected cross-polytope vertices: `2 sqrt(2) d / sqrt(k pi) (e/k)^{k/2}`.
pub fn sharpness_gaussian_bound(d: f64, k: f64) -> Result<f64> {
    require_dims(d, k, 1.0)?;
    Ok(ln_sharpness_gaussian_bound(d.ln(), k).exp())
}

/// `ln` of [`sharpness_gaussian_bound`] from `ln d`.
pub fn ln_sharpness_gaussian_bound(ln_d: f64, k: f64) -> f64 {
    (2.0 * SQRT_2).ln() + ln_d - 0.5 * (k * PI).ln() + 0.5 * k * (1.0 - k.ln())
}

/// `(24 sqrt(B) / sqrt(d)) 2^{-2^n / M}`.
pub fn entropy_number_bound(n: u32, m: f64, b: f64, d: f64) -> f64 {
    24.0 * (b / d).sqrt() * (-(n as f64).exp2() / m).exp2()
}

/// Log of the covering bound `exp[M log(3/eps)]` for `2 B_inf^M` at radius `r`
/// in the metric `rho = 4 sqrt(B/d) |.|_inf`, where `eps = r / (8 sqrt(B/d))`.
/// At `r = entropy_number_bound(n, ..)` this equals `2^n ln 2`.
pub fn ln_covering_bound(m: f64, r: f64, b: f64, d: f64) -> f64 {
    m * (24.0 * (b / d).sqrt() / r).ln()
}

/// `L sum_n 2^{n/2} e_n`, extended past `n_max` until the next term falls below
/// `1e-12` of the running sum.
pub fn dudley_sum(m: f64, b: f64, d: f64, constants: &BoundConstants, n_max: u32) -> f64 {
    let mut sum = 0.0;
    let mut n = 0u32;
    loop {
        let term = (n as f64 / 2.0).exp2() * entropy_number_bound(n, m, b, d);
        if n > n_max && term < 1e-12 * sum {
            break;
        }
        sum += term;
        n += 1;
        if n > 200 {
            break;
        }
    }
    constants.l * sum
}

/// `c d^{1/(3k+4)} k^{(2k+1)/(6k+8)} B^{(k+1)/(3k+4)}`.
pub fn choose_r(d: f64, k: f64, b: f64, constants: &BoundConstants) -> Result<f64> {
    require_dims(d, k, 2.0)?;
    require(b > 0.0, || format!("B must be positive, got {b}"))?;
    let den = 3.0 * k + 4.0;
    Ok(constants.c
        * d.powf(1.0 / den)
        * k.powf((2.0 * k + 1.0) / (2.0 * den))
        * b.powf((k + 1.0) / den))
}

/// `(c / sqrt(k)) (c' R / (eps sqrt(k)))^k`.
pub fn lattice_m_bound(r: f64, eps: f64, k: usize, constants: &BoundConstants) -> f64 {
    let kf = k as f64;
    constants.c / kf.sqrt() * (constants.c_prime * r / (eps * kf.sqrt())).powi(k as i32)
}

/// `c (3R/eps)^k omega_k`.
pub fn site_count_bound(r: f64, eps: f64, k: usize, c: f64) -> f64 {
    c * (3.0 * r / eps).powi(k as i32) * unit_ball_volume(k).exact
}
