//! Bounded-Lipschitz distances.
//!
//! `d_BL(mu, nu) = sup { E_mu f - E_nu f : |f| <= 1, Lip(f) <= 1 }`.
//!
//! For finitely supported measures the supremum is a finite LP with one
//! value per support point. Adding a ground node at distance one from every
//! point turns the constraints `|f_i| <= 1`, `|f_i - f_j| <= |x_i - x_j|` into
//! a single Lipschitz condition on the augmented metric space, whose
//! shortest-path metric is `min(|x - y|, 2)`. Kantorovich-Rubinstein duality
//! then gives `d_BL(mu, nu) = min_coupling E min(|X - Y|, 2)`, which is solved
//! exactly as a transport problem by [`crate::flow`].

mod certified;
mod witness;

pub use certified::{
    bl_certified, bl_certified_with, gaussian_integral_pl, truncate_pl, BLCertificate,
    CertifyOptions, ErrorModel, GaussianIntegral,
};
pub use witness::{witness_lower_bound, WitnessBound};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::flow::{min_cost_flow, Network};
use crate::measure::EmpiricalMeasure;

/// Default bound on the support size of each measure passed to [`bl_lp`].
pub const DEFAULT_SUPPORT_CAP: usize = 2000;

/// Options for [`bl_lp_with`].
#[derive(Debug, Clone, Copy)]
pub struct LpOptions {
    pub support_cap: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            support_cap: DEFAULT_SUPPORT_CAP,
        }
    }
}

/// Dense bipartite transport network.
struct Transport {
    rows: usize,
    cols: usize,
    cost: Vec<f64>,
}

impl Network for Transport {
    fn node_count(&self) -> usize {
        self.rows + self.cols
    }

    fn arc_count(&self) -> usize {
        self.cost.len()
    }

    #[inline]
    fn arc(&self, a: usize) -> (usize, usize, f64) {
        (a / self.cols, self.rows + a % self.cols, self.cost[a])
    }

    fn max_cost(&self) -> f64 {
        self.cost.iter().copied().fold(0.0, f64::max)
    }
}

/// Total order used to make [`bl_lp`] bitwise symmetric.
fn canonical_order(a: &EmpiricalMeasure, b: &EmpiricalMeasure) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        let key = |m: &EmpiricalMeasure| {
            m.coordinates()
                .iter()
                .chain(m.weights())
                .map(|v| v.to_bits())
                .collect::<Vec<u64>>()
        };
        key(a).cmp(&key(b))
    })
}

/// Exact `d_BL(mu, nu)` between finitely supported measures.
pub fn bl_lp(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    bl_lp_with(mu, nu, LpOptions::default())
}

pub fn bl_lp_with(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, opts: LpOptions) -> Result<f64> {
    if mu.k() != nu.k() {
        return Err(Error::InvalidDimension(format!(
            "measures live in R^{} and R^{}",
            mu.k(),
            nu.k()
        )));
    }
    for m in [mu, nu] {
        if m.len() > opts.support_cap {
            return Err(Error::Capacity(format!(
                "support of {} points exceeds the cap of {}; subsample the measure",
                m.len(),
                opts.support_cap
            )));
        }
    }
    let (src, dst) = if canonical_order(mu, nu).is_gt() {
        (nu, mu)
    } else {
        (mu, nu)
    };
    let rows: Vec<usize> = (0..src.len()).filter(|&i| src.weights()[i] > 0.0).collect();
    let cols: Vec<usize> = (0..dst.len()).filter(|&j| dst.weights()[j] > 0.0).collect();
    let mut cost = Vec::with_capacity(rows.len() * cols.len());
    for &i in &rows {
        let x = src.point(i);
        for &j in &cols {
            let y = dst.point(j);
            let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            cost.push(d2.sqrt().min(2.0));
        }
    }
    let net = Transport {
        rows: rows.len(),
        cols: cols.len(),
        cost,
    };
    let supply: Vec<f64> = rows
        .iter()
        .map(|&i| src.weights()[i])
        .chain(cols.iter().map(|&j| -dst.weights()[j]))
        .collect();
    let sol = min_cost_flow(&net, &supply)?;
    Ok(sol.cost.clamp(0.0, 2.0))
}

/// `n` i.i.d. draws of `sigma * Z` in R^k with equal weights.
pub fn gaussian_sample<R: Rng + ?Sized>(
    k: usize,
    sigma: f64,
    n: usize,
    rng: &mut R,
) -> Result<EmpiricalMeasure> {
    let pts: Vec<f64> = (0..n * k)
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    EmpiricalMeasure::uniform(k, pts)
}

/// Empirical BL distance to `sigma * Z` together with its sampling-noise floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComparison {
    /// `d_BL(sample, G_m)` for a fresh Gaussian sample `G_m` of size `m`.
    pub estimate: f64,
    /// `d_BL(G'_n, G_m)` for an independent Gaussian sample `G'_n` with the sample's size.
    pub baseline: f64,
}

impl GaussianComparison {
    pub fn corrected(&self) -> f64 {
        (self.estimate - self.baseline).max(0.0)
    }
}

/// Compares `sample` with `sigma * Z` using `m` Gaussian draws. The baseline
/// reuses the same reference draws, so estimate and baseline share that noise.
pub fn bl_empirical_gaussian<R: Rng + ?Sized>(
    sample: &EmpiricalMeasure,
    sigma: f64,
    m: usize,
    rng: &mut R,
) -> Result<GaussianComparison> {
    if m == 0 {
        return Err(Error::InvalidInput("Gaussian sample size must be positive".into()));
    }
    let k = sample.k();
    let reference = gaussian_sample(k, sigma, m, rng)?;
    let twin = gaussian_sample(k, sigma, sample.len(), rng)?;
    Ok(GaussianComparison {
        estimate: bl_lp(sample, &reference)?,
        baseline: bl_lp(&twin, &reference)?,
    })
}
