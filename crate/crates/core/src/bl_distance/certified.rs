//! Certified bracket for `d_BL(mu, sigma Z)` from a lattice LP.
//!
//! Upper bound chain, for `f` with `|f| <= 1`, `Lip f <= 1`:
//! * truncation: `f = f phi_R + f (1 - phi_R)`, and the second part moves the
//!   gap by at most `E_mu[1 - phi_R] + E_gamma[1 - phi_R]`;
//! * interpolation: `f phi_R` differs from its lattice interpolant at `x` by at
//!   most `L_S sum_i lambda_i |x - v_i|`, with `L_S` its Lipschitz constant on
//!   the simplex (1 inside the ball of radius `R`, 2 otherwise);
//! * the interpolant's gap is `sum_s a_s (alpha_s - g_s)` with
//!   `alpha_s = E_mu lambda_s`, `g_s = E_gamma lambda_s`, and the site values
//!   `a_s = f(s) phi_R(s)` obey box and edge constraints, so an LP over those
//!   constraints bounds it.
//!
//! In one dimension every Gaussian integral is closed form; in higher
//! dimensions `g_s` and the interpolation defect are Monte-Carlo estimates and
//! their four-standard-error envelopes are charged to the bracket.
//!
//! The lower bound re-solves the LP over `|a_s| <= 1`, `|a_s - a_t| <= |s - t|`,
//! rescales the interpolant by its exact BL norm, and evaluates the gap.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::flow::{min_cost_flow, ArcList};
use crate::measure::EmpiricalMeasure;
use crate::triangulation::{
    build_lattice_with, distance, LatticeOptions, PLFunction, SupplementedLattice,
};

pub const MAX_CERTIFIED_DIM: usize = 3;
pub const MIN_GAUSSIAN_MC: usize = 1000;

/// How the error terms of the certificate are computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ErrorModel {
    /// Exact truncation mass, measured interpolation defect, LP with
    /// `|a_s| <= phi_R(s)` and the matching edge bounds.
    #[default]
    Tight,
    /// LP over `BL_{2,R+1}` site values with nominal worst-case error terms:
    /// `truncation_constant k max(B_mu, sigma^2) / R^2` and `pl_constant eps sqrt(k)`.
    Nominal {
        truncation_constant: f64,
        pl_constant: f64,
    },
}

impl ErrorModel {
    pub fn nominal() -> Self {
        ErrorModel::Nominal {
            truncation_constant: 2.0,
            pl_constant: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CertifyOptions {
    pub model: ErrorModel,
    pub lattice: LatticeOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BLCertificate {
    /// Optimum of the upper-bound LP.
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub truncation_error: f64,
    pub pl_error: f64,
    pub quadrature_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianIntegral {
    pub estimate: f64,
    /// `4 sd / sqrt(n_mc)`.
    pub error: f64,
}

fn phi_r(norm: f64, r: f64) -> f64 {
    (r + 1.0 - norm).clamp(0.0, 1.0)
}

fn euclid(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Multiplies site values by the cutoff `phi_R`, which is 1 up to radius `R`,
/// decays linearly to 0 at `R + 1`, and vanishes beyond.
pub fn truncate_pl(f: &PLFunction, r: f64) -> PLFunction {
    let lattice = f.lattice();
    let values = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| v * phi_r(euclid(lattice.site(i)), r))
        .collect();
    PLFunction::new(Arc::clone(lattice), values, 2.0 * f.norm_bound())
        .expect("a cutoff with Lipschitz constant one at most doubles the BL bound")
}

/// Monte-Carlo estimate of `E f(sigma Z)`.
pub fn gaussian_integral_pl<R: Rng + ?Sized>(
    f: &PLFunction,
    sigma: f64,
    n_mc: usize,
    rng: &mut R,
) -> Result<GaussianIntegral> {
    if n_mc < MIN_GAUSSIAN_MC {
        return Err(Error::InsufficientSample {
            needed: MIN_GAUSSIAN_MC,
            got: n_mc,
        });
    }
    let k = f.lattice().k();
    let mut x = vec![0.0; k];
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n_mc {
        for v in &mut x {
            *v = sigma * rng.sample::<f64, _>(StandardNormal);
        }
        let y = f.interpolate(&x);
        s1 += y;
        s2 += y * y;
    }
    let n = n_mc as f64;
    let mean = s1 / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(GaussianIntegral {
        estimate: mean,
        error: 4.0 * var.sqrt() / n.sqrt(),
    })
}

fn upper_tail(t: f64) -> f64 {
    0.5 * erfc(t / std::f64::consts::SQRT_2)
}

fn density(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `(E[1; I], E[X; I], E[X^2; I])` for `X = sigma Z` and `I = [l, r]`.
fn interval_moments(l: f64, r: f64, sigma: f64) -> (f64, f64, f64) {
    let (a, b) = (l / sigma, r / sigma);
    let m0 = if a >= 0.0 {
        upper_tail(a) - upper_tail(b)
    } else if b <= 0.0 {
        upper_tail(-b) - upper_tail(-a)
    } else {
        1.0 - upper_tail(-a) - upper_tail(b)
    };
    let (pa, pb) = (density(a), density(b));
    let m1 = sigma * (pa - pb);
    let m2 = sigma * sigma * (m0 + a * pa - b * pb);
    (m0, m1, m2)
}

/// Per-site integrals of the barycentric weights and the interpolation defect.
struct SideIntegrals {
    weights: Vec<f64>,
    /// Monte-Carlo standard deviation of each weight (zero when exact).
    weight_sd: Vec<f64>,
    defect: f64,
    truncation: f64,
}

fn cell_slopes(lattice: &SupplementedLattice, r: f64) -> Vec<f64> {
    let inside = r * (1.0 - 1e-12);
    (0..lattice.cell_count())
        .map(|c| {
            let all_inside = lattice
                .cell(c)
                .iter()
                .all(|&s| euclid(lattice.site(s)) <= inside);
            if all_inside {
                1.0
            } else {
                2.0
            }
        })
        .collect()
}

fn measure_side(
    mu: &EmpiricalMeasure,
    lattice: &SupplementedLattice,
    slopes: &[f64],
    r: f64,
) -> SideIntegrals {
    let mut weights = vec![0.0; lattice.len()];
    let (mut defect, mut truncation) = (0.0, 0.0);
    for (x, &w) in mu.points().zip(mu.weights()) {
        truncation += w * (1.0 - phi_r(euclid(x), r));
        if let Some(loc) = lattice.locate(x) {
            let mut spread = 0.0;
            for (&s, &l) in loc.sites.iter().zip(&loc.weights) {
                weights[s] += w * l;
                spread += l * distance(x, lattice.site(s));
            }
            defect += w * slopes[loc.cell] * spread;
        }
    }
    SideIntegrals {
        weight_sd: vec![0.0; weights.len()],
        weights,
        defect,
        truncation,
    }
}

fn gaussian_side_exact(
    lattice: &SupplementedLattice,
    slopes: &[f64],
    sigma: f64,
    r: f64,
) -> SideIntegrals {
    let mut weights = vec![0.0; lattice.len()];
    let mut defect = 0.0;
    for c in 0..lattice.cell_count() {
        let ids = lattice.cell(c);
        let (l, rr) = (lattice.site(ids[0])[0], lattice.site(ids[1])[0]);
        let h = rr - l;
        let (m0, m1, m2) = interval_moments(l, rr, sigma);
        weights[ids[0]] += (rr * m0 - m1) / h;
        weights[ids[1]] += (m1 - l * m0) / h;
        defect += slopes[c] * 2.0 / h * (-m2 + (l + rr) * m1 - l * rr * m0);
    }
    let (m0, m1, _) = interval_moments(r, r + 1.0, sigma);
    let truncation = 2.0 * (m1 - r * m0 + upper_tail((r + 1.0) / sigma));
    SideIntegrals {
        weight_sd: vec![0.0; weights.len()],
        weights,
        defect: defect.max(0.0),
        truncation: truncation.max(0.0),
    }
}

fn gaussian_side_mc<R: Rng + ?Sized>(
    lattice: &SupplementedLattice,
    slopes: &[f64],
    sigma: f64,
    r: f64,
    n_mc: usize,
    rng: &mut R,
) -> Result<SideIntegrals> {
    let k = lattice.k();
    let mut s1 = vec![0.0; lattice.len()];
    let mut s2 = vec![0.0; lattice.len()];
    let (mut d1, mut d2) = (0.0, 0.0);
    let mut x = vec![0.0; k];
    for _ in 0..n_mc {
        for v in &mut x {
            *v = sigma * rng.sample::<f64, _>(StandardNormal);
        }
        if let Some(loc) = lattice.locate(&x) {
            let mut spread = 0.0;
            for (&s, &l) in loc.sites.iter().zip(&loc.weights) {
                s1[s] += l;
                s2[s] += l * l;
                spread += l * distance(&x, lattice.site(s));
            }
            let d = slopes[loc.cell] * spread;
            d1 += d;
            d2 += d * d;
        }
    }
    let n = n_mc as f64;
    let sd = |a: f64, b: f64| (((b - a * a / n) / (n - 1.0)).max(0.0)).sqrt();
    let weight_sd = s1.iter().zip(&s2).map(|(&a, &b)| sd(a, b)).collect();
    let weights = s1.iter().map(|a| a / n).collect();
    let defect = d1 / n + 4.0 * sd(d1, d2) / n.sqrt();
    let chi = ChiSquared::new(k as f64).expect("positive degrees of freedom");
    let truncation = chi.sf((r / sigma).powi(2));
    Ok(SideIntegrals {
        weights,
        weight_sd,
        defect,
        truncation,
    })
}

/// Maximizes `sum_s w_s a_s` subject to `|a_s| <= bound_s` and
/// `|a_s - a_t| <= edge_cost(s, t)` on lattice edges, as the dual of a
/// transshipment through a ground node.
fn site_lp(
    lattice: &SupplementedLattice,
    w: &[f64],
    bound: &[f64],
    edge_cost: impl Fn(usize, usize) -> f64,
) -> Result<(f64, Vec<f64>)> {
    let n = lattice.len();
    let ground = n;
    let mut net = ArcList {
        nodes: n + 1,
        arcs: Vec::with_capacity(2 * lattice.edge_count() + 2 * n),
    };
    for (i, j) in lattice.edges() {
        let c = edge_cost(i, j);
        net.arcs.push((i, j, c));
        net.arcs.push((j, i, c));
    }
    for (i, &b) in bound.iter().enumerate() {
        net.arcs.push((i, ground, b));
        net.arcs.push((ground, i, b));
    }
    let mut supply = w.to_vec();
    supply.push(-w.iter().sum::<f64>());
    let sol = min_cost_flow(&net, &supply)?;
    let values = (0..n)
        .map(|i| (sol.potential[ground] - sol.potential[i]).clamp(-bound[i], bound[i]))
        .collect();
    Ok((sol.cost, values))
}

/// Certified bracket for `d_BL(mu, sigma Z)` with the default options.
pub fn bl_certified<R: Rng + ?Sized>(
    mu: &EmpiricalMeasure,
    sigma: f64,
    r: f64,
    epsilon: f64,
    b_mu: Option<f64>,
    n_mc: usize,
    rng: &mut R,
) -> Result<BLCertificate> {
    bl_certified_with(mu, sigma, r, epsilon, b_mu, n_mc, rng, CertifyOptions::default())
}

/// Certified bracket for `d_BL(mu, sigma Z)`.
///
/// `b_mu` bounds the largest directional second moment of `mu`; when absent
/// the empirical value is used. It only enters the [`ErrorModel::Nominal`]
/// truncation term. `n_mc` is the Gaussian Monte-Carlo size, unused for
/// `k = 1` where all Gaussian integrals are closed form.
#[allow(clippy::too_many_arguments)]
pub fn bl_certified_with<R: Rng + ?Sized>(
    mu: &EmpiricalMeasure,
    sigma: f64,
    r: f64,
    epsilon: f64,
    b_mu: Option<f64>,
    n_mc: usize,
    rng: &mut R,
    opts: CertifyOptions,
) -> Result<BLCertificate> {
    let k = mu.k();
    if k == 0 || k > MAX_CERTIFIED_DIM {
        return Err(Error::DimensionLimit(format!(
            "certified estimates support 1 <= k <= {MAX_CERTIFIED_DIM}, got {k}"
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let empirical_b = mu.max_directional_second_moment();
    let b = match b_mu {
        Some(b) if !(b >= 0.0) => {
            return Err(Error::Domain(format!("B_mu must be nonnegative, got {b}")));
        }
        Some(b) if empirical_b > b * (1.0 + 1e-9) + 1e-300 => {
            return Err(Error::Domain(format!(
                "B_mu = {b} is below the empirical directional second moment {empirical_b}"
            )));
        }
        Some(b) => b,
        None => empirical_b,
    };
    if k > 1 && n_mc < MIN_GAUSSIAN_MC {
        return Err(Error::InsufficientSample {
            needed: MIN_GAUSSIAN_MC,
            got: n_mc,
        });
    }
    let lattice = Arc::new(build_lattice_with(k, epsilon, r, opts.lattice)?);
    let slopes = cell_slopes(&lattice, r);
    let mu_side = measure_side(mu, &lattice, &slopes, r);
    let gauss = if k == 1 {
        gaussian_side_exact(&lattice, &slopes, sigma, r)
    } else {
        gaussian_side_mc(&lattice, &slopes, sigma, r, n_mc, rng)?
    };
    let w: Vec<f64> = mu_side
        .weights
        .iter()
        .zip(&gauss.weights)
        .map(|(a, g)| a - g)
        .collect();
    let n = lattice.len();
    let norms: Vec<f64> = (0..n).map(|i| euclid(lattice.site(i))).collect();
    let free = |i: usize| !lattice.is_pinned(i);
    let mc_scale = 4.0 / (n_mc.max(1) as f64).sqrt();

    let (value, truncation_error, pl_error, quadrature_error) = match opts.model {
        ErrorModel::Tight => {
            let phi: Vec<f64> = (0..n)
                .map(|i| if free(i) { phi_r(norms[i], r) } else { 0.0 })
                .collect();
            let edge = |i: usize, j: usize| {
                let dist = distance(lattice.site(i), lattice.site(j));
                let dphi = (phi[i] - phi[j]).abs();
                dist * phi[i].min(phi[j]) + dphi
            };
            let (value, _) = site_lp(&lattice, &w, &phi, edge)?;
            let quad: f64 = phi.iter().zip(&gauss.weight_sd).map(|(b, sd)| b * sd).sum::<f64>() * mc_scale;
            (
                value,
                mu_side.truncation + gauss.truncation,
                mu_side.defect + gauss.defect,
                quad,
            )
        }
        ErrorModel::Nominal {
            truncation_constant,
            pl_constant,
        } => {
            let bound: Vec<f64> = (0..n).map(|i| if free(i) { 2.0 } else { 0.0 }).collect();
            let edge = |i: usize, j: usize| 2.0 * distance(lattice.site(i), lattice.site(j));
            let (value, _) = site_lp(&lattice, &w, &bound, edge)?;
            let quad: f64 = bound.iter().zip(&gauss.weight_sd).map(|(b, sd)| b * sd).sum::<f64>() * mc_scale;
            let kf = k as f64;
            (
                value,
                truncation_constant * kf * b.max(sigma * sigma) / (r * r),
                pl_constant * epsilon * kf.sqrt(),
                2.0 * quad,
            )
        }
    };
    let upper = (value + truncation_error + pl_error + quadrature_error).min(2.0);

    let unit: Vec<f64> = (0..n).map(|i| if free(i) { 1.0 } else { 0.0 }).collect();
    let (_, h) = site_lp(&lattice, &w, &unit, |i, j| {
        distance(lattice.site(i), lattice.site(j))
    })?;
    let h = PLFunction::new(Arc::clone(&lattice), h, 1.0)?;
    let scale = 1.0 / h.bl_norm().max(1.0);
    let mu_part: f64 = mu_side.weights.iter().zip(h.values()).map(|(a, v)| a * v).sum();
    let gauss_part = if k == 1 {
        gauss.weights.iter().zip(h.values()).map(|(g, v)| g * v).sum()
    } else {
        let gi = gaussian_integral_pl(&h, sigma, n_mc, rng)?;
        gi.estimate + gi.error
    };
    let lower = (scale * (mu_part - gauss_part)).clamp(0.0, 2.0);

    Ok(BLCertificate {
        value,
        lower,
        upper,
        truncation_error,
        pl_error,
        quadrature_error,
    })
}
