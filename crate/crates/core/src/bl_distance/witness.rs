use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::StreamKey;

/// Draws per rng stream in the witness Monte Carlo.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessBound {
    /// `1 - mean - mc_error`.
    pub lower: f64,
    /// Monte-Carlo mean of `f(sigma Z)`.
    pub mean: f64,
    /// `4 sd / sqrt(n_mc)`.
    pub mc_error: f64,
}

/// `(1 - d(x, S))_+` for the flat point set `s` in R^k.
fn witness(x: &[f64], s: &[f64], k: usize) -> f64 {
    let mut best = 1.0f64;
    for p in s.chunks_exact(k) {
        let mut d2 = 0.0;
        for (a, b) in x.iter().zip(p) {
            d2 += (a - b) * (a - b);
            if d2 >= best {
                break;
            }
        }
        if d2 < best {
            best = d2;
        }
    }
    1.0 - best.sqrt()
}

/// Lower bound on `d_BL(uniform on S, sigma Z)` from the witness
/// `f(x) = (1 - d(x, S))_+`, which integrates to one against the uniform
/// measure on `S` and has BL norm one.
///
/// `points` holds the points of `S` row by row. The Monte Carlo runs in
/// fixed-size chunks on independent streams seeded from `rng`, so the result
/// does not depend on the thread count.
pub fn witness_lower_bound<R: Rng + ?Sized>(
    points: &[f64],
    k: usize,
    sigma: f64,
    n_mc: usize,
    rng: &mut R,
) -> Result<WitnessBound> {
    if k == 0 || points.is_empty() || !points.len().is_multiple_of(k) {
        return Err(Error::InvalidInput(format!(
            "need a nonempty point set in R^{k}, got {} coordinates",
            points.len()
        )));
    }
    if n_mc < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: n_mc });
    }
    let key = StreamKey::new(rng.gen());
    let chunks = n_mc.div_ceil(CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = key.stream(&[c as u64]);
            let len = CHUNK.min(n_mc - c * CHUNK);
            let mut x = vec![0.0; k];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                for v in &mut x {
                    *v = sigma * r.sample::<f64, _>(StandardNormal);
                }
                let f = witness(&x, points, k);
                s1 += f;
                s2 += f * f;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = n_mc as f64;
    let mean = s1 / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    let mc_error = 4.0 * var.sqrt() / n.sqrt();
    Ok(WitnessBound {
        lower: 1.0 - mean - mc_error,
        mean,
        mc_error,
    })
}
