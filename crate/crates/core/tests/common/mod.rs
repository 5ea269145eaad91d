//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use marginal_lab::EmpiricalMeasure;
use rand::Rng;

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Merges the supports of `mu` and `nu`: distinct points and the signed
/// objective `mu_i - nu_i`.
pub fn merged_support(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let mut c: Vec<f64> = Vec::new();
    for (m, sign) in [(mu, 1.0), (nu, -1.0)] {
        for (x, &w) in m.points().zip(m.weights()) {
            match pts.iter().position(|p| p.as_slice() == x) {
                Some(i) => c[i] += sign * w,
                None => {
                    pts.push(x.to_vec());
                    c.push(sign * w);
                }
            }
        }
    }
    (pts, c)
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(piv, col);
        b.swap(piv, col);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for cc in 0..n {
                    a[r][cc] -= f * a[col][cc];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Exact optimum of `max c.f` s.t. `|f_i| <= 1`, `|f_i - f_j| <= |x_i - x_j|`,
/// by enumerating every basis of `n` tight constraints.
pub fn bl_vertex_enumeration(pts: &[Vec<f64>], c: &[f64]) -> f64 {
    let n = pts.len();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut a = vec![0.0; n];
            a[i] = s;
            rows.push((a, 1.0));
        }
        for j in i + 1..n {
            for s in [1.0, -1.0] {
                let mut a = vec![0.0; n];
                a[i] = s;
                a[j] = -s;
                rows.push((a, dist(&pts[i], &pts[j])));
            }
        }
    }
    let m = rows.len();
    let mut best = f64::NEG_INFINITY;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a: Vec<Vec<f64>> = idx.iter().map(|&r| rows[r].0.clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&r| rows[r].1).collect();
        if let Some(f) = solve(a, b) {
            let feasible = rows.iter().all(|(a, b)| {
                a.iter().zip(&f).map(|(x, y)| x * y).sum::<f64>() <= b + 1e-9
            });
            if feasible {
                best = best.max(c.iter().zip(&f).map(|(x, y)| x * y).sum());
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < m - n + i {
                idx[i] += 1;
                for j in i + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Grid search over `f` on `{-1, -1 + h, ..., 1}` for up to three points; the
/// last value is optimised exactly over its feasible interval, then snapped
/// inward to the grid.
pub fn bl_grid_search(pts: &[Vec<f64>], c: &[f64], h: f64) -> f64 {
    let n = pts.len();
    assert!(n <= 3);
    let steps = (2.0 / h).round() as i64;
    let grid = |i: i64| -1.0 + i as f64 * h;
    let last = n - 1;
    let best_last = |fixed: &[f64]| -> Option<f64> {
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        for (j, &fj) in fixed.iter().enumerate() {
            let dj = dist(&pts[j], &pts[last]);
            lo = lo.max(fj - dj);
            hi = hi.min(fj + dj);
        }
        let lo_g = ((lo + 1.0) / h - 1e-9).ceil();
        let hi_g = ((hi + 1.0) / h + 1e-9).floor();
        if lo_g > hi_g {
            return None;
        }
        let v = if c[last] >= 0.0 { grid(hi_g as i64) } else { grid(lo_g as i64) };
        Some(c[last] * v)
    };
    let mut best = f64::NEG_INFINITY;
    match n {
        1 => best = best_last(&[]).unwrap(),
        2 => {
            for i in 0..=steps {
                let f0 = grid(i);
                if let Some(v) = best_last(&[f0]) {
                    best = best.max(c[0] * f0 + v);
                }
            }
        }
        _ => {
            let d01 = dist(&pts[0], &pts[1]);
            for i in 0..=steps {
                let f0 = grid(i);
                for j in 0..=steps {
                    let f1 = grid(j);
                    if (f0 - f1).abs() > d01 + 1e-12 {
                        continue;
                    }
                    if let Some(v) = best_last(&[f0, f1]) {
                        best = best.max(c[0] * f0 + c[1] * f1 + v);
                    }
                }
            }
        }
    }
    best
}

pub fn random_measure<R: Rng>(k: usize, n: usize, spread: f64, rng: &mut R) -> EmpiricalMeasure {
    let pts: Vec<f64> = (0..n * k).map(|_| rng.gen_range(-spread..spread)).collect();
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    EmpiricalMeasure::normalized(k, pts, w).unwrap()
}

/// Standard normal CDF via the complementary error function series in statrs.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `sigma Z` in one dimension discretised on a grid of step `h` over
/// `[-8 sigma, 8 sigma]`, each atom carrying the exact mass of its cell.
pub fn gaussian_grid_measure(sigma: f64, h: f64) -> EmpiricalMeasure {
    let n = (16.0 * sigma / h).round() as usize;
    let mut pts = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let lo = -8.0 * sigma + i as f64 * h;
        let hi = lo + h;
        pts.push(0.5 * (lo + hi));
        w.push(normal_cdf(hi / sigma) - normal_cdf(lo / sigma));
    }
    EmpiricalMeasure::normalized(1, pts, w).unwrap()
}

/// `d_BL(delta_0, N(0,1)) = E min(|Z|, 2)`.
pub fn dirac_vs_normal() -> f64 {
    (2.0 / std::f64::consts::PI).sqrt() * (1.0 - (-2.0f64).exp()) + 4.0 * (1.0 - normal_cdf(2.0))
}

/// `g(x) = max(0, max_j (h_j - beta |x - p_j|))` with every cone inside the
/// ball of radius `support`: `|g| <= beta`, `Lip(g) <= beta`.
#[derive(Debug, Clone)]
pub struct ConeMax {
    pub beta: f64,
    pub peaks: Vec<(Vec<f64>, f64)>,
}

impl ConeMax {
    pub fn random<R: Rng>(k: usize, beta: f64, support: f64, rng: &mut R) -> Self {
        let n = rng.gen_range(1..=5);
        let peaks = (0..n)
            .map(|_| {
                let h = rng.gen_range(0.1..=1.0) * beta;
                let reach = h / beta;
                let room = (support - reach) / (k as f64).sqrt();
                let p: Vec<f64> = (0..k).map(|_| rng.gen_range(-room..room)).collect();
                (p, h)
            })
            .collect();
        Self { beta, peaks }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.peaks
            .iter()
            .map(|(p, h)| h - self.beta * dist(p, x))
            .fold(0.0, f64::max)
    }
}

/// Brute-force search over transport plans between `mu` and `nu` with cost
/// `min(|x - y|, 2)`. Plans with at most one free parameter (total support of
/// at most four atoms) are scanned on a grid of step `h` that includes both
/// ends of the feasible interval.
pub fn transport_grid_search(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, h: f64) -> f64 {
    let (a, b) = (mu.len(), nu.len());
    let cost = |i: usize, j: usize| dist(mu.point(i), nu.point(j)).min(2.0);
    let (p, q) = (mu.weights(), nu.weights());
    if a == 1 {
        return (0..b).map(|j| q[j] * cost(0, j)).sum();
    }
    if b == 1 {
        return (0..a).map(|i| p[i] * cost(i, 0)).sum();
    }
    assert!(a == 2 && b == 2, "plans with more than one free parameter");
    let lo = (p[0] - q[1]).max(0.0);
    let hi = p[0].min(q[0]);
    let value = |t: f64| {
        t * cost(0, 0) + (p[0] - t) * cost(0, 1) + (q[0] - t) * cost(1, 0) + (p[1] - q[0] + t) * cost(1, 1)
    };
    let steps = ((hi - lo) / h).floor() as usize;
    (0..=steps)
        .map(|i| lo + i as f64 * h)
        .chain(std::iter::once(hi))
        .map(value)
        .fold(f64::INFINITY, f64::min)
}
