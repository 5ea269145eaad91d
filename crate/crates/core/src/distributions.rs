//! Random vectors in R^d with known (or estimated) moment parameters
//!
//! * `sigma2`: `E|X|^2 = sigma2 * d`
//! * `a`: `E| |X|^2 / sigma2 - d |`
//! * `b`: `sup_{|xi| = 1} E<X, xi>^2`, the top eigenvalue of the covariance.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

/// Draws used for the internal Monte-Carlo estimates of `a`.
const A_ESTIMATE_DRAWS: usize = 20_000;
const A_ESTIMATE_SEED: u64 = 0x5eed_a11a;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    CrossPolytope,
    Gaussian,
    Sphere,
    L1Ball,
    Cube,
}

impl SourceKind {
    pub const ALL: [SourceKind; 5] = [
        SourceKind::CrossPolytope,
        SourceKind::Gaussian,
        SourceKind::Sphere,
        SourceKind::L1Ball,
        SourceKind::Cube,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SourceKind::CrossPolytope => "cross-polytope",
            SourceKind::Gaussian => "gaussian",
            SourceKind::Sphere => "sphere",
            SourceKind::L1Ball => "l1-ball",
            SourceKind::Cube => "cube",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SourceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownDistribution(s.to_string()))
    }
}

/// A moment parameter that is either known in closed form or estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Param {
    Exact { value: f64 },
    Estimate { value: f64, stderr: f64 },
}

impl Param {
    pub fn exact(value: f64) -> Self {
        Param::Exact { value }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Param::Exact { value } | Param::Estimate { value, .. } => value,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Param::Exact { .. })
    }

    /// Zero for exact parameters.
    pub fn stderr(&self) -> f64 {
        match *self {
            Param::Exact { .. } => 0.0,
            Param::Estimate { stderr, .. } => stderr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub sigma2: f64,
    pub a: Param,
    pub b: Param,
}

/// A samplable distribution on R^d with its moment metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSource {
    kind: SourceKind,
    d: usize,
    moments: Moments,
    /// Dilation of the l1 ball; unused by the other families.
    l1_radius: f64,
}

fn check_d(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidDimension("source dimension must be positive".into()));
    }
    Ok(())
}

fn a_estimate<F>(d: usize, mut norm2: F) -> Param
where
    F: FnMut(&mut crate::rng::Rng) -> f64,
{
    let mut rng = seeded(A_ESTIMATE_SEED ^ d as u64);
    let vals: Vec<f64> = (0..A_ESTIMATE_DRAWS)
        .map(|_| (norm2(&mut rng) - d as f64).abs())
        .collect();
    let (mean, sd) = mean_sd(&vals);
    Param::Estimate {
        value: mean,
        stderr: sd / (vals.len() as f64).sqrt(),
    }
}

/// Uniform on `{±sqrt(d) e_1, ..., ±sqrt(d) e_d}`.
pub fn make_cross_polytope(d: usize) -> Result<VectorSource> {
    check_d(d)?;
    Ok(VectorSource {
        kind: SourceKind::CrossPolytope,
        d,
        moments: Moments {
            sigma2: 1.0,
            a: Param::exact(0.0),
            b: Param::exact(1.0),
        },
        l1_radius: 0.0,
    })
}

/// Standard normal in R^d. `a = E|chi2_d - d|` is stored as a Monte-Carlo estimate.
pub fn make_gaussian(d: usize) -> Result<VectorSource> {
    check_d(d)?;
    let chi2 = ChiSquared::new(d as f64).expect("positive degrees of freedom");
    let a = a_estimate(d, |rng| chi2.sample(rng));
    Ok(VectorSource {
        kind: SourceKind::Gaussian,
        d,
        moments: Moments {
            sigma2: 1.0,
            a,
            b: Param::exact(1.0),
        },
        l1_radius: 0.0,
    })
}

/// Uniform on the sphere of radius sqrt(d).
pub fn make_sphere(d: usize) -> Result<VectorSource> {
    check_d(d)?;
    Ok(VectorSource {
        kind: SourceKind::Sphere,
        d,
        moments: Moments {
            sigma2: 1.0,
            a: Param::exact(0.0),
            b: Param::exact(1.0),
        },
        l1_radius: 0.0,
    })
}

/// Isotropic dilate of the l1 ball.
pub fn make_l1_ball(d: usize) -> Result<VectorSource> {
    check_d(d)?;
    let df = d as f64;
    // Each coordinate of the uniform law on r * B_1^d has variance 2 r^2 / ((d+1)(d+2)).
    let radius = ((df + 1.0) * (df + 2.0) / 2.0).sqrt();
    let mut src = VectorSource {
        kind: SourceKind::L1Ball,
        d,
        moments: Moments {
            sigma2: 1.0,
            a: Param::exact(0.0),
            b: Param::exact(1.0),
        },
        l1_radius: radius,
    };
    let mut buf = vec![0.0; d];
    let probe = src.clone();
    src.moments.a = a_estimate(d, |rng| {
        probe.sample_into(rng, &mut buf);
        buf.iter().map(|v| v * v).sum()
    });
    Ok(src)
}

/// Uniform on `{-1, +1}^d`.
pub fn make_cube(d: usize) -> Result<VectorSource> {
    check_d(d)?;
    Ok(VectorSource {
        kind: SourceKind::Cube,
        d,
        moments: Moments {
            sigma2: 1.0,
            a: Param::exact(0.0),
            b: Param::exact(1.0),
        },
        l1_radius: 0.0,
    })
}

pub fn make_source(kind: SourceKind, d: usize) -> Result<VectorSource> {
    match kind {
        SourceKind::CrossPolytope => make_cross_polytope(d),
        SourceKind::Gaussian => make_gaussian(d),
        SourceKind::Sphere => make_sphere(d),
        SourceKind::L1Ball => make_l1_ball(d),
        SourceKind::Cube => make_cube(d),
    }
}

impl VectorSource {
    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn moments(&self) -> &Moments {
        &self.moments
    }

    pub fn sigma2(&self) -> f64 {
        self.moments.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.moments.sigma2.sqrt()
    }

    /// Radius `r` of the support `r * B_1^d` for the l1 family.
    pub fn l1_radius(&self) -> Option<f64> {
        (self.kind == SourceKind::L1Ball).then_some(self.l1_radius)
    }

    /// Writes one draw into `out` (length d).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        assert_eq!(out.len(), self.d, "output buffer has wrong length");
        let d = self.d;
        match self.kind {
            SourceKind::CrossPolytope => {
                out.fill(0.0);
                let i = rng.gen_range(0..d);
                let s = (d as f64).sqrt();
                out[i] = if rng.gen::<bool>() { s } else { -s };
            }
            SourceKind::Gaussian => {
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
            }
            SourceKind::Sphere => loop {
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    let radius = (d as f64).sqrt();
                    out.iter_mut().for_each(|v| *v = *v / norm * radius);
                    break;
                }
            },
            SourceKind::L1Ball => {
                // (E_1, ..., E_d) / (E_1 + ... + E_{d+1}) is uniform on the simplex
                // interior; random signs spread it over the cross-polytope.
                let mut total: f64 = rng.sample(Exp1);
                for v in out.iter_mut() {
                    let e: f64 = rng.sample(Exp1);
                    total += e;
                    *v = if rng.gen::<bool>() { e } else { -e };
                }
                let scale = self.l1_radius / total;
                out.iter_mut().for_each(|v| *v *= scale);
            }
            SourceKind::Cube => {
                for v in out.iter_mut() {
                    *v = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        self.sample_into(rng, &mut out);
        out
    }

    /// `n` draws, flattened row-major (n x d).
    pub fn sample_many<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; n * self.d];
        for row in out.chunks_exact_mut(self.d) {
            self.sample_into(rng, row);
        }
        out
    }

    /// Writes `n` draws as CSV, one row per draw.
    pub fn write_samples_csv<R: Rng + ?Sized>(
        &self,
        n: usize,
        rng: &mut R,
        path: &Path,
    ) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let header: Vec<String> = (0..self.d).map(|i| format!("x{i}")).collect();
        writeln!(w, "{}", header.join(",")).map_err(|e| Error::io(path, e))?;
        let mut buf = vec![0.0; self.d];
        for _ in 0..n {
            self.sample_into(rng, &mut buf);
            let row: Vec<String> = buf.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", row.join(",")).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Sample mean and (n-1)-normalised standard deviation.
pub(crate) fn mean_sd(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    if vals.len() < 2 {
        return (mean, 0.0);
    }
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub sigma2: f64,
    pub sigma2_stderr: f64,
    pub a: f64,
    pub a_stderr: f64,
    pub b: f64,
}

/// Top eigenvalue of `(1/n) sum_i x_i x_i^T` for rows of `samples` (n x d),
/// by power iteration on matrix-vector products through the samples.
pub fn top_second_moment<R: Rng + ?Sized>(samples: &[f64], d: usize, rng: &mut R) -> f64 {
    let n = samples.len() / d;
    if n == 0 {
        return 0.0;
    }
    let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let mut norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut w = vec![0.0; d];
    let mut lambda = 0.0f64;
    for _ in 0..10_000 {
        w.fill(0.0);
        for x in samples.chunks_exact(d) {
            let c: f64 = x.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (wi, xi) in w.iter_mut().zip(x) {
                *wi += c * xi;
            }
        }
        w.iter_mut().for_each(|x| *x /= n as f64);
        // Rayleigh quotient with the unit vector v.
        let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        let converged = (next - lambda).abs() <= 1e-8 * next.abs();
        lambda = next;
        if converged {
            break;
        }
    }
    lambda
}

/// Empirical `(sigma2, A, B)` from `n` fresh draws.
pub fn estimate_moments<R: Rng + ?Sized>(
    source: &VectorSource,
    n: usize,
    rng: &mut R,
) -> Result<MomentEstimate> {
    if n < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: n });
    }
    let d = source.d();
    let samples = source.sample_many(n, rng);
    let norms: Vec<f64> = samples
        .chunks_exact(d)
        .map(|x| x.iter().map(|v| v * v).sum())
        .collect();
    let (mean_norm, sd_norm) = mean_sd(&norms);
    let df = d as f64;
    let sigma2 = mean_norm / df;
    let devs: Vec<f64> = norms.iter().map(|r| (r / sigma2 - df).abs()).collect();
    let (a, sd_a) = mean_sd(&devs);
    let root_n = (n as f64).sqrt();
    let b = top_second_moment(&samples, d, rng);
    Ok(MomentEstimate {
        sigma2,
        sigma2_stderr: sd_norm / df / root_n,
        a,
        a_stderr: sd_a / root_n,
        b,
    })
}
