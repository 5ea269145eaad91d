//! Finitely supported probability measures on R^k.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Weights must sum to one within this tolerance after normalisation.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    k: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    /// `points` is flattened row-major (n x k).
    pub fn new(k: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidDimension("measure dimension must be positive".into()));
        }
        if points.len() != k * weights.len() {
            return Err(Error::InvalidDimension(format!(
                "{} coordinates for {} points in R^{k}",
                points.len(),
                weights.len()
            )));
        }
        if weights.is_empty() {
            return Err(Error::InvalidInput("measure needs at least one point".into()));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { k, points, weights })
    }

    /// Equal mass on each of the n points.
    pub fn uniform(k: usize, points: Vec<f64>) -> Result<Self> {
        let n = points.len().checked_div(k).unwrap_or(0);
        Self::new(k, points, vec![1.0 / n.max(1) as f64; n])
    }

    /// Rescales nonnegative weights to sum to one.
    pub fn normalized(k: usize, points: Vec<f64>, mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidInput("total weight must be positive".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(k, points, weights)
    }

    pub fn dirac(point: &[f64]) -> Result<Self> {
        Self::new(point.len(), point.to_vec(), vec![1.0])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.k..(i + 1) * self.k]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.k)
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sum_i w_i f(x_i)`.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.points()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .sum()
    }

    /// Largest eigenvalue of the second-moment matrix `sum_i w_i x_i x_i^T`
    /// (Jacobi sweeps on the k x k matrix).
    pub fn max_directional_second_moment(&self) -> f64 {
        let k = self.k;
        let mut s = vec![0.0; k * k];
        for (x, w) in self.points().zip(&self.weights) {
            for i in 0..k {
                for j in 0..k {
                    s[i * k + j] += w * x[i] * x[j];
                }
            }
        }
        crate::linalg::symmetric_eigenvalues(&mut s, k)
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// CSV layout: first line holds `k`; each further line is `x_1,...,x_k,weight`.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text).map_err(|e| match e {
            Error::InvalidInput(m) | Error::InvalidDimension(m) => Error::parse(path, m),
            other => other,
        })
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty measure file".into()))?;
        let k: usize = header
            .trim()
            .trim_start_matches("k=")
            .trim_start_matches("k,")
            .parse()
            .map_err(|_| Error::InvalidInput(format!("header `{header}` is not a dimension")))?;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (row, line) in lines.enumerate() {
            let vals: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| Error::InvalidInput(format!("row {}: {e}", row + 1)))?;
            if vals.len() != k + 1 {
                return Err(Error::InvalidInput(format!(
                    "row {} has {} fields, expected {}",
                    row + 1,
                    vals.len(),
                    k + 1
                )));
            }
            points.extend_from_slice(&vals[..k]);
            weights.push(vals[k]);
        }
        if weights.is_empty() {
            return Err(Error::InvalidInput("measure file has no points".into()));
        }
        let total: f64 = weights.iter().sum();
        // Text weights are rounded; accept anything that is clearly meant to sum to one.
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        Self::normalized(k, points, weights)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "{}", self.k).map_err(io)?;
        for (x, wt) in self.points().zip(&self.weights) {
            let mut fields: Vec<String> = x.iter().map(|v| format!("{v:.16e}")).collect();
            fields.push(format!("{wt:.16e}"));
            writeln!(w, "{}", fields.join(",")).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}
