//! Orthonormal k-frames in R^d: Haar sampling, projection and the frame
//! metric `rho(a, b) = sqrt(sum_j |a_j - b_j|^2)`.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Orthonormality tolerance enforced on every frame.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// An orthonormal k-frame in R^d, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelFrame {
    d: usize,
    k: usize,
    columns: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(d: usize, k: usize) -> Result<()> {
    if k == 0 || d == 0 || k > d {
        return Err(Error::InvalidDimension(format!(
            "frame needs 1 <= k <= d, got d={d}, k={k}"
        )));
    }
    Ok(())
}

impl StiefelFrame {
    /// Builds a frame from column vectors, checking orthonormality.
    pub fn from_columns(d: usize, columns: Vec<Vec<f64>>) -> Result<Self> {
        let k = columns.len();
        check_dims(d, k)?;
        let mut data = Vec::with_capacity(d * k);
        for (j, col) in columns.iter().enumerate() {
            if col.len() != d {
                return Err(Error::InvalidDimension(format!(
                    "column {j} has {} entries, expected {d}",
                    col.len()
                )));
            }
            data.extend_from_slice(col);
        }
        let frame = Self {
            d,
            k,
            columns: data,
        };
        frame.check_orthonormal()?;
        Ok(frame)
    }

    /// The first `k` standard basis vectors of R^d.
    pub fn coordinate(d: usize, k: usize) -> Result<Self> {
        check_dims(d, k)?;
        let mut columns = vec![0.0; d * k];
        for j in 0..k {
            columns[j * d + j] = 1.0;
        }
        Ok(Self { d, k, columns })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j * self.d..(j + 1) * self.d]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.columns.chunks_exact(self.d)
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.k {
            for j in i..self.k {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(self.column(i), self.column(j)) - target).abs());
            }
        }
        worst
    }

    fn check_orthonormal(&self) -> Result<()> {
        if self.columns.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("frame has non-finite entries".into()));
        }
        let defect = self.orthonormality_defect();
        if defect > ORTHONORMAL_TOL {
            return Err(Error::InvalidInput(format!(
                "columns are not orthonormal (max Gram defect {defect:e})"
            )));
        }
        Ok(())
    }

    /// `(<x, theta_1>, ..., <x, theta_k>)`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.d {
            return Err(Error::InvalidDimension(format!(
                "vector of length {} projected by a frame in R^{}",
                x.len(),
                self.d
            )));
        }
        Ok(self.columns().map(|c| dot(c, x)).collect())
    }

    /// Projection that writes into `out`; lengths are the caller's responsibility.
    pub(crate) fn project_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(self.columns()) {
            *o = dot(c, x);
        }
    }

    /// Rotates every column by the orthogonal d x d matrix `rot` (row-major).
    pub fn rotated(&self, rot: &[f64]) -> Result<Self> {
        let d = self.d;
        if rot.len() != d * d {
            return Err(Error::InvalidDimension(format!(
                "rotation has {} entries, expected {}",
                rot.len(),
                d * d
            )));
        }
        let mut columns = vec![0.0; d * self.k];
        for (j, col) in self.columns().enumerate() {
            for r in 0..d {
                columns[j * d + r] = dot(&rot[r * d..(r + 1) * d], col);
            }
        }
        Ok(Self {
            d,
            k: self.k,
            columns,
        })
    }

    /// Row-major d x k matrix.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.d * self.k);
        for r in 0..self.d {
            for j in 0..self.k {
                out.push(self.columns[j * self.d + r]);
            }
        }
        out
    }

    pub fn from_row_major(d: usize, k: usize, data: &[f64]) -> Result<Self> {
        check_dims(d, k)?;
        if data.len() != d * k {
            return Err(Error::InvalidDimension(format!(
                "expected {} entries for a {d}x{k} frame, got {}",
                d * k,
                data.len()
            )));
        }
        let cols = (0..k)
            .map(|j| (0..d).map(|r| data[r * k + j]).collect())
            .collect();
        Self::from_columns(d, cols)
    }

    /// Little-endian f64, row-major d x k. No header; the shape travels separately.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.to_row_major()
            .into_iter()
            .flat_map(f64::to_le_bytes)
            .collect()
    }

    pub fn from_le_bytes(d: usize, k: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != 8 * d * k {
            return Err(Error::InvalidDimension(format!(
                "expected {} bytes for a {d}x{k} frame, got {}",
                8 * d * k,
                bytes.len()
            )));
        }
        let data: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
            .collect();
        Self::from_row_major(d, k, &data)
    }

    /// Comma-separated text, one row of the d x k matrix per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for row in self.to_row_major().chunks_exact(self.k) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(s, "{}", line.join(","));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut data = Vec::new();
        let mut rows = 0;
        let mut k = None;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let row: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| Error::InvalidInput(format!("frame text: {e}")))?;
            match k {
                None => k = Some(row.len()),
                Some(k) if k != row.len() => {
                    return Err(Error::InvalidInput("ragged frame text".into()))
                }
                _ => {}
            }
            data.extend(row);
            rows += 1;
        }
        Self::from_row_major(rows, k.unwrap_or(0), &data)
    }
}

/// Haar-distributed frame: Gaussian d x k matrix, Gram-Schmidt with one
/// re-orthogonalisation pass. The implied triangular factor has a positive
/// diagonal, which makes the law exactly Haar.
pub fn haar_sample<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Result<StiefelFrame> {
    check_dims(d, k)?;
    let mut columns: Vec<f64> = (0..d * k).map(|_| rng.sample(StandardNormal)).collect();
    for j in 0..k {
        let (done, rest) = columns.split_at_mut(j * d);
        let v = &mut rest[..d];
        for _pass in 0..2 {
            for q in done.chunks_exact(d) {
                let c = dot(q, v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let norm = dot(v, v).sqrt();
        // A Gaussian column lies in the span of the previous ones with probability zero.
        debug_assert!(norm > 0.0);
        for vi in v.iter_mut() {
            *vi /= norm;
        }
    }
    Ok(StiefelFrame { d, k, columns })
}

/// `rho(a, b)`; frames must share (d, k).
pub fn frame_distance(a: &StiefelFrame, b: &StiefelFrame) -> Result<f64> {
    if a.d != b.d || a.k != b.k {
        return Err(Error::InvalidDimension(format!(
            "frames of shape {}x{} and {}x{}",
            a.d, a.k, b.d, b.k
        )));
    }
    Ok(a.columns
        .iter()
        .zip(&b.columns)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn square_frame_is_orthogonal() {
        let f = haar_sample(3, 3, &mut seeded(1)).unwrap();
        assert!(f.orthonormality_defect() < 1e-10);
    }

    #[test]
    fn same_seed_same_frame() {
        let a = haar_sample(5, 2, &mut seeded(99)).unwrap();
        let b = haar_sample(5, 2, &mut seeded(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(
            haar_sample(3, 4, &mut seeded(0)),
            Err(Error::InvalidDimension(_))
        ));
        assert!(haar_sample(3, 0, &mut seeded(0)).is_err());
    }

    #[test]
    fn coordinate_projection() {
        let f = StiefelFrame::coordinate(4, 2).unwrap();
        assert_eq!(f.project(&[3.0, -1.0, 7.0, 2.0]).unwrap(), vec![3.0, -1.0]);
        assert_eq!(f.project(&[0.0; 4]).unwrap(), vec![0.0, 0.0]);
        assert!(f.project(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn distance_examples() {
        let a = StiefelFrame::coordinate(2, 1).unwrap();
        let b = StiefelFrame::from_columns(2, vec![vec![0.0, 1.0]]).unwrap();
        assert_eq!(frame_distance(&a, &a).unwrap(), 0.0);
        assert!((frame_distance(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let c = StiefelFrame::coordinate(3, 1).unwrap();
        assert!(frame_distance(&a, &c).is_err());
    }

    #[test]
    fn serialisation_roundtrips() {
        let f = haar_sample(6, 3, &mut seeded(5)).unwrap();
        assert_eq!(StiefelFrame::from_le_bytes(6, 3, &f.to_le_bytes()).unwrap(), f);
        assert_eq!(StiefelFrame::from_text(&f.to_text()).unwrap(), f);
        assert!(StiefelFrame::from_le_bytes(6, 3, &[0u8; 7]).is_err());
    }

    #[test]
    fn non_orthonormal_columns_rejected() {
        let r = StiefelFrame::from_columns(2, vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert!(r.is_err());
    }
}
