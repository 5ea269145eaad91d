//! Recursive center-cone triangulation of cubes and the supplemented lattice.
//!
//! The unit cube `[0,1]^k` is cut as follows: in one dimension the segment is
//! its own simplex; in dimension `k` each of the `2k` facets is triangulated in
//! dimension `k - 1` and every facet simplex is coned to the cube center. All
//! vertices land on the half-step grid, so they are stored as integer
//! coordinates in units of `1/2` (`0`, `1`, `2`).
//!
//! Facets are ordered by axis, low side first: facet `2i + side`. Simplex
//! `j` of facet `f` gets index `f * s(k-1) + j`, and its vertex list is the
//! lifted facet simplex followed by the center.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::bounds::site_count_bound;
use crate::error::{Error, Result};
use crate::linalg;

pub const MAX_CUBE_DIM: usize = 6;
pub const MAX_LATTICE_DIM: usize = 4;
pub const DEFAULT_SITE_CAP: usize = 2_000_000;
/// Constant `c` used when comparing site counts with `c (3R/eps)^k omega_k`.
pub const SITE_COUNT_CONSTANT: f64 = 4.0;

/// `s(k) = 2k s(k-1)`, `s(1) = 1`.
pub fn simplex_count(k: usize) -> usize {
    (2..=k).fold(1, |s, j| 2 * j * s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeTriangulation {
    k: usize,
    /// `(k+1) * k` half-step coordinates per simplex.
    vertices: Vec<u8>,
}

fn build_simplices(k: usize) -> Vec<Vec<Vec<u8>>> {
    if k == 1 {
        return vec![vec![vec![0], vec![2]]];
    }
    let sub = build_simplices(k - 1);
    let mut out = Vec::with_capacity(2 * k * sub.len());
    for axis in 0..k {
        for side in 0..2u8 {
            for simplex in &sub {
                let mut verts: Vec<Vec<u8>> = simplex
                    .iter()
                    .map(|v| {
                        let mut w = v.clone();
                        w.insert(axis, 2 * side);
                        w
                    })
                    .collect();
                verts.push(vec![1; k]);
                out.push(verts);
            }
        }
    }
    out
}

/// Triangulates `[0,1]^k` into `s(k)` simplices.
pub fn triangulate_cube(k: usize) -> Result<CubeTriangulation> {
    if k == 0 || k > MAX_CUBE_DIM {
        return Err(Error::DimensionLimit(format!(
            "cube triangulation supports 1 <= k <= {MAX_CUBE_DIM}, got {k}"
        )));
    }
    let vertices = build_simplices(k).into_iter().flatten().flatten().collect();
    Ok(CubeTriangulation { k, vertices })
}

/// Barycentric location of `u` by recursive facet descent.
fn locate_rec(u: &[f64], weights: &mut Vec<f64>) -> usize {
    let k = u.len();
    if k == 1 {
        let t = u[0].clamp(0.0, 1.0);
        weights.push(1.0 - t);
        weights.push(t);
        return 0;
    }
    let mut axis = 0;
    let mut best = -1.0;
    for (j, &x) in u.iter().enumerate() {
        let dev = (x - 0.5).abs();
        if dev > best {
            best = dev;
            axis = j;
        }
    }
    let dev = u[axis] - 0.5;
    let side = usize::from(dev > 0.0);
    let t = (2.0 * dev.abs()).min(1.0);
    let sub: Vec<f64> = (0..k)
        .filter(|&j| j != axis)
        .map(|j| {
            if t > 0.0 {
                (0.5 + (u[j] - 0.5) / t).clamp(0.0, 1.0)
            } else {
                0.5
            }
        })
        .collect();
    let start = weights.len();
    let sub_id = locate_rec(&sub, weights);
    for w in &mut weights[start..] {
        *w *= t;
    }
    weights.push(1.0 - t);
    (2 * axis + side) * simplex_count(k - 1) + sub_id
}

impl CubeTriangulation {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.vertices.len() / ((self.k + 1) * self.k)
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Half-step coordinates of vertex `j` of simplex `i`.
    pub fn vertex(&self, i: usize, j: usize) -> &[u8] {
        let k = self.k;
        let at = (i * (k + 1) + j) * k;
        &self.vertices[at..at + k]
    }

    /// Unit-cube coordinates of the vertices of simplex `i`.
    pub fn simplex(&self, i: usize) -> Vec<Vec<f64>> {
        (0..=self.k)
            .map(|j| self.vertex(i, j).iter().map(|&h| f64::from(h) / 2.0).collect())
            .collect()
    }

    pub fn distinct_vertices(&self) -> Vec<Vec<u8>> {
        let set: BTreeSet<&[u8]> = self.vertices.chunks(self.k).collect();
        set.into_iter().map(<[u8]>::to_vec).collect()
    }

    /// Simplex containing `u in [0,1]^k` and the barycentric weights of `u`
    /// with respect to its vertices. Points on shared boundaries go to the
    /// lowest facet index at each level of the descent.
    pub fn locate(&self, u: &[f64]) -> (usize, Vec<f64>) {
        debug_assert_eq!(u.len(), self.k);
        let mut w = Vec::with_capacity(self.k + 1);
        let id = locate_rec(u, &mut w);
        (id, w)
    }

    /// Barycentric coordinates of `u` with respect to simplex `i`, by solving
    /// the affine system directly.
    pub fn barycentric(&self, i: usize, u: &[f64]) -> Vec<f64> {
        let k = self.k;
        let verts = self.simplex(i);
        let mut m = vec![0.0; k * k];
        for r in 0..k {
            for c in 0..k {
                m[r * k + c] = verts[c + 1][r] - verts[0][r];
            }
        }
        let rhs: Vec<f64> = (0..k).map(|r| u[r] - verts[0][r]).collect();
        let lam = linalg::solve(&m, &rhs, k).expect("triangulation simplices are nondegenerate");
        let mut out = Vec::with_capacity(k + 1);
        out.push(1.0 - lam.iter().sum::<f64>());
        out.extend(lam);
        out
    }

    /// `k`-volume of simplex `i`.
    pub fn volume(&self, i: usize) -> f64 {
        let k = self.k;
        let verts = self.simplex(i);
        let mut m = vec![0.0; k * k];
        for r in 0..k {
            for c in 0..k {
                m[r * k + c] = verts[c + 1][r] - verts[0][r];
            }
        }
        determinant(&mut m, k).abs() / (1..=k).map(|j| j as f64).product::<f64>()
    }
}

fn determinant(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            det = -det;
        }
        det *= a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
        }
    }
    det
}

type Key = [i64; MAX_LATTICE_DIM];

fn key(h: &[i64]) -> Key {
    let mut out = [0; MAX_LATTICE_DIM];
    out[..h.len()].copy_from_slice(h);
    out
}

#[derive(Debug, Clone, Copy)]
pub struct LatticeOptions {
    pub site_cap: usize,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        Self {
            site_cap: DEFAULT_SITE_CAP,
        }
    }
}

/// The `eps`-cubic lattice plus the triangulation supplements, restricted to
/// the cubes that meet the open ball of radius `R + 1`.
///
/// Every vertex of those cubes is a site. Sites with `|s| >= R + 1` are kept
/// (so every simplex is complete) but are pinned to value zero.
#[derive(Debug, Clone)]
pub struct SupplementedLattice {
    k: usize,
    epsilon: f64,
    radius: f64,
    cube: CubeTriangulation,
    /// Half-step coordinates (units of `eps / 2`), `k` per site.
    half: Vec<i64>,
    coords: Vec<f64>,
    pinned: Vec<bool>,
    index: HashMap<Key, usize>,
    /// Lower corners (cube indices) of the included cubes, `k` per cube.
    cubes: Vec<i64>,
    /// Site ids of every simplex of every included cube, `k + 1` per simplex.
    cells: Vec<usize>,
    adj_start: Vec<usize>,
    adj: Vec<usize>,
    /// Per unit-cube simplex: the `k x k` inverse of the edge matrix, used for gradients.
    edge_inverse: Vec<f64>,
}

/// Distance in cube units from the origin to cube `c` along one axis.
fn axis_gap(c: i64) -> i64 {
    if c >= 0 {
        c
    } else {
        -c - 1
    }
}

/// Builds the supplemented lattice for the ball of radius `R + 1`.
pub fn build_lattice(k: usize, epsilon: f64, r: f64) -> Result<SupplementedLattice> {
    build_lattice_with(k, epsilon, r, LatticeOptions::default())
}

pub fn build_lattice_with(
    k: usize,
    epsilon: f64,
    r: f64,
    opts: LatticeOptions,
) -> Result<SupplementedLattice> {
    if k == 0 || k > MAX_LATTICE_DIM {
        return Err(Error::DimensionLimit(format!(
            "lattices support 1 <= k <= {MAX_LATTICE_DIM}, got {k}"
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) || !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!(
            "need eps > 0 and R > 0, got eps = {epsilon}, R = {r}"
        )));
    }
    let rho = r + 1.0;
    let capacity = || {
        Error::Capacity(format!(
            "lattice for k = {k}, R = {r}, eps = {epsilon} exceeds the cap of {} sites",
            opts.site_cap
        ))
    };
    let n = (rho / epsilon).ceil();
    if n.powi(k as i32) > 16.0 * opts.site_cap as f64 || n > 1e9 {
        return Err(capacity());
    }
    let n = n as i64;
    let limit = (rho / epsilon).powi(2);
    let cube = triangulate_cube(k)?;

    let mut cubes = Vec::new();
    let mut c = vec![-n; k];
    loop {
        let gap: i64 = c.iter().map(|&ci| axis_gap(ci).pow(2)).sum();
        if (gap as f64) < limit {
            cubes.extend_from_slice(&c);
        }
        let mut axis = 0;
        while axis < k {
            c[axis] += 1;
            if c[axis] < n {
                break;
            }
            c[axis] = -n;
            axis += 1;
        }
        if axis == k {
            break;
        }
    }

    let corner_offsets: Vec<Vec<u8>> = cube.distinct_vertices();
    let mut set: BTreeSet<Key> = BTreeSet::new();
    let mut h = vec![0i64; k];
    for lo in cubes.chunks(k) {
        for off in &corner_offsets {
            for a in 0..k {
                h[a] = 2 * lo[a] + i64::from(off[a]);
            }
            set.insert(key(&h));
            if set.len() > opts.site_cap {
                return Err(capacity());
            }
        }
    }
    let mut half = Vec::with_capacity(set.len() * k);
    let mut index = HashMap::with_capacity(set.len());
    for (i, kk) in set.iter().enumerate() {
        half.extend_from_slice(&kk[..k]);
        index.insert(*kk, i);
    }
    let n_sites = set.len();
    let step = epsilon / 2.0;
    let coords: Vec<f64> = half.iter().map(|&v| v as f64 * step).collect();
    let pinned = coords
        .chunks(k)
        .map(|s| s.iter().map(|x| x * x).sum::<f64>().sqrt() >= rho * (1.0 - 1e-12))
        .collect();

    let per = cube.len() * (k + 1);
    let mut cells = Vec::with_capacity(cubes.len() / k * per);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut ids = vec![0usize; k + 1];
    for lo in cubes.chunks(k) {
        for s in 0..cube.len() {
            for (j, id) in ids.iter_mut().enumerate() {
                let v = cube.vertex(s, j);
                for a in 0..k {
                    h[a] = 2 * lo[a] + i64::from(v[a]);
                }
                *id = index[&key(&h)];
            }
            cells.extend_from_slice(&ids);
            for a in 0..=k {
                for b in a + 1..=k {
                    let (x, y) = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                    pairs.push((x, y));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let mut degree = vec![0usize; n_sites + 1];
    for &(a, b) in &pairs {
        degree[a] += 1;
        degree[b] += 1;
    }
    let mut adj_start = vec![0usize; n_sites + 1];
    for i in 0..n_sites {
        adj_start[i + 1] = adj_start[i] + degree[i];
    }
    let mut fill = adj_start.clone();
    let mut adj = vec![0usize; adj_start[n_sites]];
    for &(a, b) in &pairs {
        adj[fill[a]] = b;
        fill[a] += 1;
        adj[fill[b]] = a;
        fill[b] += 1;
    }
    for i in 0..n_sites {
        adj[adj_start[i]..adj_start[i + 1]].sort_unstable();
    }

    let mut edge_inverse = Vec::with_capacity(cube.len() * k * k);
    for s in 0..cube.len() {
        let verts = cube.simplex(s);
        let mut m = vec![0.0; k * k];
        for row in 0..k {
            for col in 0..k {
                m[row * k + col] = verts[row + 1][col] - verts[0][col];
            }
        }
        edge_inverse.extend(linalg::invert(&m, k).expect("nondegenerate simplex"));
    }

    Ok(SupplementedLattice {
        k,
        epsilon,
        radius: r,
        cube,
        half,
        coords,
        pinned,
        index,
        cubes,
        cells,
        adj_start,
        adj,
        edge_inverse,
    })
}

/// A point located in the lattice: the sites of its simplex and the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub sites: Vec<usize>,
    pub weights: Vec<f64>,
    /// Index into [`SupplementedLattice::cell`].
    pub cell: usize,
}

impl SupplementedLattice {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `R + 1`.
    pub fn support_radius(&self) -> f64 {
        self.radius + 1.0
    }

    pub fn cube_triangulation(&self) -> &CubeTriangulation {
        &self.cube
    }

    /// Number of sites, pinned ones included.
    pub fn len(&self) -> usize {
        self.pinned.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pinned.is_empty()
    }

    pub fn site(&self, i: usize) -> &[f64] {
        &self.coords[i * self.k..(i + 1) * self.k]
    }

    /// Site coordinates in units of `eps / 2`.
    pub fn half_coords(&self, i: usize) -> &[i64] {
        &self.half[i * self.k..(i + 1) * self.k]
    }

    pub fn is_pinned(&self, i: usize) -> bool {
        self.pinned[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[self.adj_start[i]..self.adj_start[i + 1]]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.len()).map(|i| self.neighbors(i).len()).max().unwrap_or(0)
    }

    /// Adjacent pairs `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |i| {
            self.neighbors(i).iter().filter(move |&&j| j > i).map(move |&j| (i, j))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adj.len() / 2
    }

    pub fn cube_count(&self) -> usize {
        self.cubes.len() / self.k
    }

    /// Number of simplices over all included cubes.
    pub fn cell_count(&self) -> usize {
        self.cells.len() / (self.k + 1)
    }

    /// Site ids of simplex `c`, in the vertex order of the unit triangulation.
    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c * (self.k + 1)..(c + 1) * (self.k + 1)]
    }

    /// Whether the cube with lower corner index `c` meets the open support ball.
    pub fn cube_included(&self, c: &[i64]) -> bool {
        let gap: i64 = c.iter().map(|&ci| axis_gap(ci).pow(2)).sum();
        (gap as f64) < (self.support_radius() / self.epsilon).powi(2)
    }

    /// Site at `x`, if `x` is (within rounding) a lattice site.
    pub fn find_site(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.k {
            return None;
        }
        let step = self.epsilon / 2.0;
        let mut h = [0i64; MAX_LATTICE_DIM];
        for (a, &v) in x.iter().enumerate() {
            let q = (v / step).round();
            if (v - q * step).abs() > 1e-9 * step.max(v.abs()) {
                return None;
            }
            h[a] = q as i64;
        }
        self.index.get(&h).copied()
    }

    /// Simplex containing `x`, or `None` when `x` lies outside every included cube.
    pub fn locate(&self, x: &[f64]) -> Option<Location> {
        let k = self.k;
        let mut lo = [0i64; MAX_LATTICE_DIM];
        let mut u = vec![0.0; k];
        for a in 0..k {
            let s = x[a] / self.epsilon;
            let f = s.floor();
            lo[a] = f as i64;
            u[a] = s - f;
        }
        if !self.cube_included(&lo[..k]) {
            return None;
        }
        let (sid, weights) = self.cube.locate(&u);
        let mut h = [0i64; MAX_LATTICE_DIM];
        let sites = (0..=k)
            .map(|j| {
                let v = self.cube.vertex(sid, j);
                for a in 0..k {
                    h[a] = 2 * lo[a] + i64::from(v[a]);
                }
                self.index[&h]
            })
            .collect();
        let cube_pos = self.cube_position(&lo[..k]);
        Some(Location {
            sites,
            weights,
            cell: cube_pos * self.cube.len() + sid,
        })
    }

    fn cube_position(&self, c: &[i64]) -> usize {
        // Cubes were enumerated in odometer order (axis 0 fastest), which is
        // lexicographic order on the reversed index.
        let k = self.k;
        let n = self.cube_count();
        let cmp = |i: usize| {
            let other = &self.cubes[i * k..(i + 1) * k];
            other.iter().rev().cmp(c.iter().rev())
        };
        let (mut lo, mut hi) = (0, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if cmp(mid).is_lt() {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Gradient of the affine interpolant of `values` on cell `c`.
    pub fn cell_gradient(&self, c: usize, values: &[f64]) -> Vec<f64> {
        let k = self.k;
        let sid = c % self.cube.len();
        let ids = self.cell(c);
        let inv = &self.edge_inverse[sid * k * k..(sid + 1) * k * k];
        let df: Vec<f64> = (1..=k).map(|j| values[ids[j]] - values[ids[0]]).collect();
        (0..k)
            .map(|row| (0..k).map(|col| inv[row * k + col] * df[col]).sum::<f64>() / self.epsilon)
            .collect()
    }

    /// Sites with `|s| <= R + 1`.
    pub fn count_parameters(&self) -> usize {
        let rho = self.support_radius() * (1.0 + 1e-12);
        (0..self.len())
            .filter(|&i| self.site(i).iter().map(|x| x * x).sum::<f64>().sqrt() <= rho)
            .count()
    }

    /// Ratio of the parameter count to `4 (3R/eps)^k omega_k`; above one means
    /// the recorded site-count constant is exceeded.
    pub fn site_count_ratio(&self) -> f64 {
        self.count_parameters() as f64
            / site_count_bound(self.radius, self.epsilon, self.k, SITE_COUNT_CONSTANT)
    }

    fn header(&self) -> String {
        format!("k {}\nepsilon {}\nradius {}\n", self.k, self.epsilon, self.radius)
    }

    pub fn to_text(&self) -> String {
        let mut out = self.header();
        for i in 0..self.len() {
            out.push_str(&join(self.site(i)));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (header, body) = parse_header(text, &["k", "epsilon", "radius"])?;
        let lattice = lattice_from_header(&header)?;
        let mut seen = 0;
        for line in body {
            let x = parse_row(line, lattice.k)?;
            if lattice.find_site(&x).is_none() {
                return Err(Error::InvalidInput(format!("{line:?} is not a lattice site")));
            }
            seen += 1;
        }
        if seen != lattice.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} sites, found {seen}",
                lattice.len()
            )));
        }
        Ok(lattice)
    }
}

/// Number of free parameters of the lattice.
pub fn count_parameters(lattice: &SupplementedLattice) -> usize {
    lattice.count_parameters()
}

fn join(x: &[f64]) -> String {
    x.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

fn parse_header<'a>(
    text: &'a str,
    fields: &[&str],
) -> Result<(Vec<f64>, impl Iterator<Item = &'a str>)> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let mut values = Vec::with_capacity(fields.len());
    for &name in fields {
        let line = lines
            .next()
            .ok_or_else(|| Error::InvalidInput(format!("missing header field {name}")))?;
        let mut parts = line.split_whitespace();
        let value = match (parts.next(), parts.next(), parts.next()) {
            (Some(n), Some(v), None) if n == name => v.parse::<f64>().ok(),
            _ => None,
        };
        values.push(value.ok_or_else(|| {
            Error::InvalidInput(format!("expected `{name} <number>`, got {line:?}"))
        })?);
    }
    Ok((values, lines))
}

fn lattice_from_header(h: &[f64]) -> Result<SupplementedLattice> {
    let k = h[0];
    if k.fract() != 0.0 || k < 1.0 {
        return Err(Error::InvalidInput(format!("bad dimension {k}")));
    }
    build_lattice(k as usize, h[1], h[2])
}

fn parse_row(line: &str, n: usize) -> Result<Vec<f64>> {
    let vals: std::result::Result<Vec<f64>, _> =
        line.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match vals {
        Ok(v) if v.len() == n => Ok(v),
        _ => Err(Error::InvalidInput(format!("expected {n} numbers, got {line:?}"))),
    }
}

/// A piecewise-linear function given by its values on the lattice sites.
#[derive(Debug, Clone)]
pub struct PLFunction {
    lattice: Arc<SupplementedLattice>,
    values: Vec<f64>,
    norm_bound: f64,
}

impl PLFunction {
    /// Validates `|f(s)| <= norm_bound`, `|f(s) - f(t)| <= norm_bound |s - t|`
    /// on adjacent sites, and `f = 0` on pinned sites.
    pub fn new(lattice: Arc<SupplementedLattice>, values: Vec<f64>, norm_bound: f64) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} sites",
                values.len(),
                lattice.len()
            )));
        }
        if !(norm_bound >= 0.0 && norm_bound.is_finite()) {
            return Err(Error::InvalidInput(format!("bad norm bound {norm_bound}")));
        }
        let tol = 1e-9 * norm_bound.max(1.0);
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v.abs() > norm_bound + tol {
                return Err(Error::InvalidInput(format!(
                    "value {v} at site {i} exceeds the bound {norm_bound}"
                )));
            }
            if lattice.is_pinned(i) && v != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "site {i} lies outside the support but has value {v}"
                )));
            }
        }
        for (i, j) in lattice.edges() {
            let dist = distance(lattice.site(i), lattice.site(j));
            if (values[i] - values[j]).abs() > norm_bound * dist + tol {
                return Err(Error::InvalidInput(format!(
                    "edge ({i}, {j}) violates the Lipschitz bound {norm_bound}"
                )));
            }
        }
        Ok(Self {
            lattice,
            values,
            norm_bound,
        })
    }

    pub fn zero(lattice: Arc<SupplementedLattice>) -> Self {
        let values = vec![0.0; lattice.len()];
        Self {
            lattice,
            values,
            norm_bound: 0.0,
        }
    }

    pub fn lattice(&self) -> &Arc<SupplementedLattice> {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// Barycentric interpolation of the site values; zero outside the
    /// included cubes.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        match self.lattice.locate(x) {
            Some(loc) => loc
                .sites
                .iter()
                .zip(&loc.weights)
                .map(|(&s, &w)| w * self.values[s])
                .sum(),
            None => 0.0,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest slope along lattice edges.
    pub fn edge_lipschitz(&self) -> f64 {
        self.lattice
            .edges()
            .map(|(i, j)| {
                (self.values[i] - self.values[j]).abs()
                    / distance(self.lattice.site(i), self.lattice.site(j))
            })
            .fold(0.0, f64::max)
    }

    /// Exact Lipschitz constant of the interpolant: the largest gradient norm
    /// over all simplices.
    pub fn lipschitz_constant(&self) -> f64 {
        (0..self.lattice.cell_count())
            .map(|c| norm(&self.lattice.cell_gradient(c, &self.values)))
            .fold(0.0, f64::max)
    }

    /// `max(sup |f|, Lip f)` of the interpolant.
    pub fn bl_norm(&self) -> f64 {
        self.sup_norm().max(self.lipschitz_constant())
    }

    pub fn to_text(&self) -> String {
        let mut out = self.lattice.header();
        let _ = writeln!(out, "norm_bound {}", self.norm_bound);
        for i in 0..self.lattice.len() {
            let _ = writeln!(out, "{},{}", join(self.lattice.site(i)), self.values[i]);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (header, body) = parse_header(text, &["k", "epsilon", "radius", "norm_bound"])?;
        let lattice = lattice_from_header(&header)?;
        let k = lattice.k();
        let mut values = vec![f64::NAN; lattice.len()];
        for line in body {
            let row = parse_row(line, k + 1)?;
            let i = lattice
                .find_site(&row[..k])
                .ok_or_else(|| Error::InvalidInput(format!("{line:?} is not a lattice site")))?;
            values[i] = row[k];
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidInput("some sites have no value".into()));
        }
        Self::new(Arc::new(lattice), values, header[3])
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read_text(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Free-function form of [`PLFunction::interpolate`].
pub fn interpolate(f: &PLFunction, x: &[f64]) -> f64 {
    f.interpolate(x)
}

/// Interpolant of `g` from its values at the sites (pinned sites set to zero).
/// For `g` with `|g| <= beta` and `Lip(g) <= beta` the declared bound is
/// `beta`; if the site values show otherwise it is raised to what they need.
pub fn pl_approximate<G: Fn(&[f64]) -> f64>(
    g: G,
    beta: f64,
    lattice: &Arc<SupplementedLattice>,
) -> PLFunction {
    let values: Vec<f64> = (0..lattice.len())
        .map(|i| if lattice.is_pinned(i) { 0.0 } else { g(lattice.site(i)) })
        .collect();
    let mut f = PLFunction {
        lattice: Arc::clone(lattice),
        values,
        norm_bound: beta.max(0.0),
    };
    f.norm_bound = f.norm_bound.max(f.sup_norm()).max(f.edge_lipschitz());
    f
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
