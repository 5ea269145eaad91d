//! Seeded experiment harness: concentration over frames, scaling in `(d, k)`,
//! and the cross-polytope sharpness example.
//!
//! Each trial draws from its own stream keyed by `(master_seed, d, k, frame)`,
//! so results do not depend on scheduling and any cell can be recomputed
//! alone. Records are sorted by `(d, k, frame_index)` before they are written.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bl_distance::{bl_empirical_gaussian, witness_lower_bound};
use crate::bounds::{
    annealed_bound, concentration_tail, conditional_bound, critical_k, sharpness_gaussian_bound,
    BoundConstants,
};
use crate::distributions::{make_source, mean_sd, SourceKind, VectorSource};
use crate::error::{Error, Result};
use crate::measure::EmpiricalMeasure;
use crate::rng::StreamKey;
use crate::stiefel::haar_sample;

pub const MIN_CONCENTRATION_FRAMES: usize = 30;
/// Deviations above the mean at which concentration tails are tabulated.
pub const TAIL_EPS_GRID: [f64; 5] = [0.0025, 0.005, 0.01, 0.02, 0.04];
/// Default `c` values for `k = round(c log d / log log d)` in the sharpness run.
pub const SHARPNESS_COEFFICIENTS: [f64; 2] = [1.0, 3.0];

fn default_distribution() -> SourceKind {
    SourceKind::CrossPolytope
}
fn default_d_list() -> Vec<usize> {
    vec![128, 512, 2048]
}
fn default_k_list() -> Vec<usize> {
    vec![2]
}
fn default_n_sample() -> usize {
    2000
}
fn default_m_gauss() -> usize {
    2000
}
fn default_n_frames() -> usize {
    100
}
fn default_n_mc_witness() -> usize {
    100_000
}
fn default_output_path() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_distribution")]
    pub distribution: SourceKind,
    #[serde(default = "default_d_list")]
    pub d_list: Vec<usize>,
    #[serde(default = "default_k_list")]
    pub k_list: Vec<usize>,
    #[serde(default = "default_n_sample")]
    pub n_sample: usize,
    #[serde(default = "default_m_gauss")]
    pub m_gauss: usize,
    #[serde(default = "default_n_frames")]
    pub n_frames: usize,
    #[serde(default = "default_n_mc_witness")]
    pub n_mc_witness: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub constants: BoundConstants,
    #[serde(default = "default_output_path")]
    pub output_path: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_sample", self.n_sample),
            ("m_gauss", self.m_gauss),
            ("n_frames", self.n_frames),
            ("n_mc_witness", self.n_mc_witness),
        ] {
            if v == 0 {
                return Err(Error::InvalidInput(format!("{name} must be at least 1")));
            }
        }
        if self.d_list.is_empty() {
            return Err(Error::InvalidInput("d_list is empty".into()));
        }
        self.constants.validate()
    }

    fn cells(&self) -> Result<Vec<(usize, usize)>> {
        if self.k_list.is_empty() {
            return Err(Error::InvalidInput("k_list is empty".into()));
        }
        let mut cells = Vec::new();
        for &d in &self.d_list {
            for &k in &self.k_list {
                if k == 0 || k > d {
                    return Err(Error::InvalidDimension(format!(
                        "need 1 <= k <= d, got d = {d}, k = {k}"
                    )));
                }
                cells.push((d, k));
            }
        }
        cells.sort_unstable();
        cells.dedup();
        Ok(cells)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Concentration,
    Scaling,
    Sharpness,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Sharpness => "sharpness",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concentration" => Ok(ExperimentKind::Concentration),
            "scaling" => Ok(ExperimentKind::Scaling),
            "sharpness" => Ok(ExperimentKind::Sharpness),
            other => Err(Error::InvalidInput(format!("unknown experiment {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub d: usize,
    pub k: usize,
    pub frame_index: usize,
    pub estimate: f64,
    pub baseline: f64,
    pub corrected: f64,
    /// Standard error of the cell mean of `estimate - baseline`.
    pub stderr: f64,
    pub bound_thm1: f64,
    pub bound_thm3: f64,
    /// Seconds; not written to CSV unless asked for, since it varies run to run.
    pub wall_time: f64,
}

/// Projected sample of one Haar frame compared with `sigma Z`.
fn run_trial(
    cfg: &ExperimentConfig,
    source: &VectorSource,
    d: usize,
    k: usize,
    frame_index: usize,
) -> Result<TrialRecord> {
    let start = Instant::now();
    let mut rng = StreamKey::new(cfg.master_seed).stream(&[d as u64, k as u64, frame_index as u64]);
    let frame = haar_sample(d, k, &mut rng)?;
    let mut x = vec![0.0; d];
    let mut pts = vec![0.0; cfg.n_sample * k];
    for row in pts.chunks_exact_mut(k) {
        source.sample_into(&mut rng, &mut x);
        frame.project_into(&x, row);
    }
    let sample = EmpiricalMeasure::uniform(k, pts)?;
    let cmp = bl_empirical_gaussian(&sample, source.sigma(), cfg.m_gauss, &mut rng)?;
    let (df, kf) = (d as f64, k as f64);
    let a = source.moments().a.value();
    let b = source.moments().b.value();
    let sigma = source.sigma();
    let bound_thm1 = if d >= 2 { annealed_bound(sigma, df, kf, a)? } else { f64::NAN };
    let bound_thm3 = if d >= 2 {
        conditional_bound(df, kf, a, b, sigma, &cfg.constants)?.full
    } else {
        f64::NAN
    };
    Ok(TrialRecord {
        d,
        k,
        frame_index,
        estimate: cmp.estimate,
        baseline: cmp.baseline,
        corrected: cmp.corrected(),
        stderr: f64::NAN,
        bound_thm1,
        bound_thm3,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn run_trials(cfg: &ExperimentConfig, cells: &[(usize, usize)]) -> Result<Vec<TrialRecord>> {
    let mut sources = Vec::new();
    for &d in &cfg.d_list {
        if !sources.iter().any(|(dd, _)| *dd == d) {
            sources.push((d, make_source(cfg.distribution, d)?));
        }
    }
    let jobs: Vec<(usize, usize, usize)> = cells
        .iter()
        .flat_map(|&(d, k)| (0..cfg.n_frames).map(move |f| (d, k, f)))
        .collect();
    let mut records = jobs
        .par_iter()
        .map(|&(d, k, f)| {
            let source = &sources.iter().find(|(dd, _)| *dd == d).expect("source built").1;
            run_trial(cfg, source, d, k, f)
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| (r.d, r.k, r.frame_index));
    for chunk in records.chunk_by_mut(|a, b| (a.d, a.k) == (b.d, b.k)) {
        let diffs: Vec<f64> = chunk.iter().map(|r| r.estimate - r.baseline).collect();
        let (_, sd) = mean_sd(&diffs);
        let se = sd / (diffs.len() as f64).sqrt();
        for r in chunk {
            r.stderr = se;
        }
    }
    Ok(records)
}

/// Per-cell statistics shared by the concentration and scaling summaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellStats {
    pub d: usize,
    pub k: usize,
    pub n_frames: usize,
    pub mean_estimate: f64,
    pub sd_estimate: f64,
    pub mean_baseline: f64,
    pub mean_corrected: f64,
    pub sd_corrected: f64,
    /// Mean of the unclamped difference `estimate - baseline`.
    pub mean_difference: f64,
    pub stderr_difference: f64,
}

fn cell_stats(records: &[TrialRecord]) -> Vec<CellStats> {
    records
        .chunk_by(|a, b| (a.d, a.k) == (b.d, b.k))
        .map(|cell| {
            let col = |f: fn(&TrialRecord) -> f64| cell.iter().map(f).collect::<Vec<_>>();
            let (mean_estimate, sd_estimate) = mean_sd(&col(|r| r.estimate));
            let (mean_baseline, _) = mean_sd(&col(|r| r.baseline));
            let (mean_corrected, sd_corrected) = mean_sd(&col(|r| r.corrected));
            let (mean_difference, sd_diff) = mean_sd(&col(|r| r.estimate - r.baseline));
            CellStats {
                d: cell[0].d,
                k: cell[0].k,
                n_frames: cell.len(),
                mean_estimate,
                sd_estimate,
                mean_baseline,
                mean_corrected,
                sd_corrected,
                mean_difference,
                stderr_difference: sd_diff / (cell.len() as f64).sqrt(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRow {
    pub d: usize,
    pub k: usize,
    pub eps: f64,
    /// Fraction of frames whose corrected estimate exceeds the cell mean by more than `eps`.
    pub empirical_tail: f64,
    pub concentration_tail: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationRun {
    pub records: Vec<TrialRecord>,
    pub cells: Vec<CellStats>,
    pub tails: Vec<TailRow>,
}

/// Fluctuations of the corrected estimate over Haar frames.
pub fn run_concentration(cfg: &ExperimentConfig) -> Result<ConcentrationRun> {
    cfg.validate()?;
    if cfg.n_frames < MIN_CONCENTRATION_FRAMES {
        return Err(Error::InvalidInput(format!(
            "concentration needs at least {MIN_CONCENTRATION_FRAMES} frames, got {}",
            cfg.n_frames
        )));
    }
    let cells = cfg.cells()?;
    let records = run_trials(cfg, &cells)?;
    let stats = cell_stats(&records);
    let mut tails = Vec::new();
    for (cell, st) in records.chunk_by(|a, b| (a.d, a.k) == (b.d, b.k)).zip(&stats) {
        let b = make_source(cfg.distribution, st.d)?.moments().b.value();
        for eps in TAIL_EPS_GRID {
            let over = cell.iter().filter(|r| r.corrected > st.mean_corrected + eps).count();
            tails.push(TailRow {
                d: st.d,
                k: st.k,
                eps,
                empirical_tail: over as f64 / cell.len() as f64,
                concentration_tail: concentration_tail(st.d as f64, b, eps, &cfg.constants)?,
            });
        }
    }
    Ok(ConcentrationRun {
        records,
        cells: stats,
        tails,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub stats: CellStats,
    pub annealed: f64,
    pub conditional_full: f64,
    pub conditional_simplified: f64,
    /// `2 log d / log log d`, or NaN when `d <= e`.
    pub critical_k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRun {
    pub records: Vec<TrialRecord>,
    pub rows: Vec<ScalingRow>,
}

/// Frame-averaged corrected estimates over the `(d, k)` grid next to the bounds.
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<ScalingRun> {
    cfg.validate()?;
    let cells = cfg.cells()?;
    let records = run_trials(cfg, &cells)?;
    let mut rows = Vec::new();
    for st in cell_stats(&records) {
        let source = make_source(cfg.distribution, st.d)?;
        let (df, kf) = (st.d as f64, st.k as f64);
        let (a, b, sigma) = (source.moments().a.value(), source.moments().b.value(), source.sigma());
        let (annealed, full, simplified) = if st.d >= 2 {
            let cb = conditional_bound(df, kf, a, b, sigma, &cfg.constants)?;
            (annealed_bound(sigma, df, kf, a)?, cb.full, cb.simplified)
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        rows.push(ScalingRow {
            stats: st,
            annealed,
            conditional_full: full,
            conditional_simplified: simplified,
            critical_k: critical_k(df, 2.0).unwrap_or(f64::NAN),
        });
    }
    Ok(ScalingRun { records, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessRow {
    pub d: usize,
    pub coefficient: f64,
    pub k: usize,
    pub witness_lower: f64,
    pub witness_mean: f64,
    pub mc_error: f64,
    /// Integral of the witness against the uniform measure on the projected vertices.
    pub vertex_integral: f64,
    pub gaussian_bound: f64,
}

/// Projected cross-polytope vertices `±sqrt(d) theta^T e_i`, row by row.
pub fn projected_cross_polytope(frame: &crate::stiefel::StiefelFrame) -> Vec<f64> {
    let (d, k) = (frame.d(), frame.k());
    let scale = (d as f64).sqrt();
    let mut out = Vec::with_capacity(2 * d * k);
    for sign in [1.0, -1.0] {
        for i in 0..d {
            out.extend((0..k).map(|j| sign * scale * frame.column(j)[i]));
        }
    }
    out
}

/// Witness lower bounds for the projected cross-polytope at
/// `k = round(c log d / log log d)` for each coefficient `c`.
pub fn run_sharpness(cfg: &ExperimentConfig, coefficients: &[f64]) -> Result<Vec<SharpnessRow>> {
    cfg.validate()?;
    if cfg.distribution != SourceKind::CrossPolytope {
        return Err(Error::InvalidInput(format!(
            "the sharpness experiment needs the cross-polytope source, got {}",
            cfg.distribution
        )));
    }
    let mut jobs = Vec::new();
    for &d in &cfg.d_list {
        for &c in coefficients {
            let k = (critical_k(d as f64, c)?.round() as usize).clamp(1, d);
            jobs.push((d, c, k));
        }
    }
    let key = StreamKey::new(cfg.master_seed);
    let mut rows = Vec::with_capacity(jobs.len());
    for (d, c, k) in jobs {
        let mut rng = key.stream(&[d as u64, k as u64, 0]);
        let frame = haar_sample(d, k, &mut rng)?;
        let pts = projected_cross_polytope(&frame);
        let vertex_integral = pts
            .chunks_exact(k)
            .map(|p| witness_at(p, &pts, k))
            .sum::<f64>()
            / (2 * d) as f64;
        let w = witness_lower_bound(&pts, k, 1.0, cfg.n_mc_witness, &mut rng)?;
        rows.push(SharpnessRow {
            d,
            coefficient: c,
            k,
            witness_lower: w.lower,
            witness_mean: w.mean,
            mc_error: w.mc_error,
            vertex_integral,
            gaussian_bound: sharpness_gaussian_bound(d as f64, k as f64)?,
        });
    }
    Ok(rows)
}

fn witness_at(x: &[f64], pts: &[f64], k: usize) -> f64 {
    let d2 = pts
        .chunks_exact(k)
        .map(|p| p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    (1.0 - d2.sqrt()).max(0.0)
}

/// Full-precision float text (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    pub include_wall_time: bool,
}

const RECORD_COLUMNS: [&str; 10] = [
    "d",
    "k",
    "frame_index",
    "estimate",
    "baseline",
    "corrected",
    "stderr",
    "bound_thm1",
    "bound_thm3",
    "wall_time",
];

pub fn records_to_csv(records: &[TrialRecord], opts: CsvOptions) -> String {
    let ncol = if opts.include_wall_time { 10 } else { 9 };
    let mut out = RECORD_COLUMNS[..ncol].join(",");
    out.push('\n');
    for r in records {
        let mut cols = vec![
            r.d.to_string(),
            r.k.to_string(),
            r.frame_index.to_string(),
        ];
        cols.extend(
            [r.estimate, r.baseline, r.corrected, r.stderr, r.bound_thm1, r.bound_thm3]
                .map(fmt_f64),
        );
        if opts.include_wall_time {
            cols.push(fmt_f64(r.wall_time));
        }
        let _ = writeln!(out, "{}", cols.join(","));
    }
    out
}

/// Writes records without the wall-time column, so reruns are byte-identical.
pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    emit_csv_with(records, path, CsvOptions::default())
}

pub fn emit_csv_with(records: &[TrialRecord], path: &Path, opts: CsvOptions) -> Result<()> {
    std::fs::write(path, records_to_csv(records, opts)).map_err(|e| Error::io(path, e))
}

/// Parses record CSV as written by [`emit_csv_with`]; a missing wall-time
/// column reads as NaN.
pub fn parse_records_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::InvalidInput(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let expected_len = match header.len() {
        9 | 10 => header.len(),
        n => return Err(Error::InvalidInput(format!("expected 9 or 10 columns, got {n}"))),
    };
    if header.iter().zip(RECORD_COLUMNS).any(|(h, c)| h != c) {
        return Err(Error::InvalidInput(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::InvalidInput(e.to_string()))?;
        if row.len() != expected_len {
            return Err(Error::InvalidInput(format!("short row {row:?}")));
        }
        let int = |i: usize| {
            row[i]
                .parse::<usize>()
                .map_err(|e| Error::InvalidInput(format!("column {}: {e}", RECORD_COLUMNS[i])))
        };
        let float = |i: usize| {
            row[i]
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("column {}: {e}", RECORD_COLUMNS[i])))
        };
        out.push(TrialRecord {
            d: int(0)?,
            k: int(1)?,
            frame_index: int(2)?,
            estimate: float(3)?,
            baseline: float(4)?,
            corrected: float(5)?,
            stderr: float(6)?,
            bound_thm1: float(7)?,
            bound_thm3: float(8)?,
            wall_time: if expected_len == 10 { float(9)? } else { f64::NAN },
        });
    }
    Ok(out)
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn stats_cols(s: &CellStats) -> Vec<String> {
    let mut v = vec![s.d.to_string(), s.k.to_string(), s.n_frames.to_string()];
    v.extend(
        [
            s.mean_estimate,
            s.sd_estimate,
            s.mean_baseline,
            s.mean_corrected,
            s.sd_corrected,
            s.mean_difference,
            s.stderr_difference,
        ]
        .map(fmt_f64),
    );
    v
}

const STATS_HEADER: [&str; 10] = [
    "d",
    "k",
    "n_frames",
    "mean_estimate",
    "sd_estimate",
    "mean_baseline",
    "mean_corrected",
    "sd_corrected",
    "mean_difference",
    "stderr_difference",
];

pub fn concentration_summary_csv(run: &ConcentrationRun) -> String {
    let mut header = STATS_HEADER.to_vec();
    header.extend(["eps", "empirical_tail", "concentration_tail"]);
    let rows = run.tails.iter().map(|t| {
        let st = run.cells.iter().find(|s| (s.d, s.k) == (t.d, t.k)).expect("cell present");
        let mut v = stats_cols(st);
        v.extend([t.eps, t.empirical_tail, t.concentration_tail].map(fmt_f64));
        v
    });
    table(&header, rows)
}

pub fn scaling_summary_csv(run: &ScalingRun) -> String {
    let mut header = STATS_HEADER.to_vec();
    header.extend(["annealed", "conditional_full", "conditional_simplified", "critical_k"]);
    let rows = run.rows.iter().map(|r| {
        let mut v = stats_cols(&r.stats);
        v.extend(
            [r.annealed, r.conditional_full, r.conditional_simplified, r.critical_k].map(fmt_f64),
        );
        v
    });
    table(&header, rows)
}

pub fn sharpness_csv(rows: &[SharpnessRow]) -> String {
    let header = [
        "d",
        "coefficient",
        "k",
        "witness_lower",
        "witness_mean",
        "mc_error",
        "vertex_integral",
        "gaussian_bound",
    ];
    table(
        &header,
        rows.iter().map(|r| {
            let mut v = vec![r.d.to_string(), fmt_f64(r.coefficient), r.k.to_string()];
            v.extend(
                [r.witness_lower, r.witness_mean, r.mc_error, r.vertex_integral, r.gaussian_bound]
                    .map(fmt_f64),
            );
            v
        }),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub constants: BoundConstants,
    pub sharpness_coefficients: Vec<f64>,
    pub version: String,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub files: Vec<PathBuf>,
}

/// Runs an experiment and writes its CSVs plus `<name>_manifest.json` into
/// `cfg.output_path`. Returns the manifest.
pub fn run_and_persist(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    sharpness_coefficients: &[f64],
) -> Result<Manifest> {
    let start = Instant::now();
    let dir = &cfg.output_path;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = kind.name();
    let mut outputs: Vec<(PathBuf, String)> = Vec::new();
    match kind {
        ExperimentKind::Concentration => {
            let run = run_concentration(cfg)?;
            outputs.push((dir.join(format!("{name}.csv")), records_to_csv(&run.records, CsvOptions::default())));
            outputs.push((dir.join(format!("{name}_summary.csv")), concentration_summary_csv(&run)));
        }
        ExperimentKind::Scaling => {
            let run = run_scaling(cfg)?;
            outputs.push((dir.join(format!("{name}.csv")), records_to_csv(&run.records, CsvOptions::default())));
            outputs.push((dir.join(format!("{name}_summary.csv")), scaling_summary_csv(&run)));
        }
        ExperimentKind::Sharpness => {
            let rows = run_sharpness(cfg, sharpness_coefficients)?;
            outputs.push((dir.join(format!("{name}.csv")), sharpness_csv(&rows)));
        }
    }
    for (path, text) in &outputs {
        std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    let manifest = Manifest {
        experiment: kind,
        config: cfg.clone(),
        constants: cfg.constants,
        sharpness_coefficients: sharpness_coefficients.to_vec(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        threads: rayon::current_num_threads(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        files: outputs.into_iter().map(|(p, _)| p).collect(),
    };
    let path = dir.join(format!("{name}_manifest.json"));
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
