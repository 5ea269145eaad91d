use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use marginal_lab::bl_distance::{bl_certified_with, bl_lp_with, CertifyOptions, ErrorModel, LpOptions};
use marginal_lab::bounds::{
    annealed_bound, choose_r, conditional_bound, critical_k, sharpness_gaussian_bound,
    BoundConstants,
};
use marginal_lab::experiments::{fmt_f64, run_and_persist, SHARPNESS_COEFFICIENTS};
use marginal_lab::rng::seeded;
use marginal_lab::{haar_sample, EmpiricalMeasure, Error, ExperimentConfig, ExperimentKind, SourceKind};

const THREADS_VAR: &str = "MARGINAL_LAB_THREADS";

#[derive(Parser)]
#[command(name = "marginal-lab", version, about = "Random projections and bounded-Lipschitz distances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a Haar-random orthonormal k-frame in R^d.
    SampleStiefel(SampleArgs),
    /// Exact BL distance between two measures given as CSV.
    EstimateBl(EstimateArgs),
    /// Certified bracket for the BL distance from a measure to sigma*Z.
    CertifyBl(CertifyArgs),
    /// Table of bound evaluators over a (d, k) grid.
    Bounds(BoundsArgs),
    /// Run one of the experiments.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameFormat {
    Csv,
    Bin,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `csv`: d rows of k values; `bin`: row-major little-endian f64.
    #[arg(long, value_enum, default_value = "csv")]
    format: FrameFormat,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    mu: PathBuf,
    #[arg(long)]
    nu: PathBuf,
    #[arg(long, default_value_t = 2000)]
    support_cap: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Tight,
    Nominal,
}

#[derive(Clone, Copy, ValueEnum)]
enum CertFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    mu: PathBuf,
    #[arg(long)]
    sigma: f64,
    #[arg(long = "R")]
    r: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    n_mc: usize,
    #[arg(long)]
    seed: u64,
    /// Bound on the largest directional second moment of mu (default: empirical).
    #[arg(long)]
    b_mu: Option<f64>,
    #[arg(long, value_enum, default_value = "tight")]
    model: Model,
    #[arg(long, value_enum, default_value = "csv")]
    format: CertFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    d_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    k_list: Vec<f64>,
    /// JSON object, or a path to a JSON file, with any of c, C, L, c_prime.
    #[arg(long)]
    constants: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long = "A", default_value_t = 0.0)]
    a: f64,
    #[arg(long = "B", default_value_t = 1.0)]
    b: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Concentration,
    Scaling,
    Sharpness,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    kind: Experiment,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    distribution: Option<String>,
    #[arg(long, value_delimiter = ',')]
    d_list: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    k_list: Option<Vec<usize>>,
    #[arg(long)]
    n_sample: Option<usize>,
    #[arg(long)]
    m_gauss: Option<usize>,
    #[arg(long)]
    n_frames: Option<usize>,
    #[arg(long)]
    n_mc_witness: Option<usize>,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long)]
    constants: Option<String>,
    #[arg(long)]
    output_path: Option<PathBuf>,
    /// Coefficients c in k = round(c log d / log log d) for the sharpness run.
    #[arg(long, value_delimiter = ',')]
    coefficients: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                })
        }
    }
}

fn read_constants(arg: Option<&str>) -> Result<BoundConstants, Error> {
    let Some(arg) = arg else {
        return Ok(BoundConstants::default());
    };
    if arg.trim_start().starts_with('{') {
        return BoundConstants::from_json(arg);
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    BoundConstants::from_json(&text)
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::SampleStiefel(a) => {
            eprintln!("seed: {}", a.seed);
            let frame = haar_sample(a.d, a.k, &mut seeded(a.seed))?;
            let bytes = match a.format {
                FrameFormat::Csv => frame.to_text().into_bytes(),
                FrameFormat::Bin => frame.to_le_bytes(),
            };
            emit(a.out.as_deref(), &bytes)
        }
        Command::EstimateBl(a) => {
            eprintln!("seed: none (deterministic)");
            let mu = EmpiricalMeasure::read_csv(&a.mu)?;
            let nu = EmpiricalMeasure::read_csv(&a.nu)?;
            let d = bl_lp_with(&mu, &nu, LpOptions { support_cap: a.support_cap })?;
            emit(None, format!("{d:.6}\n").as_bytes())
        }
        Command::CertifyBl(a) => {
            eprintln!("seed: {}", a.seed);
            let mu = EmpiricalMeasure::read_csv(&a.mu)?;
            let opts = CertifyOptions {
                model: match a.model {
                    Model::Tight => ErrorModel::Tight,
                    Model::Nominal => ErrorModel::nominal(),
                },
                ..Default::default()
            };
            let mut rng = seeded(a.seed);
            let c = bl_certified_with(&mu, a.sigma, a.r, a.eps, a.b_mu, a.n_mc, &mut rng, opts)?;
            let text = match a.format {
                CertFormat::Json => serde_json::to_string_pretty(&c)? + "\n",
                CertFormat::Csv => format!(
                    "value,lower,upper,truncation_error,pl_error,quadrature_error\n{}\n",
                    [c.value, c.lower, c.upper, c.truncation_error, c.pl_error, c.quadrature_error]
                        .map(fmt_f64)
                        .join(",")
                ),
            };
            emit(a.out.as_deref(), text.as_bytes())
        }
        Command::Bounds(a) => {
            eprintln!("seed: none (deterministic)");
            let constants = read_constants(a.constants.as_deref())?;
            eprintln!(
                "constants: c={} C={} L={} c_prime={}",
                constants.c, constants.big_c, constants.l, constants.c_prime
            );
            let mut text = String::from(
                "d,k,annealed,conditional_full,conditional_simplified,critical_k,choose_r,sharpness_gaussian\n",
            );
            for &d in &a.d_list {
                for &k in &a.k_list {
                    let cb = conditional_bound(d, k, a.a, a.b, a.sigma, &constants)?;
                    let row = [
                        annealed_bound(a.sigma, d, k, a.a)?,
                        cb.full,
                        cb.simplified,
                        critical_k(d, 2.0).unwrap_or(f64::NAN),
                        choose_r(d, k, a.b, &constants)?,
                        sharpness_gaussian_bound(d, k)?,
                    ];
                    text.push_str(&format!("{d},{k},{}\n", row.map(fmt_f64).join(",")));
                }
            }
            emit(a.out.as_deref(), text.as_bytes())
        }
        Command::Experiment(a) => {
            let mut cfg = match &a.config {
                Some(path) => ExperimentConfig::read(path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(v) = &a.distribution {
                cfg.distribution = v.parse::<SourceKind>()?;
            }
            if let Some(v) = a.d_list {
                cfg.d_list = v;
            }
            if let Some(v) = a.k_list {
                cfg.k_list = v;
            }
            if let Some(v) = a.n_sample {
                cfg.n_sample = v;
            }
            if let Some(v) = a.m_gauss {
                cfg.m_gauss = v;
            }
            if let Some(v) = a.n_frames {
                cfg.n_frames = v;
            }
            if let Some(v) = a.n_mc_witness {
                cfg.n_mc_witness = v;
            }
            if let Some(v) = a.master_seed {
                cfg.master_seed = v;
            }
            if a.constants.is_some() {
                cfg.constants = read_constants(a.constants.as_deref())?;
            }
            if let Some(v) = a.output_path {
                cfg.output_path = v;
            }
            let kind = match a.kind {
                Experiment::Concentration => ExperimentKind::Concentration,
                Experiment::Scaling => ExperimentKind::Scaling,
                Experiment::Sharpness => ExperimentKind::Sharpness,
            };
            let coefficients = a.coefficients.unwrap_or_else(|| SHARPNESS_COEFFICIENTS.to_vec());
            eprintln!("seed: {}", cfg.master_seed);
            let manifest = run_and_persist(kind, &cfg, &coefficients)?;
            let mut text = String::new();
            for f in &manifest.files {
                text.push_str(&format!("{}\n", f.display()));
            }
            emit(None, text.as_bytes())
        }
    }
}
