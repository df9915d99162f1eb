//! Command-line front end: `generate`, `begi` and `correlate`.
//!
//! Settings come from three layers, later ones winning: built-in defaults,
//! an optional TOML config file (`--config`), and command-line flags.
//! Relative paths inside a config file resolve against the file's
//! directory.
//!
//! Exit codes: 0 success, 1 invalid input, 2 usage error, 3 no feasible
//! grasp (the report is still written).

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::begi::build_begi;
use crate::cloud::PointCloud;
use crate::contacts::finger_begi;
use crate::error::{Error, Result};
use crate::gripper::GripperModel;
use crate::io::{load_cloud, CloudFormat};
use crate::locomo::LocomoParams;
use crate::normals::DEFAULT_K;
use crate::output::GraspJson;
use crate::pipeline::{
    correlation_density, ensure_normals, generate, NormalEstimation, PipelineConfig,
    MAX_BANDWIDTH, MIN_BANDWIDTH,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

/// Environment variable holding the worker-pool size.
pub const THREADS_ENV: &str = "SPECTRAL_GRASP_THREADS";

/// Default lower bound of the correlation CSV.
pub const DEFAULT_DISPLAY_THRESHOLD: f64 = 0.5;

#[derive(Debug, Parser)]
#[command(name = "spectral-grasp", version, about = "Grasp synthesis from point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate ranked grasp candidates and write them as JSON.
    Generate(GenerateArgs),
    /// Write the binary extended Gaussian image of a cloud as JSON.
    Begi(BegiArgs),
    /// Write the correlation density between cloud and gripper as CSV.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Point cloud (.ply ASCII or .xyz).
    #[arg(long)]
    cloud: Option<PathBuf>,
    /// Cloud format, overriding the file extension: ply or xyz.
    #[arg(long)]
    format: Option<CloudFormat>,
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Harmonic bandwidth B.
    #[arg(long, value_parser = clap::value_parser!(u32).range(MIN_BANDWIDTH as i64..=MAX_BANDWIDTH as i64))]
    bandwidth: Option<u32>,
    /// Estimate normals when the cloud has none.
    #[arg(long)]
    estimate_normals: bool,
    /// Output file.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Gripper description (JSON).
    #[arg(long)]
    gripper: Option<PathBuf>,
    /// Correlation threshold in [0, 1].
    #[arg(long)]
    tcorr: Option<f64>,
    /// Number of ranked candidates to keep.
    #[arg(long)]
    top_k: Option<usize>,
}

#[derive(Debug, Args)]
struct BegiArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Include the point indices behind each occupied cell.
    #[arg(long)]
    point_sets: bool,
}

#[derive(Debug, Args)]
struct CorrelateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Gripper description (JSON).
    #[arg(long)]
    gripper: Option<PathBuf>,
    /// Only nodes with value at least this are written.
    #[arg(long)]
    display_threshold: Option<f64>,
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub cloud: Option<PathBuf>,
    pub cloud_format: Option<String>,
    pub gripper: Option<PathBuf>,
    pub bandwidth: Option<usize>,
    pub t_corr: Option<f64>,
    pub k_max: Option<usize>,
    pub mu: Option<f64>,
    pub n_approach: Option<usize>,
    pub clearance: Option<f64>,
    pub top_k: Option<usize>,
    pub local_max_only: Option<bool>,
    pub estimate_normals: Option<bool>,
    pub normal_k: Option<usize>,
    pub viewpoint: Option<[f64; 3]>,
    pub display_threshold: Option<f64>,
    pub locomo: Option<LocomoParams>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: Self = toml::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.cloud, &mut cfg.gripper].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Pipeline settings from defaults overridden by this file.
    pub fn pipeline_config(&self) -> PipelineConfig {
        let d = PipelineConfig::default();
        let estimate = self.estimate_normals.unwrap_or(false);
        PipelineConfig {
            bandwidth: self.bandwidth.unwrap_or(d.bandwidth),
            t_corr: self.t_corr.unwrap_or(d.t_corr),
            k_max: self.k_max.unwrap_or(d.k_max),
            mu: self.mu.unwrap_or(d.mu),
            n_approach: self.n_approach.unwrap_or(d.n_approach),
            clearance: self.clearance.unwrap_or(d.clearance),
            locomo: self.locomo.clone().unwrap_or(d.locomo),
            top_k: self.top_k.unwrap_or(d.top_k),
            local_max_only: self.local_max_only.unwrap_or(d.local_max_only),
            normal_estimation: estimate.then(|| NormalEstimation {
                k: self.normal_k.unwrap_or(DEFAULT_K),
                viewpoint: self.viewpoint.unwrap_or([0.0, 0.0, 0.0]),
            }),
        }
    }
}

enum Failure {
    Usage(String),
    Input(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Begi(a) => cmd_begi(a).map(|()| EXIT_OK),
        Command::Correlate(a) => cmd_correlate(a).map(|()| EXIT_OK),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

/// Settings shared by all commands after layering.
struct Resolved {
    file: ConfigFile,
    pipeline: PipelineConfig,
    cloud: PathBuf,
    format: Option<CloudFormat>,
}

fn resolve(common: &CommonArgs) -> std::result::Result<Resolved, Failure> {
    let file = match &common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let mut pipeline = file.pipeline_config();
    if let Some(b) = common.bandwidth {
        pipeline.bandwidth = b as usize;
    }
    if common.estimate_normals && pipeline.normal_estimation.is_none() {
        pipeline.normal_estimation = Some(NormalEstimation {
            k: file.normal_k.unwrap_or(DEFAULT_K),
            viewpoint: file.viewpoint.unwrap_or([0.0, 0.0, 0.0]),
        });
    }
    let cloud = common
        .cloud
        .clone()
        .or_else(|| file.cloud.clone())
        .ok_or_else(|| Failure::Usage("--cloud is required (or `cloud` in the config file)".into()))?;
    let format = match (&common.format, &file.cloud_format) {
        (Some(f), _) => Some(*f),
        (None, Some(s)) => Some(s.parse::<CloudFormat>().map_err(Error::InvalidConfig)?),
        (None, None) => None,
    };
    Ok(Resolved {
        file,
        pipeline,
        cloud,
        format,
    })
}

fn load_input_cloud(r: &Resolved) -> Result<PointCloud> {
    let format = match r.format {
        Some(f) => f,
        None => CloudFormat::from_path(&r.cloud).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "cannot tell the format of {}; pass --format",
                r.cloud.display()
            ))
        })?,
    };
    load_cloud(&r.cloud, format)
}

fn gripper_path(flag: &Option<PathBuf>, file: &ConfigFile) -> std::result::Result<PathBuf, Failure> {
    flag.clone()
        .or_else(|| file.gripper.clone())
        .ok_or_else(|| Failure::Usage("--gripper is required (or `gripper` in the config file)".into()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_all(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut out = create(path)?;
    f(&mut out)
        .and_then(|()| out.flush())
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn cmd_generate(a: &GenerateArgs) -> std::result::Result<i32, Failure> {
    let mut r = resolve(&a.common)?;
    if let Some(t) = a.tcorr {
        r.pipeline.t_corr = t;
    }
    if let Some(k) = a.top_k {
        r.pipeline.top_k = k;
    }
    r.pipeline.validate()?;
    let gripper = GripperModel::from_json_file(gripper_path(&a.gripper, &r.file)?)?;
    let cloud = load_input_cloud(&r)?;
    let report = generate(&cloud, &gripper, &r.pipeline)?;
    let json = GraspJson::from(&report).to_pretty_string();
    write_all(&a.common.output, |out| writeln!(out, "{json}"))?;
    if report.is_infeasible() {
        eprintln!("no feasible grasp");
        Ok(EXIT_INFEASIBLE)
    } else {
        Ok(EXIT_OK)
    }
}

fn cmd_begi(a: &BegiArgs) -> std::result::Result<(), Failure> {
    let r = resolve(&a.common)?;
    r.pipeline.validate()?;
    let cloud = ensure_normals(&load_input_cloud(&r)?, &r.pipeline)?;
    let begi = build_begi(&cloud, r.pipeline.bandwidth)?;
    let json = serde_json::to_string_pretty(&begi.to_json(a.point_sets)).expect("BEGI JSON");
    write_all(&a.common.output, |out| writeln!(out, "{json}"))?;
    Ok(())
}

fn cmd_correlate(a: &CorrelateArgs) -> std::result::Result<(), Failure> {
    let r = resolve(&a.common)?;
    r.pipeline.validate()?;
    let threshold = a
        .display_threshold
        .or(r.file.display_threshold)
        .unwrap_or(DEFAULT_DISPLAY_THRESHOLD);
    let gripper = GripperModel::from_json_file(gripper_path(&a.gripper, &r.file)?)?;
    let cloud = ensure_normals(&load_input_cloud(&r)?, &r.pipeline)?;
    let object = build_begi(&cloud, r.pipeline.bandwidth)?;
    let finger = finger_begi(&gripper, r.pipeline.bandwidth)?;
    let density = correlation_density(&object, &finger)?;
    write_all(&a.common.output, |out| density.write_csv(out, threshold))?;
    Ok(())
}

/// Sizes the global worker pool from [`THREADS_ENV`] if set.
pub fn init_thread_pool() -> Result<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidConfig(format!("{THREADS_ENV}={value} is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    }
    Ok(())
}
