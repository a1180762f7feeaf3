//! Batch experiments over `diophantine-core`: configuration, seeded instance
//! generation, job scheduling and result files.

pub mod config;
pub mod error;
pub mod jobs;
pub mod output;
pub mod rng;

use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde::Serialize;

pub use config::{ExperimentConfig, VariantName};
pub use error::CliError;
use jobs::JobOutput;
use output::{sha256_hex, JobStatus, Manifest, ResultsWriter};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "DIOPHANTINE_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "results";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Exponent,
    ExtremalMc,
    Reformulate,
    Certify,
    Cover,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Exponent => "exponent",
            Command::ExtremalMc => "extremal-mc",
            Command::Reformulate => "reformulate",
            Command::Certify => "certify",
            Command::Cover => "cover",
        }
    }
}

/// Command-line overrides of the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub variant: Option<VariantName>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config_hash: String,
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    pub violations: Vec<String>,
}

/// Hash of the effective config; worker count and output location are excluded.
pub fn config_hash(command: Command, cfg: &ExperimentConfig) -> Result<String, CliError> {
    let mut bytes = command.as_str().as_bytes().to_vec();
    bytes.push(b'\n');
    bytes.extend(serde_json::to_vec(cfg)?);
    Ok(sha256_hex(&bytes))
}

fn resolve_out_dir(opts: &RunOptions, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(d) = &opts.out_dir {
        return d.clone();
    }
    if let Some(d) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(d);
    }
    cfg.output_dir
        .as_deref()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn now() -> String {
    humantime::format_rfc3339_seconds(SystemTime::now()).to_string()
}

fn apply_overrides(command: Command, mut cfg: ExperimentConfig, opts: &RunOptions) -> Result<ExperimentConfig, CliError> {
    if opts.seed.is_some() {
        cfg.seed = opts.seed;
    }
    if let Some(v) = opts.variant {
        match cfg.reformulate.as_mut() {
            Some(r) => r.variants = vec![v],
            None if command == Command::Reformulate => {}
            None => {
                return Err(CliError::Config(format!(
                    "--variant applies to reformulate, not {}",
                    command.as_str()
                )))
            }
        }
    }
    let present = match command {
        Command::Exponent => cfg.exponent.is_some(),
        Command::ExtremalMc => cfg.extremal_mc.is_some(),
        Command::Reformulate => cfg.reformulate.is_some(),
        Command::Certify => cfg.certify.is_some(),
        Command::Cover => cfg.cover.is_some(),
    };
    if !present {
        return Err(CliError::Config(format!(
            "config has no [{}] section",
            command.as_str().replace('-', "_")
        )));
    }
    Ok(cfg)
}

fn emit<S: Serialize>(
    out: Result<JobOutput<S>, CliError>,
    writer: &mut ResultsWriter,
) -> Result<Vec<String>, CliError> {
    let out = out?;
    for t in &out.tables {
        writer.table(t)?;
    }
    writer.json("summary", &out.summary)?;
    Ok(out.violations)
}

/// Runs one job and writes its tables, summary and manifest.
pub fn execute(command: Command, cfg: ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let started_at = now();
    let cfg = apply_overrides(command, cfg, opts)?;
    let workers = opts
        .workers
        .or(cfg.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(CliError::Config("workers must be at least 1".into()));
    }
    let hash = config_hash(command, &cfg)?;
    let out_dir = resolve_out_dir(opts, &cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Numeric(format!("worker pool: {e}")))?;
    let mut writer = ResultsWriter::create(&out_dir, &hash)?;
    let seed = cfg.seed;
    let result = pool.install(|| match command {
        Command::Exponent => emit(jobs::exponent::run(cfg.exponent.as_ref().unwrap(), seed), &mut writer),
        Command::ExtremalMc => emit(jobs::extremal::run(cfg.extremal_mc.as_ref().unwrap(), seed), &mut writer),
        Command::Reformulate => emit(jobs::reformulate::run(cfg.reformulate.as_ref().unwrap(), seed), &mut writer),
        Command::Certify => emit(jobs::certify::run(cfg.certify.as_ref().unwrap(), seed), &mut writer),
        Command::Cover => emit(jobs::cover::run(cfg.cover.as_ref().unwrap(), seed), &mut writer),
    });
    let status = match &result {
        Ok(v) if v.is_empty() => JobStatus {
            job: command.as_str().into(),
            status: "ok".into(),
            detail: Vec::new(),
        },
        Ok(v) => JobStatus {
            job: command.as_str().into(),
            status: "property-violation".into(),
            detail: v.clone(),
        },
        Err(e) => JobStatus {
            job: command.as_str().into(),
            status: "failed".into(),
            detail: vec![e.to_string()],
        },
    };
    let manifest = writer.finish(Manifest {
        config_hash: hash.clone(),
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        command: command.as_str().into(),
        seed,
        workers,
        started_at,
        finished_at: now(),
        jobs: vec![status],
        outputs: Vec::new(),
    })?;
    Ok(RunOutcome {
        config_hash: hash,
        out_dir,
        manifest,
        violations: result?,
    })
}

/// Loads `path` and runs `command`.
pub fn execute_file(command: Command, path: &Path, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    execute(command, ExperimentConfig::load(path)?, opts)
}
