//! Experiment configuration. Unknown fields are rejected everywhere.

use std::path::Path;

use diophantine_core::{Admissibility, Mode};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Worker count; never part of the config hash.
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
    /// Output directory; never part of the config hash.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<ExponentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extremal_mc: Option<ExtremalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reformulate: Option<ReformulateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify: Option<CertifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Standard,
    Multiplicative,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Mode {
        match m {
            ModeName::Standard => Mode::Standard,
            ModeName::Multiplicative => Mode::Multiplicative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VariantName {
    Literal,
    Step1,
}

impl From<VariantName> for Admissibility {
    fn from(v: VariantName) -> Admissibility {
        match v {
            VariantName::Literal => Admissibility::Literal,
            VariantName::Step1 => Admissibility::Step1,
        }
    }
}

/// Inhomogeneous shift of generated instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum ThetaSpec {
    Zero,
    Random,
    Explicit { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum InstanceSpec {
    /// Row-major `m x n` matrix.
    Explicit {
        id: String,
        m: usize,
        n: usize,
        x: Vec<f64>,
        #[serde(default)]
        theta: Option<Vec<f64>>,
    },
    /// `count` instances with entries uniform in `[0, 1)`.
    Random {
        id_prefix: String,
        /// Generator stream, `id_prefix` by default. Specs sharing a stream
        /// share their matrices, since `x` is drawn before `theta`.
        #[serde(default)]
        stream: Option<String>,
        count: usize,
        dims: Vec<[usize; 2]>,
        theta: ThetaSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Explicit increasing scales; otherwise the default geometric grid up to `q_max`.
    #[serde(default)]
    pub scales: Option<Vec<f64>>,
    #[serde(default)]
    pub q_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentConfig {
    pub instances: Vec<InstanceSpec>,
    pub grid: GridSpec,
    pub modes: Vec<ModeName>,
    pub tail_fraction: f64,
    /// Also compute the transference report per instance.
    #[serde(default)]
    pub transference: bool,
    #[serde(default = "default_bound_tol")]
    pub bound_tol: f64,
    #[serde(default = "default_dyson_band")]
    pub dyson_band: f64,
}

fn default_bound_tol() -> f64 {
    0.15
}

fn default_dyson_band() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtremalConfig {
    /// Degree of the Veronese curve `(x, x^2, .., x^degree)`.
    pub degree: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub samples: usize,
    pub q_max: f64,
    pub tail_fraction: f64,
    /// One scalar shift per run; `0` is the homogeneous case.
    pub thetas: Vec<f64>,
    pub modes: Vec<ModeName>,
    /// Samples with `w_est > 1 + margin` are counted as outliers.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReformulateConfig {
    /// Random `1 x 1` instances with random shift.
    pub instances: usize,
    pub eta: f64,
    pub v: f64,
    #[serde(default = "both_variants")]
    pub variants: Vec<VariantName>,
    /// Extra homogeneous instances `numerator / denominator`.
    #[serde(default)]
    pub rational: Vec<[i64; 2]>,
    pub round_trips: usize,
    /// `log2` range of the scale `Q` of planted solutions.
    pub planted_log2_q: [u32; 2],
    pub planted_eps: f64,
}

fn both_variants() -> Vec<VariantName> {
    vec![VariantName::Literal, VariantName::Step1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    #[serde(default)]
    pub contracting: Option<ContractingSweep>,
    #[serde(default)]
    pub decaying: Option<DecayingSweep>,
    #[serde(default)]
    pub doubling: Option<DoublingSweep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractingSweep {
    pub degree: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub kappa: f64,
    /// Number of non-vacuous certificates to collect.
    pub certificates: usize,
    pub max_attempts: usize,
    pub delta_range: [f64; 2],
    /// Widths are drawn as fractions of `r0` from this range.
    pub eps_fraction_range: [f64; 2],
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayingSweep {
    pub calibration_probes: usize,
    pub probes: usize,
    pub margin: f64,
    pub max_level: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoublingSweep {
    pub balls: usize,
    pub lambda: f64,
    pub max_level: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverConfig {
    #[serde(default)]
    pub balls: Option<BallSweep>,
    #[serde(default)]
    pub intervals: Option<IntervalSweep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSweep {
    pub families: usize,
    pub balls_per_family: usize,
    pub dim: usize,
    /// Centres are uniform in `[0, extent)^dim`.
    pub extent: f64,
    pub radius_range: [f64; 2],
    /// Points sampled from the input union to cross-check containment.
    pub sample_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalSweep {
    pub instances: usize,
    /// Range for the number of labelled families per instance.
    pub families: [usize; 2],
    /// Range for the number of intervals per family.
    pub per_family: [usize; 2],
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Config("this job is randomized; `seed` is required".into()))
    }
}

pub(crate) fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}

pub(crate) fn check_range(name: &str, r: [f64; 2], lo: f64, hi: f64) -> Result<(), CliError> {
    check(lo <= r[0] && r[0] <= r[1] && r[1] <= hi, || {
        format!("{name} must satisfy {lo} <= lo <= hi <= {hi}, got {r:?}")
    })
}
