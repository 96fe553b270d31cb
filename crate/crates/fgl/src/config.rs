//! JSON configuration schema for the command-line interface.
//!
//! Each command takes its own document; unknown fields are rejected so
//! typos surface as configuration errors before any computation starts.
//! Everything a run needs is in the config plus the `--seed` flag, which
//! is what makes reruns reproduce byte-identical artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::operator::QuadratureSpec;
use crate::solver::{DomainShape, Init, SolverConfig, SourceTerm};
use crate::young::{YoungError, YoungFunction};

/// Errors from loading or validating a configuration document.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Young(#[from] YoungError),
}

/// Loads and schema-validates a command config from a JSON file.
pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// Young-function family selector.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    Power { p: f64 },
    PowerSum { p: f64, q: f64, a: f64, b: f64 },
}

impl FamilyConfig {
    pub fn build(&self) -> Result<YoungFunction, ConfigError> {
        Ok(match self {
            FamilyConfig::Power { p } => YoungFunction::power(*p)?,
            FamilyConfig::PowerSum { p, q, a, b } => YoungFunction::power_sum(*p, *q, *a, *b)?,
        })
    }

    pub fn label(&self) -> String {
        match self {
            FamilyConfig::Power { p } => format!("power(p={p})"),
            FamilyConfig::PowerSum { p, q, a, b } => format!("power_sum(p={p}, q={q}, a={a}, b={b})"),
        }
    }
}

/// Right-hand sides expressible in a config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    Constant { value: f64 },
    /// Gaussian bump amplitude·exp(−|x−center|²/width²).
    Bump { center: [f64; 2], width: f64, amplitude: f64 },
}

impl SourceConfig {
    pub fn build(&self) -> Result<SourceTerm, ConfigError> {
        Ok(match self {
            SourceConfig::Constant { value } => SourceTerm::constant(*value),
            SourceConfig::Bump { center, width, amplitude } => {
                if !(*width > 0.0) {
                    return Err(ConfigError::Invalid(format!(
                        "bump width must be positive, got {width}"
                    )));
                }
                let (c, w, a) = (*center, *width, *amplitude);
                SourceTerm::new(
                    format!("bump(center=({}, {}), width={w}, amplitude={a})", c[0], c[1]),
                    move |p| {
                        let d2 = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
                        a * (-d2 / (w * w)).exp()
                    },
                )
            }
        })
    }
}

/// Config for `verify-young`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyYoungConfig {
    pub family: FamilyConfig,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub sweep: SweepConfig,
    /// Test hook: swap in a deliberately corrupted density while keeping
    /// the declared exponents, to prove the suite catches it.
    #[serde(default)]
    pub test_hook_corrupt: bool,
}

fn default_samples() -> usize {
    100_000
}

/// Grid size for the conjugate-duality sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n_t: usize,
    pub n_w: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { n_t: 200, n_w: 200 }
    }
}

/// Config for `profile`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub family: FamilyConfig,
    pub s: f64,
    pub xs: Vec<f64>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

/// Solver sub-parameters (mesh size lives beside them).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_ls_shrink")]
    pub ls_shrink: f64,
    #[serde(default = "default_ls_slope")]
    pub ls_slope: f64,
}

fn default_grad_tol() -> f64 {
    1e-8
}
fn default_max_iters() -> usize {
    5000
}
fn default_ls_shrink() -> f64 {
    0.5
}
fn default_ls_slope() -> f64 {
    0.25
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            grad_tol: default_grad_tol(),
            max_iters: default_max_iters(),
            ls_shrink: default_ls_shrink(),
            ls_slope: default_ls_slope(),
        }
    }
}

impl SolverParams {
    pub fn to_solver_config(&self, nx: usize) -> SolverConfig {
        SolverConfig {
            nx,
            grad_tol: self.grad_tol,
            max_iters: self.max_iters,
            ls_shrink: self.ls_shrink,
            ls_slope: self.ls_slope,
            init: Init::Zero,
        }
    }
}

/// Config for `solve`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub family: FamilyConfig,
    pub s: f64,
    pub domain: DomainShape,
    pub source: SourceConfig,
    pub nx: usize,
    #[serde(default)]
    pub solver: SolverParams,
    /// Optional chained diagnostics, run on the computed solution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<ChecksConfig>,
}

/// Which diagnostics to run and with what parameters.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oscillation: Option<OscillationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_ratio: Option<BandConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harnack: Option<HarnackConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_residual: Option<DistanceResidualConfig>,
    /// Global two-point quotient at the fitted exponent (or a given one).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_quotient: Option<GlobalQuotientConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillationConfig {
    /// Ball center; defaults to the domain center.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    /// Decreasing radii; defaults to a dyadic ladder inside the domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandConfig {
    /// Distance band (lo, hi); defaults to (2h, inradius/2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnackConfig {
    /// Supersolution bound K (for the torsion problem, the sup of f).
    pub k: f64,
    /// Harnack radius R; defaults to the domain inradius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceResidualConfig {
    pub radius: f64,
    pub band: (f64, f64),
    #[serde(default = "default_band_points")]
    pub n_points: usize,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
}

fn default_band_points() -> usize {
    6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalQuotientConfig {
    /// Exponent; defaults to the fitted α̂ when an oscillation fit ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

/// Config for `diagnose`: either a solution file or a solve sub-config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    pub family: FamilyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveConfig>,
    /// Domain shape for distance-based checks when the solution comes from
    /// a file; defaults to the lattice bounding box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainShape>,
    #[serde(default)]
    pub checks: ChecksConfig,
}

/// Config for `verify-all` (desk-scale acceptance sweep).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyAllConfig {
    /// Samples per inequality in the Young suite.
    pub samples: usize,
    /// Mesh for the 1D solver checks.
    pub nx_interval: usize,
    /// Mesh for the 2D torsion checks.
    pub nx_ball: usize,
}

impl Default for VerifyAllConfig {
    fn default() -> Self {
        Self { samples: 20_000, nx_interval: 65, nx_ball: 33 }
    }
}
