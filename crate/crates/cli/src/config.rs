use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bs_spectral::bs::BsProblem;
use bs_spectral::family::FamilySpec;
use bs_spectral::schrodinger::ModelParams;
use bs_spectral::{Complex64, Contour};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const TOLERANCE_ENV: &str = "BS_SPECTRAL_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Gallery,
    Schrodinger,
    Index,
    BsRoundtrip,
    Wa,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Gallery => "gallery",
            CommandName::Schrodinger => "schrodinger",
            CommandName::Index => "index",
            CommandName::BsRoundtrip => "bs-roundtrip",
            CommandName::Wa => "wa",
        }
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Replaces the default residual tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Per check family, e.g. `{"floquet": 1e-7}`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub params: serde_json::Value,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_owned(), source: e })?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn empty(command: CommandName) -> Self {
        Self { command, seed: None, output: None, tolerance: None, tolerances: BTreeMap::new(), params: serde_json::Value::Null }
    }

    pub fn params<T: for<'de> Deserialize<'de> + Default>(&self) -> Result<T> {
        if self.params.is_null() {
            return Ok(T::default());
        }
        serde_json::from_value(self.params.clone()).map_err(|e| CliError::Config(format!("{} params: {e}", self.command.as_str())))
    }
}

/// Residual tolerances: the global default and per-family overrides.
#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub default: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, f64>,
}

impl Tolerances {
    /// Config value, then `BS_SPECTRAL_TOL`, then 1e-8.
    pub fn resolve(config: &RunConfig) -> Result<Self> {
        let default = match config.tolerance {
            Some(t) => t,
            None => match std::env::var(TOLERANCE_ENV) {
                Ok(s) => s.trim().parse().map_err(|_| CliError::Config(format!("{TOLERANCE_ENV}={s} is not a number")))?,
                Err(_) => DEFAULT_TOLERANCE,
            },
        };
        for (k, &v) in std::iter::once((&"default".to_string(), &default)).chain(config.tolerances.iter()) {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!("tolerance for {k} must be positive, got {v}")));
            }
        }
        Ok(Self { default, overrides: config.tolerances.clone() })
    }

    /// Override for `family`, else `fixed` when the check has its own bound, else the default.
    pub fn for_family(&self, family: &str, fixed: Option<f64>) -> f64 {
        self.overrides.get(family).copied().or(fixed).unwrap_or(self.default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CheckFamily {
    Jordan,
    Antiperiodic,
    OdeChain,
    Floquet,
    Determinant,
    Riesz,
}

impl CheckFamily {
    pub const ALL: [CheckFamily; 6] = [
        CheckFamily::Jordan,
        CheckFamily::Antiperiodic,
        CheckFamily::OdeChain,
        CheckFamily::Floquet,
        CheckFamily::Determinant,
        CheckFamily::Riesz,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckFamily::Jordan => "jordan",
            CheckFamily::Antiperiodic => "antiperiodic",
            CheckFamily::OdeChain => "ode-chain",
            CheckFamily::Floquet => "floquet",
            CheckFamily::Determinant => "determinant",
            CheckFamily::Riesz => "riesz",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchrodingerParams {
    #[serde(default)]
    pub model: ModelParams,
    #[serde(default = "all_checks")]
    pub checks: Vec<CheckFamily>,
}

fn all_checks() -> Vec<CheckFamily> {
    CheckFamily::ALL.to_vec()
}

impl Default for SchrodingerParams {
    fn default() -> Self {
        Self { model: ModelParams::default(), checks: all_checks() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexParams {
    pub family: FamilySpec,
    pub contour: Contour,
    /// Checked exactly when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<i64>,
}

impl Default for IndexParams {
    fn default() -> Self {
        // Identity family around the origin.
        Self {
            family: FamilySpec::Taylor { center: Complex64::new(0.0, 0.0), coeffs: vec![bs_spectral::ComplexMatrix::identity(1)] },
            contour: Contour::circle(Complex64::new(0.0, 0.0), 1.0).expect("valid circle"),
            expected: Some(0),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundtripParams {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_chain_len")]
    pub max_chain_len: usize,
}

fn default_dim() -> usize {
    8
}
fn default_trials() -> usize {
    100
}
fn default_chain_len() -> usize {
    3
}

impl Default for RoundtripParams {
    fn default() -> Self {
        Self { dim: default_dim(), trials: default_trials(), max_chain_len: default_chain_len() }
    }
}

/// Either an explicit problem or a seeded `H0 = diag(1..dim)` with rank-`rank` factors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<BsProblem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeded: Option<SeededSplit>,
    /// Points to test; defaults to every eigenvalue of `H` and of `H0`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Complex64>,
    #[serde(default = "default_p")]
    pub p: Vec<usize>,
    /// Contour radius; defaults to half the distance to the nearest other eigenvalue.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

fn default_p() -> Vec<usize> {
    vec![1, 2, 3]
}

impl Default for WaParams {
    fn default() -> Self {
        Self { problem: None, seeded: Some(SeededSplit::default()), points: Vec::new(), p: default_p(), radius: None }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeededSplit {
    pub dim: usize,
    pub rank: usize,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_scale() -> f64 {
    0.6
}

impl Default for SeededSplit {
    fn default() -> Self {
        Self { dim: 8, rank: 2, scale: default_scale() }
    }
}
