//! Flat key-value experiment configuration (TOML syntax).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::scenarios::ScenarioParams;

/// Overrides `output_dir` when set.
pub const OUTPUT_DIR_ENV: &str = "SHADOW_RDS_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Shadow,
    Lyapunov,
    Conservation,
    Invariants,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::Shadow => "shadow",
            ExperimentKind::Lyapunov => "lyapunov",
            ExperimentKind::Conservation => "conservation",
            ExperimentKind::Invariants => "invariants",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: String,
    pub kind: ExperimentKind,
    /// Half-width `W` of the window `[−W, W]`.
    #[serde(default = "default_window")]
    pub window: i64,
    /// Adapted-norm truncation horizon; scenario default if absent.
    pub horizon: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub c: Option<f64>,
    pub tau: Option<f64>,
    pub rho: Option<f64>,
    pub t_quantile: Option<f64>,
    /// Overrides the scenario's `ε`.
    pub epsilon: Option<f64>,
    /// `constant`, `exponential` or `polynomial`.
    pub weight: Option<String>,
    /// Jitter of the pseudo-orbit as a fraction of the admissible size.
    #[serde(default = "default_noise")]
    pub noise: f64,
    /// Orbit length `N` for exponent estimates.
    #[serde(default = "default_steps", alias = "N")]
    pub steps: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Matching tolerance for exponents.
    #[serde(default = "default_exponent_tol")]
    pub exponent_tol: f64,
}

fn default_window() -> i64 {
    32
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    500
}
fn default_seed() -> u64 {
    1
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_noise() -> f64 {
    1.0
}
fn default_steps() -> usize {
    10_000
}
fn default_samples() -> usize {
    20
}
fn default_exponent_tol() -> f64 {
    0.02
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads the file and applies the output-directory environment override.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                cfg.output_dir = PathBuf::from(dir);
            }
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::Config(format!("window must be >= 1, got {}", self.window)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be >= 1".into()));
        }
        if self.steps < 100 {
            return Err(Error::Config(format!("steps must be >= 100, got {}", self.steps)));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::Config(format!("noise must lie in [0, 1], got {}", self.noise)));
        }
        Ok(())
    }

    pub fn scenario_params(&self) -> ScenarioParams {
        ScenarioParams {
            c: self.c,
            tau: self.tau,
            rho: self.rho,
            t_quantile: self.t_quantile,
            horizon: self.horizon,
            seed: self.seed,
        }
    }
}
