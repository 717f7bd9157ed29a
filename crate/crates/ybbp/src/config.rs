//! Run configuration: one JSON file per run, overridable from the command
//! line.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "model": {
//!     "theta": {"alpha": 0.46, "beta": 0.005, "m_R": 3.2, "m_r": 4.0},
//!     "laws": {"R": {"finite": {"probs": [...]}}, "r": {"poisson": {"mean": 4.0}}},
//!     "initial": {"females": 10, "males_R": 5, "males_r": 5},
//!     "generations": 15,
//!     "retry_until": "coexistence"
//!   },
//!   "abc": {"pool_size": 200000, "tolerance_quantile": 0.005, "law_family": "poisson", "scheme": "auto"},
//!   "predictive": {"horizon": 1, "replicates": 2000},
//!   "truth": {"alpha": 0.46, "beta": 0.005, "m_R": 3.2, "m_r": 4.0},
//!   "io": {"observed": "obs.csv", "posterior": "run/posterior.csv", "runs": ["runs"], "output_dir": "out"},
//!   "summary": {"hpd_level": 0.95, "plots": false}
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use ybbp_core::laws::LawSpec;
use ybbp_core::model::Census;
use ybbp_core::{LawFamily, ParamVector};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Infer,
    Predict,
    Report,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Thread count; does not affect any output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abc: Option<AbcSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictive: Option<PredictiveSection>,
    /// True θ, when known, for accuracy summaries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<ParamVector>,
    #[serde(default)]
    pub io: IoConfig,
    #[serde(default)]
    pub summary: SummaryConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawPair {
    #[serde(rename = "R")]
    pub r_line: LawSpec,
    #[serde(rename = "r")]
    pub mutant_line: LawSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetryUntil {
    /// F_N, M^R_N and M^r_N all positive.
    Coexistence,
    BothPositive,
    RrZero,
    RmutZero,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub theta: ParamVector,
    /// Defaults to Poisson laws with the means in `theta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laws: Option<LawPair>,
    pub initial: Census,
    pub generations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retry_until: Option<RetryUntil>,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u64,
}

fn default_max_attempts() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeChoice {
    /// Extended if the observed file has the extended block, else basic.
    #[default]
    Auto,
    Basic,
    BothPositive,
    RrZero,
    RmutZero,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbcSection {
    pub pool_size: u64,
    pub tolerance_quantile: f64,
    #[serde(default)]
    pub law_family: LawFamily,
    #[serde(default)]
    pub scheme: SchemeChoice,
    #[serde(default = "default_m_max")]
    pub m_max: f64,
    /// Default: implied by the observed zero pattern.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force_positive_beta: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force_positive_m_r: Option<bool>,
}

fn default_m_max() -> f64 {
    10.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictiveSection {
    pub horizon: usize,
    pub replicates: u64,
    /// Default: the last generation of the observed file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Census>,
    /// Default: the law family recorded with the posterior.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law_family: Option<LawFamily>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posterior: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub runs: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryConfig {
    #[serde(default = "default_level")]
    pub hpd_level: f64,
    #[serde(default)]
    pub plots: bool,
}

fn default_level() -> f64 {
    0.95
}

impl Default for SummaryConfig {
    fn default() -> Self {
        Self { hpd_level: default_level(), plots: false }
    }
}

impl ExperimentConfig {
    /// Parses JSON, reporting schema errors with the offending field path.
    pub fn from_json(text: &str) -> AppResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            AppError::config(format!("at `{path}`: {}", e.into_inner()))
        })
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            AppError::Config(m) => AppError::config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn seed(&self) -> AppResult<u64> {
        self.seed.ok_or_else(|| AppError::config("`seed` is required"))
    }

    pub fn output_dir(&self) -> AppResult<&Path> {
        self.io.output_dir.as_deref().ok_or_else(|| AppError::config("`io.output_dir` is required"))
    }

    pub fn model(&self) -> AppResult<&ModelConfig> {
        self.model.as_ref().ok_or_else(|| AppError::config("`model` block is required for simulate"))
    }

    pub fn abc(&self) -> AppResult<&AbcSection> {
        self.abc.as_ref().ok_or_else(|| AppError::config("`abc` block is required for infer"))
    }

    pub fn predictive(&self) -> AppResult<&PredictiveSection> {
        self.predictive.as_ref().ok_or_else(|| AppError::config("`predictive` block is required for predict"))
    }

    /// Input file named by `field`, which must exist.
    pub fn input(&self, field: &str, value: Option<&PathBuf>) -> AppResult<PathBuf> {
        let path = value.ok_or_else(|| AppError::config(format!("`{field}` is required")))?;
        if !path.exists() {
            return Err(AppError::config(format!("`{field}`: {} does not exist", path.display())));
        }
        Ok(path.clone())
    }

    /// SHA-256 of the canonical JSON of everything that can influence
    /// output data: worker count and output directory are left out.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serialises");
        if let Some(map) = value.as_object_mut() {
            map.remove("workers");
            if let Some(io) = map.get_mut("io").and_then(|v| v.as_object_mut()) {
                io.remove("output_dir");
            }
        }
        sha256_hex(value.to_string().as_bytes())
    }

    pub fn hpd_level(&self) -> AppResult<f64> {
        let level = self.summary.hpd_level;
        if level > 0.0 && level < 1.0 {
            Ok(level)
        } else {
            Err(AppError::config(format!("`summary.hpd_level` must lie in (0, 1), got {level}")))
        }
    }
}

impl ModelConfig {
    /// Laws for simulation; explicit laws must agree with the means in θ.
    pub fn laws(&self) -> AppResult<(ybbp_core::OffspringLaw, ybbp_core::OffspringLaw)> {
        let theta = &self.theta;
        theta.validate().map_err(|e| AppError::config(format!("`model.theta`: {e}")))?;
        let Some(pair) = &self.laws else {
            let family = LawFamily::Poisson;
            return Ok((family.law(theta.m_R)?, family.law(theta.m_r)?));
        };
        let mut out = Vec::with_capacity(2);
        for (field, spec, mean) in [("R", &pair.r_line, theta.m_R), ("r", &pair.mutant_line, theta.m_r)] {
            let law = ybbp_core::OffspringLaw::from_spec(spec)
                .map_err(|e| AppError::config(format!("`model.laws.{field}`: {e}")))?;
            if (law.mean() - mean).abs() > 1e-3 * mean.max(1.0) {
                return Err(AppError::config(format!(
                    "`model.laws.{field}` has mean {} but theta gives {mean}",
                    law.mean()
                )));
            }
            out.push(law);
        }
        let r = out.pop().unwrap();
        Ok((out.pop().unwrap(), r))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
