//! The versioned TOML configuration file consumed by `fedvet run`: one
//! experiment description plus sweep lists for ζ, flip, and proportion.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::orchestrator::ExperimentConfig;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    // toml errors carry line/column positions in their Display output
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Sweep lists; an empty list falls back to the base experiment value.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub zeta_values: Vec<usize>,
    #[serde(default)]
    pub flip_values: Vec<usize>,
    #[serde(default)]
    pub proportion_values: Vec<u8>,
}

/// One point of the zeta x flip x proportion cross product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SweepPoint {
    pub zeta: usize,
    pub flip: usize,
    pub proportion: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfigFile {
    pub version: u32,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

impl CliConfigFile {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(invalid(
                "version",
                format!("unsupported version {}, expected {CONFIG_VERSION}", self.version),
            ));
        }
        self.experiment
            .validate()
            .map_err(|e| invalid("experiment", e.to_string()))?;

        let n = self.experiment.topology.n_validators;
        for &zeta in &self.sweep.zeta_values {
            if zeta > n {
                return Err(invalid(
                    "sweep.zeta_values",
                    format!("value {zeta} exceeds n_validators = {n}"),
                ));
            }
        }
        for &flip in &self.sweep.flip_values {
            if flip > n {
                return Err(invalid(
                    "sweep.flip_values",
                    format!("value {flip} exceeds n_validators = {n}"),
                ));
            }
        }
        for &proportion in &self.sweep.proportion_values {
            if proportion > 8 {
                return Err(invalid(
                    "sweep.proportion_values",
                    format!("value {proportion} outside [0, 8]"),
                ));
            }
        }
        Ok(())
    }

    /// The sweep cross product in sorted order, deduplicated. Missing
    /// lists use the base experiment's value, so a config without a sweep
    /// section runs exactly one point.
    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        let defaults = |values: &[usize], base: usize| -> Vec<usize> {
            let mut v = if values.is_empty() { vec![base] } else { values.to_vec() };
            v.sort_unstable();
            v.dedup();
            v
        };
        let zetas = defaults(&self.sweep.zeta_values, self.experiment.zeta);
        let flips = defaults(&self.sweep.flip_values, self.experiment.attack.flip);
        let mut proportions = if self.sweep.proportion_values.is_empty() {
            vec![self.experiment.attack.proportion]
        } else {
            self.sweep.proportion_values.clone()
        };
        proportions.sort_unstable();
        proportions.dedup();

        let mut points = Vec::with_capacity(zetas.len() * flips.len() * proportions.len());
        for &zeta in &zetas {
            for &flip in &flips {
                for &proportion in &proportions {
                    points.push(SweepPoint {
                        zeta,
                        flip,
                        proportion,
                    });
                }
            }
        }
        points
    }

    /// The experiment configuration at one sweep point.
    pub fn experiment_for(&self, point: &SweepPoint) -> ExperimentConfig {
        let mut cfg = self.experiment.clone();
        cfg.zeta = point.zeta;
        cfg.attack.flip = point.flip;
        cfg.attack.proportion = point.proportion;
        cfg
    }

    /// Hash of the effective configuration (after any seed override);
    /// embedded in every output so results can be traced to their inputs.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

pub fn parse_config_str(text: &str) -> Result<CliConfigFile, ConfigError> {
    Ok(toml::from_str(text)?)
}

pub fn load_config(path: &Path) -> Result<CliConfigFile, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}
