//! Run configuration, read from JSON or TOML depending on the file extension.

use std::fmt;
use std::path::{Path, PathBuf};

use polar_iga::analysis::{Grading, ProblemKind};
use serde::Deserialize;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GradingValue {
    Named(String),
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Emit {
    pub mesh_csv: bool,
    pub report_csv: bool,
    pub report_json: bool,
    pub solution_samples: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Self {
            mesh_csv: false,
            report_csv: true,
            report_json: true,
            solution_samples: false,
        }
    }
}

fn default_quadrature() -> usize {
    6
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: ProblemKind,
    degree: i64,
    grading: GradingValue,
    levels: Vec<i64>,
    #[serde(default = "default_quadrature")]
    quadrature_nodes: usize,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    #[serde(default)]
    emit: Emit,
}

/// A validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub degree: usize,
    pub grading: Grading,
    pub levels: Vec<usize>,
    pub quadrature_nodes: usize,
    /// Relative paths are resolved against the config file's directory.
    pub output_dir: PathBuf,
    pub emit: Emit,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
        let raw: RawConfig = match ext.as_str() {
            "json" => serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?,
            "toml" => toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?,
            _ => {
                return Err(ConfigError(format!(
                    "{}: unsupported config extension (expected .json or .toml)",
                    path.display()
                )))
            }
        };
        let mut cfg = Self::validate(raw)?;
        if cfg.output_dir.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.output_dir = dir.join(&cfg.output_dir);
            }
        }
        Ok(cfg)
    }

    fn validate(raw: RawConfig) -> Result<Self, ConfigError> {
        if raw.degree < 1 {
            return Err(ConfigError(format!("degree must be at least 1, got {}", raw.degree)));
        }
        let grading = match raw.grading {
            GradingValue::Named(s) => match s.to_ascii_lowercase().as_str() {
                "uniform" => Grading::Uniform,
                "auto" => Grading::Auto,
                _ => {
                    return Err(ConfigError(format!(
                        "grading must be \"uniform\", \"auto\" or a number in (0,1], got \"{s}\""
                    )))
                }
            },
            GradingValue::Value(mu) if mu > 0.0 && mu <= 1.0 => Grading::Explicit(mu),
            GradingValue::Value(mu) => {
                return Err(ConfigError(format!("grading {mu} must lie in (0,1]")));
            }
        };
        if raw.levels.is_empty() {
            return Err(ConfigError("levels must not be empty".into()));
        }
        if raw.levels.iter().any(|&n| n < 2) {
            return Err(ConfigError(format!(
                "every level needs at least 2 breakpoints, got {:?}",
                raw.levels
            )));
        }
        if raw.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError(format!("levels must be strictly increasing, got {:?}", raw.levels)));
        }
        if raw.quadrature_nodes == 0 {
            return Err(ConfigError("quadrature_nodes must be at least 1".into()));
        }
        Ok(Self {
            problem: raw.problem,
            degree: raw.degree as usize,
            grading,
            levels: raw.levels.into_iter().map(|n| n as usize).collect(),
            quadrature_nodes: raw.quadrature_nodes,
            output_dir: raw.output_dir,
            emit: raw.emit,
        })
    }
}
