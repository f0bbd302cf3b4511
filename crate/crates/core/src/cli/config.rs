//! Run configuration: a JSON document validated into [`RunConfig`].

use std::path::PathBuf;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::ccm::{Damping, SolverOptions, TruncationRegistry, TruncationSpec};
use crate::error::SchemaError;
use crate::models::{parse_params, ModelRegistry, ModelSpec};

const TOP_LEVEL_KEYS: [&str; 5] = ["model", "truncation", "solver", "checks", "output"];

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Backtracking factor of the line search, in (0, 1).
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 200,
            damping: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            damping: Damping {
                factor: self.damping,
                ..Damping::default()
            },
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Checks {
    pub ths_verify: bool,
    pub dictionary: bool,
    pub extensivity: bool,
    pub oracle: bool,
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            ths_verify: true,
            dictionary: true,
            extensivity: true,
            oracle: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            formats: vec![Format::Json, Format::Csv],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub truncation: TruncationSpec,
    pub solver: SolverConfig,
    pub checks: Checks,
    pub output: OutputConfig,
}

impl RunConfig {
    /// Normalized echo of the configuration (all defaults filled in).
    pub fn to_json(&self) -> Value {
        json!({
            "model": self.model.to_json(),
            "truncation": self.truncation.to_json(),
            "solver": {
                "tolerance": self.solver.tolerance,
                "max_iterations": self.solver.max_iterations,
                "damping": self.solver.damping,
            },
            "checks": {
                "ths_verify": self.checks.ths_verify,
                "dictionary": self.checks.dictionary,
                "extensivity": self.checks.extensivity,
                "oracle": self.checks.oracle,
            },
            "output": {
                "dir": self.output.dir,
                "formats": self.output.formats.iter().map(|f| match f {
                    Format::Json => "json",
                    Format::Csv => "csv",
                }).collect::<Vec<_>>(),
            },
        })
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, SchemaError> {
    let value: Value = serde_json::from_str(text).map_err(|e| SchemaError::new("", format!("invalid JSON: {e}")))?;
    parse_config_value(&value)
}

pub fn parse_config_value(value: &Value) -> Result<RunConfig, SchemaError> {
    let obj = value
        .as_object()
        .ok_or_else(|| SchemaError::new("", "configuration must be an object"))?;
    if let Some(key) = obj.keys().find(|k| !TOP_LEVEL_KEYS.contains(&k.as_str())) {
        return Err(SchemaError::new(key.clone(), "unknown field"));
    }
    let model_value = obj.get("model").ok_or_else(|| SchemaError::new("model", "missing field"))?;
    let model = ModelRegistry::default().parse(model_value, "model")?;
    let truncation = match obj.get("truncation") {
        Some(v) => TruncationRegistry::default().parse(v, "truncation", model.dimension())?,
        None => TruncationSpec::full(),
    };
    let solver: SolverConfig = match obj.get("solver") {
        Some(v) => parse_params(v, "solver")?,
        None => SolverConfig::default(),
    };
    if !(solver.tolerance > 0.0 && solver.tolerance <= 1e-2) {
        return Err(SchemaError::new("solver.tolerance", "must lie in (0, 1e-2]"));
    }
    if !(1..=10_000).contains(&solver.max_iterations) {
        return Err(SchemaError::new("solver.max_iterations", "must lie in [1, 10000]"));
    }
    if !(solver.damping > 0.0 && solver.damping < 1.0) {
        return Err(SchemaError::new("solver.damping", "must lie in (0, 1)"));
    }
    let checks: Checks = match obj.get("checks") {
        Some(v) => parse_params(v, "checks")?,
        None => Checks::default(),
    };
    let output: OutputConfig = match obj.get("output") {
        Some(v) => parse_params(v, "output")?,
        None => OutputConfig::default(),
    };
    Ok(RunConfig {
        model,
        truncation,
        solver,
        checks,
        output,
    })
}
