//! Report assembly and atomic file output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ccm::IterationRecord;
use crate::config_space::ConfigurationBasis;
use crate::error::{Error, Result};
use crate::linalg::C64;

pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of a single check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Passed,
    Failed,
    /// Precondition not met; does not affect the exit code.
    Skipped,
}

/// A defect scalar together with the tolerance it was judged against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub name: String,
    pub value: Option<f64>,
    pub tolerance: f64,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Defect {
    pub fn judged(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value: Some(value),
            tolerance,
            status: if value <= tolerance { CheckStatus::Passed } else { CheckStatus::Failed },
            note: None,
        }
    }

    pub fn failed(name: &str, tolerance: f64, err: &Error) -> Self {
        Self {
            name: name.into(),
            value: None,
            tolerance,
            status: CheckStatus::Failed,
            note: Some(format!("{}: {err}", err.kind())),
        }
    }

    pub fn skipped(name: &str, tolerance: f64, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: None,
            tolerance,
            status: CheckStatus::Skipped,
            note: Some(reason.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRow {
    pub ordinal: usize,
    pub label: String,
    pub level: usize,
    pub value: [f64; 2],
}

pub fn amplitude_table(basis: &ConfigurationBasis, values: impl Iterator<Item = (usize, C64)>) -> Vec<AmplitudeRow> {
    values
        .map(|(j, z)| AmplitudeRow {
            ordinal: j,
            label: basis.label(j).to_string(),
            level: basis.excitation_level(j),
            value: [z.re, z.im],
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumComparison {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        Self {
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub value: f64,
    pub imaginary: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub ket: f64,
    pub bra: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub size: usize,
    pub energy: Option<f64>,
    pub error: Option<f64>,
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<ErrorReport>,
}

/// Machine-readable result of one CLI command.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub config: Value,
    pub model: String,
    pub dimension: usize,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<ErrorReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub energy: Option<EnergyReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residuals: Option<ResidualReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub newton_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stability: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub ket_amplitudes: Vec<AmplitudeRow>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub bra_amplitudes: Vec<AmplitudeRow>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub defects: Vec<Defect>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub spectra: Vec<SpectrumComparison>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub spectrum: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub sweep: Vec<SweepRow>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<TraceRow>,
    /// Wall-clock seconds per phase; the only nondeterministic part.
    pub timings: BTreeMap<String, f64>,
}

/// Serializable mirror of an iteration record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub attempt: usize,
    pub step: usize,
    pub kind: String,
    pub residual_norm: f64,
    pub damping: f64,
    pub energy: f64,
}

impl From<&IterationRecord> for TraceRow {
    fn from(r: &IterationRecord) -> Self {
        Self {
            attempt: r.attempt,
            step: r.step,
            kind: serde_json::to_value(r.kind)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default(),
            residual_norm: r.residual_norm,
            damping: r.damping,
            energy: r.energy,
        }
    }
}

impl RunReport {
    pub fn new(command: &str, seed: u64, config: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            seed,
            config,
            status: "ok".into(),
            ..Self::default()
        }
    }

    pub fn any_failed(&self) -> bool {
        self.defects.iter().any(|d| d.status == CheckStatus::Failed)
            || self.spectra.iter().any(|s| s.status == CheckStatus::Failed)
    }

    /// Settle `status` and return the process exit code.
    pub fn finish(&mut self) -> i32 {
        if self.error.is_some() {
            self.status = "error".into();
            1
        } else if self.any_failed() {
            self.status = "check_failed".into();
            2
        } else {
            self.status = "ok".into();
            0
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Write via a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("report");
    let tmp: PathBuf = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Render rows as CSV (no quoting needed: all fields are numbers or labels
/// without commas).
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
