//! Open transverse-field Ising chain with an all-down reference state.
//!
//! Basis ordinal = bit mask of up spins (bit `i` set ⇔ site `i` up), so the
//! reference |↓…↓⟩ is ordinal 0 and the flipped-site set of ordinal `m` is the
//! set bits of `m`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Value};

use super::{parse_params, ModelBuilder, ModelInstance, ModelRegistry, ModelSpec};
use crate::config_space::{
    build_operator_family, CompositionRule, ConfigLabel, ConfigurationBasis, LinearOperator,
};
use crate::error::{Error, Result, SchemaError};
use crate::linalg::{c, CMat, SparseOp};

/// Largest chain handled by the dense representation.
pub const MAX_SITES: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinChain {
    pub sites: usize,
    /// Transverse field `g`.
    pub field: f64,
    /// Ising coupling `J`.
    pub coupling: f64,
}

impl SpinChain {
    pub fn new(sites: usize, field: f64, coupling: f64) -> Result<Self> {
        if sites < 2 {
            return Err(Error::InvalidSpec(format!("spin chain needs ≥ 2 sites, got {sites}")));
        }
        if sites > MAX_SITES {
            return Err(Error::InvalidSpec(format!("spin chain with {sites} sites exceeds {MAX_SITES}")));
        }
        if !field.is_finite() || !coupling.is_finite() {
            return Err(Error::InvalidSpec("non-finite field or coupling".into()));
        }
        Ok(Self {
            sites,
            field,
            coupling,
        })
    }

    fn spin(mask: usize, site: usize) -> f64 {
        if mask >> site & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Products of single-site raisers over the flipped-site set.
struct SiteRaisers;

impl CompositionRule for SiteRaisers {
    fn creation(&self, basis: &ConfigurationBasis, flips: usize) -> SparseOp {
        let d = basis.dimension();
        let entries = (0..d)
            .filter(|m| m & flips == 0)
            .map(|m| (m | flips, m, c(1.0)))
            .collect();
        SparseOp::new(d, entries)
    }
}

impl ModelBuilder for SpinChain {
    fn kind(&self) -> &'static str {
        "spin_chain"
    }

    fn dimension(&self) -> usize {
        1 << self.sites
    }

    fn build(&self) -> Result<ModelInstance> {
        let n = self.sites;
        let d = 1usize << n;
        let basis = Arc::new(ConfigurationBasis::new(
            (0..d)
                .map(|m| {
                    let flips: Vec<usize> = (0..n).filter(|i| m >> i & 1 == 1).collect();
                    let level = flips.len();
                    (ConfigLabel::Flips(flips), level)
                })
                .collect(),
        )?);
        let family = build_operator_family(Arc::clone(&basis), &SiteRaisers)?;

        let mut h = CMat::zeros(d, d);
        let mut mz = CMat::zeros(d, d);
        for m in 0..d {
            let zz: f64 = (0..n - 1).map(|i| Self::spin(m, i) * Self::spin(m, i + 1)).sum();
            h[(m, m)] = c(-self.coupling * zz);
            mz[(m, m)] = c((0..n).map(|i| Self::spin(m, i)).sum::<f64>() / n as f64);
            for i in 0..n {
                h[(m ^ (1 << i), m)] += c(-self.field);
            }
        }

        let mut observables = BTreeMap::new();
        observables.insert("mz".to_string(), LinearOperator::hermitian(mz)?);
        ModelInstance::new(self.describe(), LinearOperator::hermitian(h)?, family, observables)
    }

    fn to_json(&self) -> Value {
        json!({"kind": "spin_chain", "sites": self.sites, "field": self.field, "coupling": self.coupling})
    }

    fn describe(&self) -> String {
        format!("spin_chain(N={}, g={}, J={})", self.sites, self.field, self.coupling)
    }
}

fn default_coupling() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    sites: usize,
    field: f64,
    #[serde(default = "default_coupling")]
    coupling: f64,
}

pub(super) fn parse(params: &Value, path: &str, _: &ModelRegistry) -> Result<ModelSpec, SchemaError> {
    let p: Params = parse_params(params, path)?;
    if !(2..=MAX_SITES).contains(&p.sites) {
        return Err(SchemaError::new(
            format!("{path}.sites"),
            format!("site count must lie in [2, {MAX_SITES}]"),
        ));
    }
    if !p.field.is_finite() {
        return Err(SchemaError::new(format!("{path}.field"), "must be finite"));
    }
    if !p.coupling.is_finite() {
        return Err(SchemaError::new(format!("{path}.coupling"), "must be finite"));
    }
    Ok(ModelSpec::new(SpinChain {
        sites: p.sites,
        field: p.field,
        coupling: p.coupling,
    }))
}
