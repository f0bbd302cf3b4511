//! Non-interacting tensor-product composition `H_A ⊗ I + I ⊗ H_B`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Value};

use super::{ModelBuilder, ModelInstance, ModelRegistry, ModelSpec};
use crate::config_space::{
    build_operator_family, CompositionRule, ConfigLabel, ConfigurationBasis, LinearOperator,
    OperatorFamily,
};
use crate::error::{Error, Result, SchemaError};
use crate::linalg::{kron, SparseOp};

pub const DEFAULT_DIMENSION_CAP: usize = 4096;

#[derive(Debug, Clone)]
pub struct Composite {
    pub left: ModelSpec,
    pub right: ModelSpec,
    pub cap: usize,
}

impl Composite {
    pub fn new(left: ModelSpec, right: ModelSpec, cap: usize) -> Result<Self> {
        let dim = left.dimension().saturating_mul(right.dimension());
        if dim > cap {
            return Err(Error::DimensionOverflow { dim, cap });
        }
        Ok(Self { left, right, cap })
    }
}

/// Creation operators `C_j⁺ ⊗ C_k⁺` with `C_0⁺ = I`.
struct ProductRule<'a> {
    left: &'a OperatorFamily,
    right: &'a OperatorFamily,
}

impl ProductRule<'_> {
    fn factor(family: &OperatorFamily, ordinal: usize) -> SparseOp {
        if ordinal == 0 {
            SparseOp::identity(family.dimension())
        } else {
            family.creation_sparse(ordinal).clone()
        }
    }
}

impl CompositionRule for ProductRule<'_> {
    fn creation(&self, _: &ConfigurationBasis, ordinal: usize) -> SparseOp {
        let db = self.right.dimension();
        Self::factor(self.left, ordinal / db).kron(&Self::factor(self.right, ordinal % db))
    }
}

/// Compose two built models without interaction. Configuration `(j, k)` gets
/// ordinal `j·D_B + k` and excitation level `level(j) + level(k)`.
pub fn tensor_compose(a: &ModelInstance, b: &ModelInstance, cap: usize) -> Result<ModelInstance> {
    let (da, db) = (a.dimension(), b.dimension());
    let dim = da.saturating_mul(db);
    if dim > cap {
        return Err(Error::DimensionOverflow { dim, cap });
    }
    let mut entries = Vec::with_capacity(dim);
    for j in 0..da {
        for k in 0..db {
            entries.push((
                ConfigLabel::Product(Box::new(a.basis.label(j).clone()), Box::new(b.basis.label(k).clone())),
                a.basis.excitation_level(j) + b.basis.excitation_level(k),
            ));
        }
    }
    let basis = Arc::new(ConfigurationBasis::new(entries)?);
    let family = build_operator_family(
        basis,
        &ProductRule {
            left: &a.ops,
            right: &b.ops,
        },
    )?;

    let ia = nalgebra::DMatrix::identity(da, da);
    let ib = nalgebra::DMatrix::identity(db, db);
    let h = kron(a.hamiltonian.matrix(), &ib) + kron(&ia, b.hamiltonian.matrix());

    let mut observables = BTreeMap::new();
    for (name, op) in &a.observables {
        observables.insert(format!("a.{name}"), LinearOperator::hermitian(kron(op.matrix(), &ib))?);
    }
    for (name, op) in &b.observables {
        observables.insert(format!("b.{name}"), LinearOperator::hermitian(kron(&ia, op.matrix()))?);
    }
    ModelInstance::new(
        format!("{} + {}", a.name, b.name),
        LinearOperator::hermitian(h)?,
        family,
        observables,
    )
}

impl ModelBuilder for Composite {
    fn kind(&self) -> &'static str {
        "composite"
    }

    fn dimension(&self) -> usize {
        self.left.dimension() * self.right.dimension()
    }

    fn build(&self) -> Result<ModelInstance> {
        let a = self.left.build()?;
        let b = self.right.build()?;
        tensor_compose(&a, &b, self.cap)
    }

    fn to_json(&self) -> Value {
        let mut v = json!({"kind": "composite", "parts": [self.left.to_json(), self.right.to_json()]});
        if self.cap != DEFAULT_DIMENSION_CAP {
            v["max_dim"] = json!(self.cap);
        }
        v
    }

    fn describe(&self) -> String {
        format!("composite[{} + {}]", self.left.describe(), self.right.describe())
    }
}

fn default_cap() -> usize {
    DEFAULT_DIMENSION_CAP
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    parts: Vec<Value>,
    #[serde(default = "default_cap")]
    max_dim: usize,
}

pub(super) fn parse(params: &Value, path: &str, registry: &ModelRegistry) -> Result<ModelSpec, SchemaError> {
    let p: Params = super::parse_params(params, path)?;
    if p.parts.len() != 2 {
        return Err(SchemaError::new(format!("{path}.parts"), "composite needs exactly two parts"));
    }
    let left = registry.parse(&p.parts[0], &format!("{path}.parts[0]"))?;
    let right = registry.parse(&p.parts[1], &format!("{path}.parts[1]"))?;
    Composite::new(left, right, p.max_dim)
        .map(ModelSpec::new)
        .map_err(|e| SchemaError::new(format!("{path}.parts"), e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit_vector;

    #[test]
    fn two_level_systems_give_three_excitations() {
        let a = ModelSpec::oscillator(0.0, 2).unwrap().build().unwrap();
        let m = tensor_compose(&a, &a, DEFAULT_DIMENSION_CAP).unwrap();
        assert_eq!(m.dimension(), 4);
        assert_eq!(m.basis.excited().count(), 3);
        assert_eq!(m.basis.excitation_level(3), 2);
    }

    #[test]
    fn every_annihilator_kills_product_reference() {
        let a = ModelSpec::oscillator(0.1, 3).unwrap().build().unwrap();
        let b = ModelSpec::spin_chain(2, 0.3, 1.0).unwrap().build().unwrap();
        let m = tensor_compose(&a, &b, DEFAULT_DIMENSION_CAP).unwrap();
        let phi = unit_vector(m.dimension(), 0);
        for j in m.basis.excited() {
            assert_eq!(m.ops.annihilation_sparse(j).apply(&phi).camax(), 0.0);
        }
    }

    #[test]
    fn overflow_is_reported() {
        let a = ModelSpec::oscillator(0.0, 100).unwrap();
        let b = ModelSpec::oscillator(0.0, 100).unwrap();
        assert!(matches!(
            Composite::new(a, b, DEFAULT_DIMENSION_CAP),
            Err(Error::DimensionOverflow { dim: 10000, cap: 4096 })
        ));
    }
}
