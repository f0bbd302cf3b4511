//! Exactly diagonalizable model Hamiltonians.
//!
//! Each model kind implements [`ModelBuilder`] and is registered by name in a
//! [`ModelRegistry`]; run configurations select the kind with the `kind` key.

mod composite;
mod oscillator;
mod spin_chain;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::Value;

use crate::config_space::{ConfigurationBasis, LinearOperator, OperatorFamily};
use crate::error::{Error, Result, SchemaError};

pub use composite::{tensor_compose, Composite, DEFAULT_DIMENSION_CAP};
pub use oscillator::Oscillator;
pub use spin_chain::SpinChain;

/// A fully specified model that knows how to build itself.
pub trait ModelBuilder: fmt::Debug + Send + Sync {
    /// Registry name of the model kind.
    fn kind(&self) -> &'static str;
    /// Hilbert-space dimension of the built model.
    fn dimension(&self) -> usize;
    fn build(&self) -> Result<ModelInstance>;
    /// Config-file representation (including `kind`).
    fn to_json(&self) -> Value;
    /// Short human-readable name.
    fn describe(&self) -> String;
}

/// Shared handle to a model specification.
#[derive(Debug, Clone)]
pub struct ModelSpec(Arc<dyn ModelBuilder>);

impl ModelSpec {
    pub fn new(builder: impl ModelBuilder + 'static) -> Self {
        Self(Arc::new(builder))
    }

    /// `−d²/dx² + x² + λx⁴` in a `dim`-level oscillator basis.
    pub fn oscillator(lambda: f64, dim: usize) -> Result<Self> {
        Ok(Self::new(Oscillator::new(lambda, dim)?))
    }

    /// Open transverse-field Ising chain `−J Σ σᶻσᶻ − g Σ σˣ`.
    pub fn spin_chain(sites: usize, field: f64, coupling: f64) -> Result<Self> {
        Ok(Self::new(SpinChain::new(sites, field, coupling)?))
    }

    /// Non-interacting union of two models.
    pub fn composite(left: ModelSpec, right: ModelSpec) -> Result<Self> {
        Ok(Self::new(Composite::new(left, right, DEFAULT_DIMENSION_CAP)?))
    }

    pub fn kind(&self) -> &'static str {
        self.0.kind()
    }

    pub fn dimension(&self) -> usize {
        self.0.dimension()
    }

    pub fn to_json(&self) -> Value {
        self.0.to_json()
    }

    pub fn describe(&self) -> String {
        self.0.describe()
    }

    pub fn build(&self) -> Result<ModelInstance> {
        self.0.build()
    }
}

/// Build the Hamiltonian, basis and operator family for `spec`.
pub fn build_model(spec: &ModelSpec) -> Result<ModelInstance> {
    spec.build()
}

/// A built model: Hermitian Hamiltonian plus its configuration machinery.
#[derive(Debug, Clone)]
pub struct ModelInstance {
    pub name: String,
    pub hamiltonian: LinearOperator,
    pub basis: Arc<ConfigurationBasis>,
    pub ops: Arc<OperatorFamily>,
    /// Named auxiliary observables (position moments, magnetization, ...).
    pub observables: BTreeMap<String, LinearOperator>,
}

impl ModelInstance {
    pub fn new(
        name: String,
        hamiltonian: LinearOperator,
        ops: OperatorFamily,
        observables: BTreeMap<String, LinearOperator>,
    ) -> Result<Self> {
        let basis = ops.basis_arc();
        hamiltonian.check_basis(&basis)?;
        if !hamiltonian.hermitian_hint() {
            let defect = hamiltonian.hermiticity_defect();
            if defect > crate::config_space::HERMITIAN_TOLERANCE {
                return Err(Error::InvariantViolation {
                    name: "hamiltonian_hermiticity".into(),
                    magnitude: defect,
                });
            }
        }
        Ok(Self {
            name,
            hamiltonian,
            basis,
            ops: Arc::new(ops),
            observables,
        })
    }

    pub fn dimension(&self) -> usize {
        self.basis.dimension()
    }

    pub fn observable(&self, name: &str) -> Option<&LinearOperator> {
        self.observables.get(name)
    }
}

/// Parses the parameter object of one model kind.
pub type ModelParser = fn(&Value, &str, &ModelRegistry) -> Result<ModelSpec, SchemaError>;

/// Name → parser table for model kinds.
#[derive(Clone)]
pub struct ModelRegistry {
    parsers: BTreeMap<&'static str, ModelParser>,
}

impl fmt::Debug for ModelRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.parsers.keys()).finish()
    }
}

impl Default for ModelRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("oscillator", oscillator::parse);
        r.register("spin_chain", spin_chain::parse);
        r.register("composite", composite::parse);
        r
    }
}

impl ModelRegistry {
    pub fn empty() -> Self {
        Self {
            parsers: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, kind: &'static str, parser: ModelParser) {
        self.parsers.insert(kind, parser);
    }

    pub fn kinds(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.parsers.keys().copied()
    }

    /// Parse a model object `{"kind": ..., <params>}` found at `path`.
    /// A bare string is accepted as a kind with default parameters.
    pub fn parse(&self, value: &Value, path: &str) -> Result<ModelSpec, SchemaError> {
        let (kind, params) = match value {
            Value::String(kind) => (kind.as_str(), Value::Object(Default::default())),
            Value::Object(map) => {
                let kind = map
                    .get("kind")
                    .and_then(Value::as_str)
                    .ok_or_else(|| SchemaError::new(format!("{path}.kind"), "missing model kind"))?;
                let mut params = map.clone();
                params.remove("kind");
                (kind, Value::Object(params))
            }
            _ => return Err(SchemaError::new(path, "expected a model object")),
        };
        let parser = self.parsers.get(kind).ok_or_else(|| {
            let known: Vec<_> = self.kinds().collect();
            SchemaError::new(
                format!("{path}.kind"),
                format!("unknown model kind `{kind}` (known: {})", known.join(", ")),
            )
        })?;
        parser(&params, path, self)
    }
}

/// Deserialize a parameter object with paths reported relative to `path`.
pub(crate) fn parse_params<T: serde::de::DeserializeOwned>(
    params: &Value,
    path: &str,
) -> Result<T, SchemaError> {
    serde_path_to_error::deserialize(params).map_err(|e| {
        let inner = e.path().to_string();
        let full = if inner == "." { path.to_string() } else { format!("{path}.{inner}") };
        SchemaError::new(full, e.into_inner().to_string())
    })
}

/// Models with a nontrivial interaction used throughout tests and the
/// acceptance suite.
pub fn bundled_interacting() -> Vec<ModelSpec> {
    let mut v = Vec::new();
    for &(lambda, dim) in &[(0.1, 12), (0.1, 16), (0.3, 16), (0.1, 40), (0.3, 40)] {
        v.push(ModelSpec::oscillator(lambda, dim).expect("valid oscillator"));
    }
    for &sites in &[2, 3, 4] {
        for &field in &[0.2, 0.5] {
            v.push(ModelSpec::spin_chain(sites, field, 1.0).expect("valid chain"));
        }
    }
    v
}

/// All bundled models: the interacting set plus the exactly solvable anchors
/// and a non-interacting composite.
pub fn bundled() -> Vec<ModelSpec> {
    let mut v = vec![
        ModelSpec::oscillator(0.0, 20).expect("valid oscillator"),
        ModelSpec::spin_chain(3, 0.0, 1.0).expect("valid chain"),
    ];
    v.extend(bundled_interacting());
    v.push(
        ModelSpec::composite(
            ModelSpec::oscillator(0.1, 6).expect("valid oscillator"),
            ModelSpec::spin_chain(2, 0.2, 1.0).expect("valid chain"),
        )
        .expect("valid composite"),
    );
    v
}
