//! Truncation index sets and the named schemes that produce them.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::config_space::ConfigurationBasis;
use crate::error::{Error, Result, SchemaError};
use crate::models::parse_params;

/// How a truncation set was chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeTag {
    Full,
    SubN(usize),
    Explicit,
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeTag::Full => write!(f, "full"),
            SchemeTag::SubN(n) => write!(f, "sub_{n}"),
            SchemeTag::Explicit => write!(f, "explicit"),
        }
    }
}

/// Ordered subset `T` of excited configuration ordinals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationSet {
    indices: Vec<usize>,
    scheme: SchemeTag,
    dim: usize,
}

impl TruncationSet {
    pub fn new(indices: Vec<usize>, scheme: SchemeTag, basis: &ConfigurationBasis) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyTruncation);
        }
        let dim = basis.dimension();
        let mut seen = HashSet::new();
        for &j in &indices {
            if j == 0 {
                return Err(Error::InvalidTruncation("ordinal 0 (reference) is excluded".into()));
            }
            if j >= dim {
                return Err(Error::InvalidTruncation(format!("ordinal {j} outside basis of size {dim}")));
            }
            if !seen.insert(j) {
                return Err(Error::InvalidTruncation(format!("duplicate ordinal {j}")));
            }
        }
        Ok(Self { indices, scheme, dim })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn scheme(&self) -> &SchemeTag {
        &self.scheme
    }

    /// Dimension of the basis the set was drawn from.
    pub fn basis_dimension(&self) -> usize {
        self.dim
    }

    /// Whether every excited configuration is retained.
    pub fn is_full(&self) -> bool {
        self.indices.len() + 1 == self.dim
    }

    pub fn position(&self, ordinal: usize) -> Option<usize> {
        self.indices.iter().position(|&j| j == ordinal)
    }
}

/// Every excited configuration.
pub fn full_truncation(basis: &ConfigurationBasis) -> Result<TruncationSet> {
    TruncationSet::new(basis.excited().collect(), SchemeTag::Full, basis)
}

/// `{ȷ : 1 ≤ level(ȷ) ≤ n}`.
pub fn sub_n_truncation(basis: &ConfigurationBasis, n: usize) -> Result<TruncationSet> {
    if n == 0 {
        return Err(Error::InvalidTruncation("SUB-n needs n ≥ 1".into()));
    }
    let indices: Vec<usize> = basis.excited().filter(|&j| basis.excitation_level(j) <= n).collect();
    TruncationSet::new(indices, SchemeTag::SubN(n), basis)
}

/// A rule that selects a truncation set from a basis.
pub trait TruncationScheme: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;
    fn select(&self, basis: &ConfigurationBasis) -> Result<TruncationSet>;
    fn to_json(&self) -> Value;
}

#[derive(Debug, Clone, Copy)]
pub struct Full;

impl TruncationScheme for Full {
    fn name(&self) -> &'static str {
        "full"
    }
    fn select(&self, basis: &ConfigurationBasis) -> Result<TruncationSet> {
        full_truncation(basis)
    }
    fn to_json(&self) -> Value {
        json!({"scheme": "full"})
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SubN(pub usize);

impl TruncationScheme for SubN {
    fn name(&self) -> &'static str {
        "sub_n"
    }
    fn select(&self, basis: &ConfigurationBasis) -> Result<TruncationSet> {
        sub_n_truncation(basis, self.0)
    }
    fn to_json(&self) -> Value {
        json!({"scheme": "sub_n", "n": self.0})
    }
}

#[derive(Debug, Clone)]
pub struct Explicit(pub Vec<usize>);

impl TruncationScheme for Explicit {
    fn name(&self) -> &'static str {
        "explicit"
    }
    fn select(&self, basis: &ConfigurationBasis) -> Result<TruncationSet> {
        TruncationSet::new(self.0.clone(), SchemeTag::Explicit, basis)
    }
    fn to_json(&self) -> Value {
        json!({"scheme": "explicit", "indices": self.0})
    }
}

/// Shared handle to a truncation scheme.
#[derive(Debug, Clone)]
pub struct TruncationSpec(Arc<dyn TruncationScheme>);

impl TruncationSpec {
    pub fn new(scheme: impl TruncationScheme + 'static) -> Self {
        Self(Arc::new(scheme))
    }

    pub fn full() -> Self {
        Self::new(Full)
    }

    pub fn sub_n(n: usize) -> Self {
        Self::new(SubN(n))
    }

    pub fn explicit(indices: Vec<usize>) -> Self {
        Self::new(Explicit(indices))
    }

    pub fn name(&self) -> &'static str {
        self.0.name()
    }

    pub fn select(&self, basis: &ConfigurationBasis) -> Result<TruncationSet> {
        self.0.select(basis)
    }

    pub fn to_json(&self) -> Value {
        self.0.to_json()
    }
}

/// Parses the parameters of one truncation scheme; `dim` is the model dimension.
pub type TruncationParser = fn(&Value, &str, usize) -> Result<TruncationSpec, SchemaError>;

#[derive(Clone)]
pub struct TruncationRegistry {
    parsers: BTreeMap<&'static str, TruncationParser>,
}

impl fmt::Debug for TruncationRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.parsers.keys()).finish()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubNParams {
    n: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitParams {
    indices: Vec<usize>,
}

fn parse_full(v: &Value, path: &str, _: usize) -> Result<TruncationSpec, SchemaError> {
    let _: NoParams = parse_params(v, path)?;
    Ok(TruncationSpec::full())
}

fn parse_sub_n(v: &Value, path: &str, _: usize) -> Result<TruncationSpec, SchemaError> {
    let p: SubNParams = parse_params(v, path)?;
    if p.n == 0 {
        return Err(SchemaError::new(format!("{path}.n"), "n must be ≥ 1"));
    }
    Ok(TruncationSpec::sub_n(p.n))
}

fn parse_explicit(v: &Value, path: &str, dim: usize) -> Result<TruncationSpec, SchemaError> {
    let p: ExplicitParams = parse_params(v, path)?;
    let at = format!("{path}.indices");
    if p.indices.is_empty() {
        return Err(SchemaError::new(at, "empty index list"));
    }
    let mut seen = HashSet::new();
    for &j in &p.indices {
        if j == 0 {
            return Err(SchemaError::new(at, "index 0 is the reference configuration"));
        }
        if j >= dim {
            return Err(SchemaError::new(at, format!("index {j} ≥ model dimension {dim}")));
        }
        if !seen.insert(j) {
            return Err(SchemaError::new(at, format!("duplicate index {j}")));
        }
    }
    Ok(TruncationSpec::explicit(p.indices))
}

impl Default for TruncationRegistry {
    fn default() -> Self {
        let mut r = Self {
            parsers: BTreeMap::new(),
        };
        r.register("full", parse_full);
        r.register("sub_n", parse_sub_n);
        r.register("explicit", parse_explicit);
        r
    }
}

impl TruncationRegistry {
    pub fn register(&mut self, name: &'static str, parser: TruncationParser) {
        self.parsers.insert(name, parser);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.parsers.keys().copied()
    }

    /// Parse either a bare scheme name or `{"scheme": name, <params>}`.
    pub fn parse(&self, value: &Value, path: &str, dim: usize) -> Result<TruncationSpec, SchemaError> {
        let (name, params) = match value {
            Value::String(s) => (s.as_str(), Value::Object(Default::default())),
            Value::Object(map) => {
                let name = map
                    .get("scheme")
                    .and_then(Value::as_str)
                    .ok_or_else(|| SchemaError::new(format!("{path}.scheme"), "missing scheme name"))?;
                let mut params = map.clone();
                params.remove("scheme");
                (name, Value::Object(params))
            }
            _ => return Err(SchemaError::new(path, "expected a scheme name or object")),
        };
        let parser = self.parsers.get(name).ok_or_else(|| {
            SchemaError::new(
                format!("{path}.scheme"),
                format!("unknown truncation scheme `{name}`"),
            )
        })?;
        parser(&params, path, dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelSpec;

    #[test]
    fn sub_two_of_five_level_oscillator() {
        let m = ModelSpec::oscillator(0.0, 5).unwrap().build().unwrap();
        assert_eq!(sub_n_truncation(&m.basis, 2).unwrap().indices(), &[1, 2]);
        assert_eq!(
            sub_n_truncation(&m.basis, 4).unwrap().indices(),
            full_truncation(&m.basis).unwrap().indices()
        );
        assert_eq!(
            sub_n_truncation(&m.basis, 9).unwrap().indices(),
            full_truncation(&m.basis).unwrap().indices()
        );
    }

    #[test]
    fn sub_one_of_three_site_chain_is_single_flips() {
        let m = ModelSpec::spin_chain(3, 0.1, 1.0).unwrap().build().unwrap();
        assert_eq!(sub_n_truncation(&m.basis, 1).unwrap().indices(), &[1, 2, 4]);
    }

    #[test]
    fn invalid_sets_are_rejected() {
        let m = ModelSpec::oscillator(0.0, 4).unwrap().build().unwrap();
        assert!(matches!(
            TruncationSet::new(vec![], SchemeTag::Explicit, &m.basis),
            Err(Error::EmptyTruncation)
        ));
        assert!(TruncationSet::new(vec![0, 1], SchemeTag::Explicit, &m.basis).is_err());
        assert!(TruncationSet::new(vec![1, 1], SchemeTag::Explicit, &m.basis).is_err());
        assert!(TruncationSet::new(vec![4], SchemeTag::Explicit, &m.basis).is_err());
        assert!(sub_n_truncation(&m.basis, 0).is_err());
    }

    #[test]
    fn registry_parses_and_checks_bounds() {
        let r = TruncationRegistry::default();
        assert_eq!(r.parse(&json!("full"), "truncation", 4).unwrap().name(), "full");
        assert_eq!(
            r.parse(&json!({"scheme": "sub_n", "n": 2}), "truncation", 4).unwrap().to_json(),
            json!({"scheme": "sub_n", "n": 2})
        );
        let e = r
            .parse(&json!({"scheme": "explicit", "indices": [1, 4]}), "truncation", 4)
            .unwrap_err();
        assert_eq!(e.path, "truncation.indices");
        let e = r.parse(&json!({"scheme": "sub_n", "n": 0}), "truncation", 4).unwrap_err();
        assert_eq!(e.path, "truncation.n");
    }
}
