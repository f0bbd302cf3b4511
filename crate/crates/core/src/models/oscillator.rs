//! Anharmonic oscillator `−d²/dx² + x² + λx⁴` in the truncated ladder basis.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Value};

use super::{parse_params, ModelBuilder, ModelInstance, ModelRegistry, ModelSpec};
use crate::config_space::{
    build_operator_family, CompositionRule, ConfigLabel, ConfigurationBasis, LinearOperator,
};
use crate::error::{Error, Result, SchemaError};
use crate::linalg::{c, hermitian_part, CMat, CVec, SparseOp};

#[derive(Debug, Clone, PartialEq)]
pub struct Oscillator {
    pub lambda: f64,
    pub dim: usize,
}

impl Oscillator {
    pub fn new(lambda: f64, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSpec(format!("oscillator basis size {dim} < 2")));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidSpec(format!("quartic coupling {lambda} must be ≥ 0")));
        }
        Ok(Self { lambda, dim })
    }
}

/// Truncated annihilation operator `a` (superdiagonal `√n`).
pub fn lowering(dim: usize) -> CMat {
    let mut a = CMat::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = c((n as f64).sqrt());
    }
    a
}

/// Truncated position operator `x = (a + a†)/√2`.
pub fn position(dim: usize) -> CMat {
    let a = lowering(dim);
    (&a + a.adjoint()) * c(std::f64::consts::FRAC_1_SQRT_2)
}

/// `ln k!` for `k = 0..=n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// `C_j⁺ = (a†)^j / √(j!)`, truncated to the basis.
struct BosonicLadder {
    ln_fact: Vec<f64>,
}

impl CompositionRule for BosonicLadder {
    fn creation(&self, basis: &ConfigurationBasis, j: usize) -> SparseOp {
        let d = basis.dimension();
        // ⟨n+j|(a†)^j|n⟩ / √(j!) = √(binom(n+j, j))
        let entries = (0..d - j)
            .map(|n| {
                let ln = self.ln_fact[n + j] - self.ln_fact[n] - self.ln_fact[j];
                let w = if n == 0 { 1.0 } else { (0.5 * ln).exp() };
                (n + j, n, c(w))
            })
            .collect();
        SparseOp::new(d, entries)
    }
}

impl ModelBuilder for Oscillator {
    fn kind(&self) -> &'static str {
        "oscillator"
    }

    fn dimension(&self) -> usize {
        self.dim
    }

    fn build(&self) -> Result<ModelInstance> {
        let d = self.dim;
        let basis = Arc::new(ConfigurationBasis::new(
            (0..d).map(|n| (ConfigLabel::Quanta(n), n)).collect(),
        )?);
        let family = build_operator_family(
            Arc::clone(&basis),
            &BosonicLadder {
                ln_fact: ln_factorials(d),
            },
        )?;

        // −d²/dx² + x² = 2a†a + 1 holds exactly level by level.
        let mut h = CMat::from_diagonal(&CVec::from_iterator(d, (0..d).map(|n| c(2.0 * n as f64 + 1.0))));
        let x = position(d);
        let x2 = &x * &x;
        if self.lambda != 0.0 {
            h += (&x2 * &x2) * c(self.lambda);
        }
        let h = hermitian_part(&h);

        let mut observables = BTreeMap::new();
        observables.insert("x".to_string(), LinearOperator::hermitian(x)?);
        observables.insert("x2".to_string(), LinearOperator::hermitian(hermitian_part(&x2))?);
        ModelInstance::new(self.describe(), LinearOperator::hermitian(h)?, family, observables)
    }

    fn to_json(&self) -> Value {
        json!({"kind": "oscillator", "lambda": self.lambda, "dim": self.dim})
    }

    fn describe(&self) -> String {
        format!("oscillator(lambda={}, D={})", self.lambda, self.dim)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    lambda: f64,
    dim: usize,
}

pub(super) fn parse(params: &Value, path: &str, _: &ModelRegistry) -> Result<ModelSpec, SchemaError> {
    let p: Params = parse_params(params, path)?;
    if !(p.lambda >= 0.0) || !p.lambda.is_finite() {
        return Err(SchemaError::new(format!("{path}.lambda"), "quartic coupling must be ≥ 0"));
    }
    if p.dim < 2 {
        return Err(SchemaError::new(format!("{path}.dim"), "basis size must be ≥ 2"));
    }
    Ok(ModelSpec::new(Oscillator {
        lambda: p.lambda,
        dim: p.dim,
    }))
}
