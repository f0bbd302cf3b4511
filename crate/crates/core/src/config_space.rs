//! Configuration basis, reference state and the commuting family of
//! multi-configurational creation/annihilation operators.
//!
//! Every basis used here is a standard unit-vector basis: configuration
//! ordinal `j` is the `j`-th unit vector, and ordinal 0 is the reference
//! state |Φ⟩. A creation operator `C_j⁺` maps |Φ⟩ onto configuration `j`;
//! its adjoint `C_j⁻` is the matching annihilation operator.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, SparseOp, ONE};

/// Tolerance on every algebraic property of an operator family.
pub const FAMILY_TOLERANCE: f64 = 1e-12;

/// Relative tolerance used for the `hermitian_hint` check.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Structured label of a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigLabel {
    /// Number of oscillator quanta above the reference.
    Quanta(usize),
    /// Sites flipped relative to the reference spin configuration.
    Flips(Vec<usize>),
    /// Configuration of a tensor-product system.
    Product(Box<ConfigLabel>, Box<ConfigLabel>),
}

impl fmt::Display for ConfigLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigLabel::Quanta(n) => write!(f, "n{n}"),
            ConfigLabel::Flips(sites) => {
                write!(f, "{{")?;
                for (k, s) in sites.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, "}}")
            }
            ConfigLabel::Product(a, b) => write!(f, "{a}x{b}"),
        }
    }
}

/// Multi-index `ȷ` of one many-particle configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MultiIndex {
    pub ordinal: usize,
    pub label: ConfigLabel,
}

/// Finite orthonormal configuration space with its reference state.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigurationBasis {
    configs: Vec<MultiIndex>,
    levels: Vec<usize>,
}

impl ConfigurationBasis {
    /// Build a basis from `(label, excitation level)` pairs in ordinal order.
    /// The first entry is the reference configuration.
    pub fn new(entries: Vec<(ConfigLabel, usize)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidSpec("empty configuration basis".into()));
        }
        let mut seen = HashSet::new();
        let mut configs = Vec::with_capacity(entries.len());
        let mut levels = Vec::with_capacity(entries.len());
        for (ordinal, (label, level)) in entries.into_iter().enumerate() {
            if ordinal == 0 && level != 0 {
                return Err(Error::InvalidSpec(
                    "reference configuration must have excitation level 0".into(),
                ));
            }
            if ordinal > 0 && level == 0 {
                return Err(Error::InvalidSpec(format!(
                    "configuration {label} (ordinal {ordinal}) has excitation level 0"
                )));
            }
            if !seen.insert(label.clone()) {
                return Err(Error::InvalidSpec(format!("duplicate label {label}")));
            }
            configs.push(MultiIndex { ordinal, label });
            levels.push(level);
        }
        Ok(Self { configs, levels })
    }

    pub fn dimension(&self) -> usize {
        self.configs.len()
    }

    pub fn configs(&self) -> &[MultiIndex] {
        &self.configs
    }

    pub fn reference(&self) -> &MultiIndex {
        &self.configs[0]
    }

    pub fn label(&self, ordinal: usize) -> &ConfigLabel {
        &self.configs[ordinal].label
    }

    pub fn excitation_level(&self, ordinal: usize) -> usize {
        self.levels[ordinal]
    }

    pub fn max_level(&self) -> usize {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    /// Excited ordinals `1..D`.
    pub fn excited(&self) -> impl Iterator<Item = usize> + '_ {
        1..self.dimension()
    }
}

/// Dense complex operator on a configuration space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    matrix: CMat,
    hermitian_hint: bool,
}

impl LinearOperator {
    pub fn new(matrix: CMat) -> Self {
        assert!(matrix.is_square(), "operators must be square");
        Self {
            matrix,
            hermitian_hint: false,
        }
    }

    /// Wrap a matrix asserted to be Hermitian; the claim is verified.
    pub fn hermitian(matrix: CMat) -> Result<Self> {
        let defect = linalg::hermiticity_defect_max(&matrix);
        if defect > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitianInput { defect });
        }
        Ok(Self {
            matrix,
            hermitian_hint: true,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMat::identity(dim, dim),
            hermitian_hint: true,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: CMat::zeros(dim, dim),
            hermitian_hint: true,
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect_max(&self.matrix)
    }

    pub fn check_basis(&self, basis: &ConfigurationBasis) -> Result<()> {
        if self.dim() != basis.dimension() {
            return Err(Error::BasisMismatch(format!(
                "operator dimension {} vs basis dimension {}",
                self.dim(),
                basis.dimension()
            )));
        }
        Ok(())
    }
}

/// Conjugate transpose; the Hermiticity flag is carried over.
pub fn adjoint(op: &LinearOperator) -> LinearOperator {
    LinearOperator {
        matrix: op.matrix.adjoint(),
        hermitian_hint: op.hermitian_hint,
    }
}

/// How a model composes its creation operators from elementary raisers.
pub trait CompositionRule {
    /// Creation operator `C_j⁺` for the excited ordinal `j`.
    fn creation(&self, basis: &ConfigurationBasis, ordinal: usize) -> SparseOp;
}

/// Measured defect of each family axiom (entrywise max norm).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FamilyDefects {
    /// `max_j ‖C_j⁺|Φ⟩ − |j⟩‖`
    pub creation_action: f64,
    /// `max_j max(‖C_j⁻|Φ⟩‖, ‖⟨Φ|C_j⁺‖)`
    pub reference_annihilation: f64,
    /// `max_{j,k} max(‖[C_j⁺, C_k⁺]‖, ‖[C_j⁻, C_k⁻]‖)`, each scaled by
    /// `max(1, ‖C_j C_k‖)` since bosonic products carry binomial weights.
    pub commutation: f64,
    /// `‖Σ_j C_j⁺|Φ⟩⟨Φ|C_j⁻ − I‖`
    pub completeness: f64,
}

impl FamilyDefects {
    pub fn worst(&self) -> (&'static str, f64) {
        [
            ("creation_action", self.creation_action),
            ("reference_annihilation", self.reference_annihilation),
            ("commutation", self.commutation),
            ("completeness", self.completeness),
        ]
        .into_iter()
        .fold(("", 0.0), |acc, x| if x.1 > acc.1 { x } else { acc })
    }
}

/// The commuting creation operators `C_j⁺` (and their adjoints) over a basis.
#[derive(Debug, Clone)]
pub struct OperatorFamily {
    basis: Arc<ConfigurationBasis>,
    creation: Vec<SparseOp>,
    annihilation: Vec<SparseOp>,
    defects: FamilyDefects,
}

impl OperatorFamily {
    pub fn basis(&self) -> &ConfigurationBasis {
        &self.basis
    }

    pub fn basis_arc(&self) -> Arc<ConfigurationBasis> {
        Arc::clone(&self.basis)
    }

    pub fn dimension(&self) -> usize {
        self.basis.dimension()
    }

    /// Sparse `C_j⁺` for `j ≥ 1`.
    pub fn creation_sparse(&self, ordinal: usize) -> &SparseOp {
        &self.creation[ordinal - 1]
    }

    /// Sparse `C_j⁻` for `j ≥ 1`.
    pub fn annihilation_sparse(&self, ordinal: usize) -> &SparseOp {
        &self.annihilation[ordinal - 1]
    }

    pub fn creation(&self, ordinal: usize) -> LinearOperator {
        LinearOperator::new(self.creation_sparse(ordinal).to_dense())
    }

    pub fn annihilation(&self, ordinal: usize) -> LinearOperator {
        LinearOperator::new(self.annihilation_sparse(ordinal).to_dense())
    }

    pub fn defects(&self) -> FamilyDefects {
        self.defects
    }

    /// Recompute all four axiom defects.
    pub fn measure_defects(&self) -> FamilyDefects {
        let dim = self.dimension();
        let mut d = FamilyDefects::default();

        for j in 1..dim {
            let cp = self.creation_sparse(j);
            let cm = self.annihilation_sparse(j);
            let image = cp.apply(&linalg::unit_vector(dim, 0));
            let target = linalg::unit_vector(dim, j);
            d.creation_action = d.creation_action.max((image - target).camax());
            let killed = cm.apply(&linalg::unit_vector(dim, 0)).camax();
            let row0 = cp
                .entries
                .iter()
                .filter(|e| e.0 == 0)
                .map(|e| e.2.norm())
                .fold(0.0, f64::max);
            d.reference_annihilation = d.reference_annihilation.max(killed).max(row0);
        }

        for j in 1..dim {
            for k in (j + 1)..dim {
                let (a, b) = (self.creation_sparse(j), self.creation_sparse(k));
                let ab = a.matmul(b);
                let plus = ab.max_abs_diff(&b.matmul(a)) / ab.max_abs().max(1.0);
                let (a, b) = (self.annihilation_sparse(j), self.annihilation_sparse(k));
                let ab = a.matmul(b);
                let minus = ab.max_abs_diff(&b.matmul(a)) / ab.max_abs().max(1.0);
                d.commutation = d.commutation.max(plus).max(minus);
            }
        }

        // Σ_j C_j⁺|Φ⟩⟨Φ|C_j⁻, including the j = 0 identity term.
        let mut sum = CMat::zeros(dim, dim);
        sum[(0, 0)] += ONE;
        for j in 1..dim {
            let ket = self.creation_sparse(j).apply(&linalg::unit_vector(dim, 0));
            sum += &ket * ket.adjoint();
        }
        d.completeness = linalg::max_abs(&(sum - CMat::identity(dim, dim)));
        d
    }
}

/// Build the family of creation operators for `basis` from `rule` and check
/// every axiom (creation action, reference annihilation, commutation,
/// completeness) at [`FAMILY_TOLERANCE`].
pub fn build_operator_family(
    basis: Arc<ConfigurationBasis>,
    rule: &dyn CompositionRule,
) -> Result<OperatorFamily> {
    let creation: Vec<SparseOp> = basis.excited().map(|j| rule.creation(&basis, j)).collect();
    for (k, op) in creation.iter().enumerate() {
        if op.dim != basis.dimension() {
            return Err(Error::BasisMismatch(format!(
                "creation operator {} has dimension {}",
                k + 1,
                op.dim
            )));
        }
    }
    let annihilation = creation.iter().map(SparseOp::adjoint).collect();
    let mut family = OperatorFamily {
        basis,
        creation,
        annihilation,
        defects: FamilyDefects::default(),
    };
    family.defects = family.measure_defects();
    let (name, magnitude) = family.defects.worst();
    if magnitude > FAMILY_TOLERANCE {
        return Err(Error::InvariantViolation {
            name: name.to_string(),
            magnitude,
        });
    }
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    struct ShiftRule;

    impl CompositionRule for ShiftRule {
        // Non-commuting choice: C_j⁺ = |j⟩⟨0| + |j+1⟩⟨1| ...
        fn creation(&self, basis: &ConfigurationBasis, j: usize) -> SparseOp {
            let d = basis.dimension();
            SparseOp::new(d, (0..d - j).map(|i| (i + j, i, c(1.0))).chain([(1, 2, c(1.0))]).collect())
        }
    }

    fn quanta_basis(d: usize) -> Arc<ConfigurationBasis> {
        Arc::new(ConfigurationBasis::new((0..d).map(|n| (ConfigLabel::Quanta(n), n)).collect()).unwrap())
    }

    #[test]
    fn basis_rejects_bad_levels_and_duplicates() {
        assert!(ConfigurationBasis::new(vec![(ConfigLabel::Quanta(0), 1)]).is_err());
        assert!(ConfigurationBasis::new(vec![
            (ConfigLabel::Quanta(0), 0),
            (ConfigLabel::Quanta(1), 0)
        ])
        .is_err());
        assert!(ConfigurationBasis::new(vec![
            (ConfigLabel::Quanta(0), 0),
            (ConfigLabel::Quanta(0), 1)
        ])
        .is_err());
        assert!(ConfigurationBasis::new(vec![]).is_err());
    }

    #[test]
    fn broken_rule_is_reported() {
        let err = build_operator_family(quanta_basis(4), &ShiftRule).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation { .. }), "{err}");
    }

    #[test]
    fn hermitian_wrapper_verifies() {
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = c(0.5);
        assert!(matches!(
            LinearOperator::hermitian(m.clone()),
            Err(Error::NotHermitianInput { .. })
        ));
        m[(1, 0)] = c(0.5);
        assert!(LinearOperator::hermitian(m).unwrap().hermitian_hint());
    }

    #[test]
    fn adjoint_of_symmetric_is_itself() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(-3.0)]);
        let op = LinearOperator::hermitian(m).unwrap();
        assert_eq!(adjoint(&op), op);
    }

    #[test]
    fn labels_display() {
        let l = ConfigLabel::Product(
            Box::new(ConfigLabel::Quanta(2)),
            Box::new(ConfigLabel::Flips(vec![0, 3])),
        );
        assert_eq!(l.to_string(), "n2x{0,3}");
    }
}
