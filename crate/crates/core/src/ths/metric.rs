//! Metric operators, quasi-Hermiticity and re-Hermitization.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::config_space::LinearOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};

/// Relative Hermiticity tolerance of a metric.
pub const METRIC_HERMITICITY: f64 = 1e-12;
/// Smallest admissible `λ_min / λ_max` of a metric.
pub const METRIC_POSITIVITY: f64 = 1e-12;
/// Largest admissible condition number of a map `Ω`.
pub const MAP_CONDITION_LIMIT: f64 = 1e12;
/// Precondition of [`rehermitize`].
pub const REHERMITIZE_PRECONDITION: f64 = 1e-8;

/// Hermitian positive-definite metric `Θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricOperator {
    theta: LinearOperator,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
}

impl MetricOperator {
    /// Validate `theta` as a metric. The matrix must already be Hermitian to
    /// [`METRIC_HERMITICITY`]; it is then symmetrized exactly.
    pub fn new(theta: CMat) -> Result<Self> {
        let scale = linalg::max_abs(&theta);
        let defect = if scale == 0.0 {
            0.0
        } else {
            linalg::max_abs(&(&theta - theta.adjoint())) / scale
        };
        if defect > METRIC_HERMITICITY {
            return Err(Error::InvariantViolation {
                name: "metric_hermiticity".into(),
                magnitude: defect,
            });
        }
        let theta = linalg::hermitian_part(&theta);
        let eig = theta.clone().symmetric_eigenvalues();
        let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(hi > 0.0) || lo <= METRIC_POSITIVITY * hi {
            return Err(Error::IndefiniteMetric {
                ratio: if hi > 0.0 { lo / hi } else { f64::NAN },
            });
        }
        Ok(Self {
            theta: LinearOperator::hermitian(theta)?,
            min_eigenvalue: lo,
            max_eigenvalue: hi,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            theta: LinearOperator::identity(dim),
            min_eigenvalue: 1.0,
            max_eigenvalue: 1.0,
        }
    }

    pub fn operator(&self) -> &LinearOperator {
        &self.theta
    }

    pub fn matrix(&self) -> &CMat {
        self.theta.matrix()
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    pub fn condition_number(&self) -> f64 {
        self.max_eigenvalue / self.min_eigenvalue
    }

    /// `(Θ^{1/2}, Θ^{-1/2})` from the Hermitian eigendecomposition.
    pub fn square_roots(&self) -> (CMat, CMat) {
        let eig = SymmetricEigen::new(self.matrix().clone());
        let v = &eig.eigenvectors;
        let sqrt = CMat::from_diagonal(&eig.eigenvalues.map(|x| c(x.sqrt())));
        let inv_sqrt = CMat::from_diagonal(&eig.eigenvalues.map(|x| c(1.0 / x.sqrt())));
        (v * sqrt * v.adjoint(), v * inv_sqrt * v.adjoint())
    }
}

fn condition_number(m: &CMat) -> f64 {
    let sv = m.clone().singular_values();
    let hi = sv.iter().cloned().fold(0.0, f64::max);
    let lo = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// `Θ = Ω†Ω` for an invertible map `Ω`.
pub fn metric_from_map(omega: &LinearOperator) -> Result<MetricOperator> {
    let condition = condition_number(omega.matrix());
    if !(condition <= MAP_CONDITION_LIMIT) {
        return Err(Error::SingularMap { condition });
    }
    let om = omega.matrix();
    MetricOperator::new(om.adjoint() * om)
}

/// `‖h†Θ − Θh‖_F / (‖h‖_F ‖Θ‖_F)`.
pub fn quasi_hermiticity_defect(h: &LinearOperator, theta: &MetricOperator) -> f64 {
    let (hm, tm) = (h.matrix(), theta.matrix());
    let denom = linalg::frobenius(hm) * linalg::frobenius(tm);
    if denom == 0.0 {
        return 0.0;
    }
    linalg::frobenius(&(hm.adjoint() * tm - tm * hm)) / denom
}

/// `h_S = Θ^{1/2} h Θ^{-1/2}`, Hermitian whenever `h` is quasi-Hermitian
/// under `Θ`.
pub fn rehermitize(h: &LinearOperator, theta: &MetricOperator) -> Result<LinearOperator> {
    if h.dim() != theta.dim() {
        return Err(Error::BasisMismatch("operator and metric dimensions differ".into()));
    }
    let defect = quasi_hermiticity_defect(h, theta);
    if defect > REHERMITIZE_PRECONDITION {
        return Err(Error::NotQuasiHermitian { defect });
    }
    let (sqrt, inv_sqrt) = theta.square_roots();
    Ok(LinearOperator::new(sqrt * h.matrix() * inv_sqrt))
}

/// Hermitian map `Ω_s = exp(S_s)` and metric `Θ_s = exp(2S_s)`.
pub fn hermitian_map(s_h: &LinearOperator) -> Result<(LinearOperator, MetricOperator)> {
    let defect = linalg::hermiticity_defect_max(s_h.matrix());
    if defect > METRIC_HERMITICITY {
        return Err(Error::NotHermitianInput { defect });
    }
    let omega = linalg::hermitian_function(s_h.matrix(), f64::exp);
    let theta = linalg::hermitian_function(s_h.matrix(), |x| (2.0 * x).exp());
    let product = omega.adjoint() * &omega;
    let mismatch = linalg::frobenius(&(&theta - &product)) / linalg::frobenius(&theta);
    if mismatch > 1e-12 {
        return Err(Error::InvariantViolation {
            name: "theta_equals_omega_dagger_omega".into(),
            magnitude: mismatch,
        });
    }
    Ok((LinearOperator::hermitian(linalg::hermitian_part(&omega))?, MetricOperator::new(theta)?))
}

/// Outcome of the `Π = ΩΩ†` symmetry test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiSymmetryReport {
    /// `‖[H, ΩΩ†]‖ / (‖H‖‖ΩΩ†‖)`.
    pub commutator_defect: f64,
    /// Frobenius Hermiticity defect of `ĥ = Ω⁻¹HΩ`.
    pub hermiticity_defect: f64,
    /// Whether the two defects vanish together.
    pub consistent: bool,
}

pub const PI_COMMUTATOR_THRESHOLD: f64 = 1e-10;
pub const PI_HERMITICITY_THRESHOLD: f64 = 1e-8;

/// `‖[H, ΩΩ†]‖_F / (‖H‖_F ‖ΩΩ†‖_F)`.
pub fn pi_symmetry_defect(h: &LinearOperator, omega: &LinearOperator) -> f64 {
    let om = omega.matrix();
    let pi = om * om.adjoint();
    let denom = linalg::frobenius(h.matrix()) * linalg::frobenius(&pi);
    if denom == 0.0 {
        return 0.0;
    }
    linalg::frobenius(&linalg::commutator(h.matrix(), &pi)) / denom
}

pub fn pi_symmetry_report(h: &LinearOperator, omega: &LinearOperator) -> Result<PiSymmetryReport> {
    let om = omega.matrix();
    let condition = condition_number(om);
    if !(condition <= MAP_CONDITION_LIMIT) {
        return Err(Error::SingularMap { condition });
    }
    let inv = om
        .clone()
        .try_inverse()
        .ok_or(Error::SingularMap { condition })?;
    let h_friendly = inv * h.matrix() * om;
    let commutator_defect = pi_symmetry_defect(h, omega);
    let hermiticity_defect = linalg::hermiticity_defect_frobenius(&h_friendly);
    Ok(PiSymmetryReport {
        commutator_defect,
        hermiticity_defect,
        consistent: (commutator_defect <= PI_COMMUTATOR_THRESHOLD)
            == (hermiticity_defect <= PI_HERMITICITY_THRESHOLD),
    })
}

/// Physical Hamiltonian, its friendly image under `Ω` and the metric `Ω†Ω`.
#[derive(Debug, Clone)]
pub struct ThsTriple {
    pub physical: LinearOperator,
    pub friendly: LinearOperator,
    pub theta: MetricOperator,
    pub omega: LinearOperator,
}

impl ThsTriple {
    /// Build the triple for `ĥ = Ω⁻¹HΩ`, `Θ = Ω†Ω`.
    pub fn new(physical: LinearOperator, omega: LinearOperator) -> Result<Self> {
        let theta = metric_from_map(&omega)?;
        let inv = omega
            .matrix()
            .clone()
            .try_inverse()
            .ok_or(Error::SingularMap { condition: f64::INFINITY })?;
        let friendly = LinearOperator::new(inv * physical.matrix() * omega.matrix());
        Self::from_parts(physical, friendly, omega, theta)
    }

    /// Assemble from precomputed parts, checking both defining relations.
    pub fn from_parts(
        physical: LinearOperator,
        friendly: LinearOperator,
        omega: LinearOperator,
        theta: MetricOperator,
    ) -> Result<Self> {
        let om = omega.matrix();
        let lhs = om * friendly.matrix();
        let rhs = physical.matrix() * om;
        let rel = linalg::frobenius(&(&lhs - &rhs)) / linalg::frobenius(&rhs).max(f64::MIN_POSITIVE);
        if rel > 1e-10 {
            return Err(Error::InvariantViolation {
                name: "friendly_similarity".into(),
                magnitude: rel,
            });
        }
        let gram = om.adjoint() * om;
        let rel = linalg::frobenius(&(theta.matrix() - &gram)) / linalg::frobenius(&gram);
        if rel > 1e-12 {
            return Err(Error::InvariantViolation {
                name: "theta_equals_omega_dagger_omega".into(),
                magnitude: rel,
            });
        }
        Ok(Self {
            physical,
            friendly,
            theta,
            omega,
        })
    }

    pub fn quasi_hermiticity_defect(&self) -> f64 {
        quasi_hermiticity_defect(&self.friendly, &self.theta)
    }
}
