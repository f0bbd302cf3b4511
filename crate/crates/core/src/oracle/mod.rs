//! Independent reference implementations used to cross-check the main path.
//!
//! Nothing here calls the main-path transform or eigen routines, so agreement
//! between the two is evidence rather than tautology.

mod eigen;
mod expm;

pub use eigen::{general_eigensystem, jacobi_hermitian, qr_eigenvalues, Eigensystem, RESIDUAL_CONTRACT};
pub use expm::dense_exp;

use crate::ccm::CcmSolution;
use crate::config_space::LinearOperator;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::models::ModelInstance;

/// Full eigensystem; the Jacobi path is taken for (verified) Hermitian input.
pub fn exact_eigensystem(h: &LinearOperator) -> Result<Eigensystem> {
    let m = h.matrix();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let hermitian = (0..m.nrows())
        .all(|i| (0..m.ncols()).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE)));
    if hermitian {
        jacobi_hermitian(m)
    } else {
        general_eigensystem(m)
    }
}

/// Ground-state energy of the model Hamiltonian.
pub fn exact_ground_energy(model: &ModelInstance) -> Result<f64> {
    Ok(exact_eigensystem(&model.hamiltonian)?.eigenvalues[0].re)
}

/// `e^{-S} H e^{S}` with series exponentials.
pub fn dense_exp_transform(h: &LinearOperator, s: &LinearOperator) -> LinearOperator {
    let minus: CMat = -s.matrix();
    LinearOperator::new(dense_exp(&minus) * h.matrix() * dense_exp(s.matrix()))
}

/// Overlaps below this count as a reference orthogonal to the ground state.
pub const MIN_REFERENCE_OVERLAP: f64 = 1e-8;

/// `‖e^{S}|Φ⟩ − Ψ₀/⟨Φ|Ψ₀⟩‖` for a full-truncation solution.
pub fn ground_vector_match(solution: &CcmSolution, model: &ModelInstance) -> Result<f64> {
    if !solution.ket.truncation().is_full() {
        return Err(Error::InvalidTruncation("ground-vector match needs a full truncation".into()));
    }
    let sys = exact_eigensystem(&model.hamiltonian)?;
    let psi = sys.vectors.column(0).into_owned();
    let overlap = psi[0];
    if overlap.norm() < MIN_REFERENCE_OVERLAP {
        return Err(Error::OrthogonalReference {
            overlap: overlap.norm(),
        });
    }
    let psi = psi / overlap;
    let s = solution.cluster_operator(&model.ops)?;
    let ket = dense_exp(s.matrix()).column(0).into_owned();
    Ok((ket - psi).norm())
}

/// Errors `|E_n − E_exact|` for a list of energies.
pub fn energy_errors(energies: &[f64], exact: f64) -> Vec<f64> {
    energies.iter().map(|e| (e - exact).abs()).collect()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::models::ModelSpec;

    #[test]
    fn harmonic_oscillator_levels() {
        let m = ModelSpec::oscillator(0.0, 20).unwrap().build().unwrap();
        let sys = exact_eigensystem(&m.hamiltonian).unwrap();
        for (k, e) in sys.real_eigenvalues().iter().take(3).enumerate() {
            assert_eq!(*e, (2 * k + 1) as f64);
        }
    }

    #[test]
    fn scalar_cluster_cancels() {
        let m = ModelSpec::oscillator(0.1, 6).unwrap().build().unwrap();
        let s = LinearOperator::new(CMat::identity(6, 6) * C64::new(0.7, 0.0));
        let t = dense_exp_transform(&m.hamiltonian, &s);
        let diff = (t.matrix() - m.hamiltonian.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }
}
