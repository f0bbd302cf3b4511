//! Cluster operators, the similarity-transformed Hamiltonian and the ket
//! residuals built from it.

use crate::config_space::{LinearOperator, OperatorFamily};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, C64, ZERO};

use super::truncation::TruncationSet;

/// Ket amplitudes `𝒮_ȷ`, aligned with the truncation order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAmplitudes {
    truncation: TruncationSet,
    values: Vec<C64>,
}

/// Bra amplitudes `𝒮̃_ȷ`, aligned with the truncation order.
#[derive(Debug, Clone, PartialEq)]
pub struct BraAmplitudes {
    truncation: TruncationSet,
    values: Vec<C64>,
}

macro_rules! amplitude_impl {
    ($t:ident) => {
        impl $t {
            pub fn new(truncation: TruncationSet, values: Vec<C64>) -> Result<Self> {
                if values.len() != truncation.len() {
                    return Err(Error::BasisMismatch(format!(
                        "{} amplitudes for a truncation of size {}",
                        values.len(),
                        truncation.len()
                    )));
                }
                Ok(Self { truncation, values })
            }

            pub fn zeros(truncation: TruncationSet) -> Self {
                let values = vec![ZERO; truncation.len()];
                Self { truncation, values }
            }

            pub fn truncation(&self) -> &TruncationSet {
                &self.truncation
            }

            pub fn values(&self) -> &[C64] {
                &self.values
            }

            pub fn get(&self, ordinal: usize) -> Option<C64> {
                self.truncation.position(ordinal).map(|k| self.values[k])
            }

            /// `(ordinal, amplitude)` pairs in truncation order.
            pub fn iter(&self) -> impl Iterator<Item = (usize, C64)> + '_ {
                self.truncation.indices().iter().copied().zip(self.values.iter().copied())
            }

            pub fn max_imag(&self) -> f64 {
                self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
            }
        }
    };
}

amplitude_impl!(ClusterAmplitudes);
amplitude_impl!(BraAmplitudes);

fn check_family(truncation: &TruncationSet, family: &OperatorFamily) -> Result<()> {
    if truncation.basis_dimension() != family.dimension() {
        return Err(Error::BasisMismatch(format!(
            "truncation drawn from a basis of size {} used with a family of size {}",
            truncation.basis_dimension(),
            family.dimension()
        )));
    }
    Ok(())
}

/// `S = Σ_{ȷ∈T} 𝒮_ȷ C_ȷ⁺`.
pub fn assemble_cluster(amps: &ClusterAmplitudes, family: &OperatorFamily) -> Result<LinearOperator> {
    check_family(amps.truncation(), family)?;
    let d = family.dimension();
    let mut s = CMat::zeros(d, d);
    for (j, v) in amps.iter() {
        family.creation_sparse(j).add_scaled_to(v, &mut s);
    }
    Ok(LinearOperator::new(s))
}

/// `S̃ = I + Σ_{ȷ∈T} 𝒮̃_ȷ C_ȷ⁻`.
pub fn assemble_bra(amps: &BraAmplitudes, family: &OperatorFamily) -> Result<LinearOperator> {
    check_family(amps.truncation(), family)?;
    let d = family.dimension();
    let mut s = CMat::identity(d, d);
    for (j, v) in amps.iter() {
        family.annihilation_sparse(j).add_scaled_to(v, &mut s);
    }
    Ok(LinearOperator::new(s))
}

/// Result of the nested-commutator expansion.
#[derive(Debug, Clone)]
pub struct Transformed {
    pub h: LinearOperator,
    /// Number of nonzero terms summed (the `k = 0` term included).
    pub terms: usize,
}

/// Relative size below which a nested commutator counts as vanished.
pub const SERIES_CUTOFF: f64 = 1e-15;

/// `ĥ = e⁻ˢ H eˢ = Σ_k (1/k!) [...[[H,S],S]...,S]`, summed until the nested
/// commutator vanishes. Fails after `2D` terms.
pub fn similarity_transform(h: &LinearOperator, s: &LinearOperator) -> Result<LinearOperator> {
    similarity_transform_counted(h, s).map(|t| t.h)
}

pub fn similarity_transform_counted(h: &LinearOperator, s: &LinearOperator) -> Result<Transformed> {
    if h.dim() != s.dim() {
        return Err(Error::BasisMismatch(format!(
            "H has dimension {}, S has dimension {}",
            h.dim(),
            s.dim()
        )));
    }
    let d = h.dim();
    let (hm, sm) = (h.matrix(), s.matrix());
    let scale = linalg::frobenius(hm);
    let cutoff = SERIES_CUTOFF * scale;
    let mut total = hm.clone();
    let mut nested = hm.clone();
    let mut terms = 1;
    let max_terms = 2 * d.max(1);
    loop {
        nested = linalg::commutator(&nested, sm);
        let norm = linalg::frobenius(&nested);
        if norm <= cutoff {
            break;
        }
        if terms >= max_terms {
            return Err(Error::NonTerminatingSeries {
                terms,
                last_norm: norm,
            });
        }
        nested /= c(terms as f64);
        total += &nested;
        terms += 1;
    }
    Ok(Transformed {
        h: LinearOperator::new(total),
        terms,
    })
}

/// `⟨Φ|ĥ|Φ⟩` split into the reported real energy and the imaginary diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub value: f64,
    pub imaginary: f64,
}

impl Energy {
    /// Whether the imaginary part is within `10⁻¹⁰·|E|`.
    pub fn is_real(&self) -> bool {
        self.imaginary.abs() <= 1e-10 * self.value.abs().max(f64::MIN_POSITIVE)
    }
}

pub fn energy_functional(h_sim: &LinearOperator) -> Energy {
    let e = h_sim.matrix()[(0, 0)];
    Energy {
        value: e.re,
        imaginary: e.im,
    }
}

/// `⟨Φ|C_ȷ⁻` as a column vector (conjugated bra).
fn reference_image(family: &OperatorFamily, j: usize) -> CVec {
    family.creation_sparse(j).apply(&linalg::unit_vector(family.dimension(), 0))
}

/// `r_ȷ = ⟨Φ|C_ȷ⁻ ĥ|Φ⟩` for `ȷ ∈ T`, in `T`'s order.
pub fn ket_residuals(
    h_sim: &LinearOperator,
    truncation: &TruncationSet,
    family: &OperatorFamily,
) -> Result<Vec<C64>> {
    check_family(truncation, family)?;
    h_sim.check_basis(family.basis())?;
    let column = h_sim.matrix().column(0).into_owned();
    Ok(truncation
        .indices()
        .iter()
        .map(|&j| reference_image(family, j).dotc(&column))
        .collect())
}

/// `∂r_ȷ/∂𝒮_J = ⟨Φ|C_ȷ⁻ [ĥ, C_J⁺]|Φ⟩`.
///
/// `∂ĥ/∂𝒮_J = e⁻ˢ[H, C_J⁺]eˢ`, and because `C_J⁺` commutes with `S` this is
/// `[ĥ, C_J⁺]`.
pub fn ket_jacobian(
    h_sim: &LinearOperator,
    truncation: &TruncationSet,
    family: &OperatorFamily,
) -> Result<CMat> {
    check_family(truncation, family)?;
    let d = family.dimension();
    let hm = h_sim.matrix();
    let phi = linalg::unit_vector(d, 0);
    let h_phi = hm.column(0).into_owned();
    let rows: Vec<CVec> = truncation.indices().iter().map(|&j| reference_image(family, j)).collect();
    let n = truncation.len();
    let mut jac = CMat::zeros(n, n);
    for (b, &big) in truncation.indices().iter().enumerate() {
        let cj = family.creation_sparse(big);
        // [ĥ, C⁺]|Φ⟩ = ĥ C⁺|Φ⟩ − C⁺ ĥ|Φ⟩
        let col = hm * cj.apply(&phi) - cj.apply(&h_phi);
        for (a, row) in rows.iter().enumerate() {
            jac[(a, b)] = row.dotc(&col);
        }
    }
    Ok(jac)
}

/// Central finite-difference Jacobian of the ket residuals with respect to
/// the amplitudes, each derivative taken along the real axis.
pub fn ket_jacobian_fd(
    hamiltonian: &LinearOperator,
    amps: &ClusterAmplitudes,
    family: &OperatorFamily,
    step: f64,
) -> Result<CMat> {
    let t = amps.truncation();
    let n = t.len();
    let mut jac = CMat::zeros(n, n);
    for b in 0..n {
        let mut plus = amps.values().to_vec();
        let mut minus = amps.values().to_vec();
        plus[b] += c(step);
        minus[b] -= c(step);
        let rp = residuals_at(hamiltonian, &ClusterAmplitudes::new(t.clone(), plus)?, family)?;
        let rm = residuals_at(hamiltonian, &ClusterAmplitudes::new(t.clone(), minus)?, family)?;
        for a in 0..n {
            jac[(a, b)] = (rp[a] - rm[a]) / c(2.0 * step);
        }
    }
    Ok(jac)
}

/// Build `ĥ` for the given amplitudes.
pub fn transformed_hamiltonian(
    hamiltonian: &LinearOperator,
    amps: &ClusterAmplitudes,
    family: &OperatorFamily,
) -> Result<LinearOperator> {
    let s = assemble_cluster(amps, family)?;
    similarity_transform(hamiltonian, &s)
}

pub fn residuals_at(
    hamiltonian: &LinearOperator,
    amps: &ClusterAmplitudes,
    family: &OperatorFamily,
) -> Result<Vec<C64>> {
    let h = transformed_hamiltonian(hamiltonian, amps, family)?;
    ket_residuals(&h, amps.truncation(), family)
}

/// `eˢ` for a nilpotent `S` by its terminating power series.
pub fn nilpotent_exp(s: &LinearOperator) -> Result<CMat> {
    let d = s.dim();
    let sm = s.matrix();
    let mut total = CMat::identity(d, d);
    let mut term = CMat::identity(d, d);
    for k in 1..=d {
        term = &term * sm / c(k as f64);
        if linalg::max_abs(&term) == 0.0 {
            return Ok(total);
        }
        total += &term;
    }
    if linalg::max_abs(&(&term * sm)) != 0.0 {
        return Err(Error::NonTerminatingSeries {
            terms: d + 1,
            last_norm: linalg::frobenius(&term),
        });
    }
    Ok(total)
}

pub fn inf_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccm::truncation::full_truncation;
    use crate::linalg::ONE;
    use crate::models::ModelSpec;

    #[test]
    fn zero_amplitudes_give_zero_cluster_and_identity_bra() {
        let m = ModelSpec::oscillator(0.1, 5).unwrap().build().unwrap();
        let t = full_truncation(&m.basis).unwrap();
        let s = assemble_cluster(&ClusterAmplitudes::zeros(t.clone()), &m.ops).unwrap();
        assert_eq!(linalg::max_abs(s.matrix()), 0.0);
        let sb = assemble_bra(&BraAmplitudes::zeros(t), &m.ops).unwrap();
        assert_eq!(sb.matrix(), &CMat::identity(5, 5));
    }

    #[test]
    fn single_amplitude_scales_first_creator() {
        let m = ModelSpec::oscillator(0.0, 3).unwrap().build().unwrap();
        let t = crate::ccm::truncation::sub_n_truncation(&m.basis, 1).unwrap();
        let amps = ClusterAmplitudes::new(t, vec![c(0.3)]).unwrap();
        let s = assemble_cluster(&amps, &m.ops).unwrap();
        assert_eq!(s.matrix(), &(m.ops.creation(1).into_matrix() * c(0.3)));
    }

    #[test]
    fn zero_cluster_leaves_hamiltonian_unchanged() {
        let m = ModelSpec::spin_chain(3, 0.4, 1.0).unwrap().build().unwrap();
        let s = LinearOperator::zeros(8);
        let t = similarity_transform_counted(&m.hamiltonian, &s).unwrap();
        assert_eq!(t.h.matrix(), m.hamiltonian.matrix());
        assert_eq!(t.terms, 1);
    }

    #[test]
    fn mismatched_family_is_rejected() {
        let a = ModelSpec::oscillator(0.0, 4).unwrap().build().unwrap();
        let b = ModelSpec::oscillator(0.0, 5).unwrap().build().unwrap();
        let t = full_truncation(&a.basis).unwrap();
        assert!(matches!(
            assemble_cluster(&ClusterAmplitudes::zeros(t.clone()), &b.ops),
            Err(Error::BasisMismatch(_))
        ));
        assert!(matches!(
            ket_residuals(&b.hamiltonian, &t, &b.ops),
            Err(Error::BasisMismatch(_))
        ));
        assert!(ClusterAmplitudes::new(t, vec![ONE]).is_err());
    }

    #[test]
    fn non_nilpotent_non_commuting_cluster_does_not_terminate() {
        let m = ModelSpec::spin_chain(2, 0.4, 1.0).unwrap().build().unwrap();
        let mut s = m.ops.creation(1).into_matrix();
        s += m.ops.annihilation(1).into_matrix();
        let err = similarity_transform(&m.hamiltonian, &LinearOperator::new(s * c(3.0))).unwrap_err();
        assert!(matches!(err, Error::NonTerminatingSeries { .. }));
    }
}
