//! Comparison of the CCM bra state with the metric built from the ket.

use serde::Serialize;

use crate::ccm::{bra_row, nilpotent_exp, CcmSolution};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::models::ModelInstance;

/// Smallest admissible gap above the ground state.
pub const MIN_GAP: f64 = 1e-6;
/// Contract for the discrepancy.
pub const DICTIONARY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct DictionaryReport {
    /// `‖u − v‖₂`.
    pub discrepancy: f64,
    pub gap: f64,
    /// `⟨Φ|S̃` normalized to unit reference component.
    #[serde(skip)]
    pub bra_row: Vec<C64>,
    /// `⟨Φ|Θ / ⟨Φ|Θ|Φ⟩` with `Θ = e^{S†}e^{S}`.
    #[serde(skip)]
    pub metric_row: Vec<C64>,
}

/// Compare `u = ⟨Φ|S̃/⟨Φ|S̃|Φ⟩` and `v = ⟨Φ|Θ/⟨Φ|Θ|Φ⟩`. Both are the
/// normalized left ground eigenrow of `ĥ` when the ground state is simple.
pub fn ccm_ths_dictionary_check(solution: &CcmSolution, model: &ModelInstance) -> Result<DictionaryReport> {
    if !solution.ket.truncation().is_full() {
        return Err(Error::InvalidTruncation(
            "the dictionary check needs a full-truncation solution".into(),
        ));
    }
    let mut spectrum: Vec<f64> = model.hamiltonian.matrix().clone().symmetric_eigenvalues().iter().copied().collect();
    spectrum.sort_by(f64::total_cmp);
    let gap = if spectrum.len() > 1 { spectrum[1] - spectrum[0] } else { f64::INFINITY };
    if gap <= MIN_GAP {
        return Err(Error::DegenerateGroundState { gap });
    }

    let family = &model.ops;
    let u = bra_row(&solution.bra, family)?;
    let u = &u / u[0];

    let s = solution.cluster_operator(family)?;
    let es = nilpotent_exp(&s)?;
    // ⟨Φ|e^{S†}e^{S} = (e^{S}|Φ⟩)† e^{S}
    let ket = es.column(0).into_owned();
    let v = ket.adjoint() * &es;
    let v = &v / v[0];

    let discrepancy = (&u - &v).norm();
    Ok(DictionaryReport {
        discrepancy,
        gap,
        bra_row: u.iter().copied().collect(),
        metric_row: v.iter().copied().collect(),
    })
}
