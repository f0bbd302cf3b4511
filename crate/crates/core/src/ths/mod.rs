//! Metric operators, quasi-Hermiticity and the left/right eigen-doublet.

mod dictionary;
mod doublet;
mod metric;

pub use dictionary::{ccm_ths_dictionary_check, DictionaryReport, DICTIONARY_TOLERANCE, MIN_GAP};
pub use doublet::{
    doublet_eigensolve, general_eigenvalues, metric_from_spectrum, spectra_match, Doublet,
    BIORTHONORMALITY_TOLERANCE, CONDITION_LIMIT, REAL_SPECTRUM_TOLERANCE, RESIDUAL_TOLERANCE,
};
pub use metric::{
    hermitian_map, metric_from_map, pi_symmetry_defect, pi_symmetry_report, quasi_hermiticity_defect,
    rehermitize, MetricOperator, PiSymmetryReport, ThsTriple, MAP_CONDITION_LIMIT,
    PI_COMMUTATOR_THRESHOLD, PI_HERMITICITY_THRESHOLD, REHERMITIZE_PRECONDITION,
};
