//! Coupled-cluster ket/bra equations and their solution.

mod solver;
mod transform;
mod truncation;

pub use solver::{
    bra_row, expectation, solve, solve_bra, solve_ket, CcmSolution, Damping, IterationRecord, KetSolution,
    SolverOptions, StepKind,
};
pub use transform::{
    assemble_bra, assemble_cluster, energy_functional, inf_norm, ket_jacobian, ket_jacobian_fd, ket_residuals,
    nilpotent_exp, residuals_at, similarity_transform, similarity_transform_counted, transformed_hamiltonian,
    BraAmplitudes, ClusterAmplitudes, Energy, Transformed, SERIES_CUTOFF,
};
pub use truncation::{
    full_truncation, sub_n_truncation, Explicit, Full, SchemeTag, SubN, TruncationParser, TruncationRegistry,
    TruncationScheme, TruncationSet, TruncationSpec,
};
