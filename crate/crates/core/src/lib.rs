//! Coupled-cluster ground states of small model Hamiltonians, with tools for
//! the metric operator that makes the similarity-transformed Hamiltonian
//! quasi-Hermitian.

// Negated float comparisons are used deliberately so that NaN fails checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ccm;
pub mod cli;
pub mod config_space;
pub mod error;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod ths;

pub use error::{Error, Result, SchemaError};
