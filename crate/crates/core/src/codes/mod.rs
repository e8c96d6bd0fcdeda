//! Classical LDPC codes and the hypergraph-product and lifted-product
//! quantum codes built from them.

pub mod classical;
pub mod css;
pub mod lifted;

use thiserror::Error;

use crate::gf2::Gf2Error;

pub use classical::{
    classical_distance, random_biregular_tanner, repetition_code, select_classical_code, spectral_gap,
    ClassicalCode, TannerGraph,
};
pub use css::{
    hgp, hgp_from_matrices, logical_basis, quantum_distance, quantum_distance_upper, CodeStructure, CssCode,
    ProductLayout,
};
pub use lifted::{builtin_lp_code, builtin_lp_codes, circulant, lifted_product, RingMatrix};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("rejection sampling failed after {attempts} attempts")]
    RejectionBudgetExhausted { attempts: usize },
    #[error("exponent {exponent} outside [0, {lift})")]
    ExponentOutOfRange { exponent: usize, lift: usize },
    #[error("lift sizes differ: {0} vs {1}")]
    LiftMismatch(usize, usize),
    #[error("Hx·Hzᵀ ≠ 0")]
    NotOrthogonal,
    #[error("could not pair logical operators")]
    PairingFailure,
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}
