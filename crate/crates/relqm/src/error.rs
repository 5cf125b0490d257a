//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by state construction, probability rules, decompositions,
/// evolution and the path-integral backend.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found} ({context})")]
    DimensionMismatch {
        expected: String,
        found: String,
        context: &'static str,
    },

    #[error("matrix is all zero; no normalization possible")]
    ZeroMatrix,

    #[error("non-finite entry (NaN or infinity) in {0}")]
    NonFinite(&'static str),

    #[error("normalization impossible: {context} norm is {norm}")]
    NotNormalizable { norm: f64, context: &'static str },

    #[error("index {index} out of bounds for dimension {bound}")]
    IndexOutOfBounds { index: usize, bound: usize },

    #[error(
        "entangled state: entropy {entropy} exceeds tolerance {tol}; wave-function form undefined"
    )]
    EntangledState { entropy: f64, tol: f64 },

    #[error("matrix is not a product matrix: singular-value ratio sigma2/sigma1 = {ratio}")]
    NotProduct { ratio: f64 },

    #[error("matrix is not Hermitian: max deviation {deviation}")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary: max deviation of U\u{2020}U from identity is {deviation}")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not a projector: max deviation of P\u{00b2} from P is {deviation}")]
    NotProjector { deviation: f64 },

    #[error("outcome set invalid: {0}")]
    InvalidOutcome(&'static str),

    #[error("vector is not normalized: norm {norm}")]
    NotNormalized { norm: f64 },

    #[error("operators carry different hbar values: {a} vs {b}")]
    HbarMismatch { a: f64, b: f64 },

    #[error("norm mode {found} not accepted here: expected {expected}")]
    InvalidNormMode {
        expected: &'static str,
        found: &'static str,
    },

    #[error("invalid lattice: {0}")]
    InvalidLattice(&'static str),

    #[error("invalid action: {0}")]
    InvalidAction(&'static str),

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(&'static str),

    #[error("expected real value, found imaginary residue {imag}")]
    NotReal { imag: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
