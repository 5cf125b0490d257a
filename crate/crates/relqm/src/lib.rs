//! Numerical toolkit for quantum mechanics built on relational probability
//! amplitudes.
//!
//! The fundamental state object is the [`relcore::RelationalMatrix`], an N×M
//! complex matrix of amplitudes between system and apparatus events.
//! Everything else is derived from it:
//!
//! - [`relcore`] — the matrix itself plus wave function, composite state and
//!   reduced / coherent density matrices;
//! - [`prob`] — weight-summation probability rules for unentangled,
//!   superposed, entangled, joint, apparatus-side, transition and
//!   projection queries;
//! - [`entangle`] — von Neumann entropy, Schmidt decomposition, product-matrix
//!   test and the time-evolution vs quantum-operation classifier;
//! - [`dynamics`] — operator application and three equivalent evolution
//!   pictures (relational, density, wave-function), with spectral matrix
//!   exponentials;
//! - [`pathint`] — a discretized 1D path-integral backend producing kernels,
//!   relational matrices from double path sums, influence functionals and
//!   path-sum reduced density matrices.
//!
//! All types are immutable values after construction and all operations are
//! pure functions, so values can be shared or sent across threads freely.

pub mod dynamics;
pub mod entangle;
pub mod error;
mod linalg;
pub mod pathint;
pub mod prob;
pub mod relcore;

/// Complex amplitude scalar used throughout.
pub type C64 = num_complex::Complex64;

pub use error::{Error, Result};
pub use relcore::{
    CompositeState, DensityKind, DensityMatrix, NormMode, RelationalMatrix, WaveFunction,
};
