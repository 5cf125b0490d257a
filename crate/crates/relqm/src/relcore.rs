//! Relational probability-amplitude matrices and the state descriptions
//! derived from them: wave functions, composite state vectors, and reduced /
//! coherent density matrices.
//!
//! The relational matrix `R` is the fundamental object: an N×M complex grid
//! tying each system event to each apparatus event. Every other description
//! is computed from it. The two normalization conventions (row-sum vs
//! entrywise) cannot hold simultaneously, so the convention is an explicit
//! [`NormMode`] chosen by the caller.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::C64;

/// Normalization drift below which a rescale is applied silently.
pub const NORM_DRIFT_TOL: f64 = 1e-9;

/// Hermiticity tolerance for density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Smallest admissible density-matrix eigenvalue.
pub const PSD_TOL: f64 = -1e-10;

/// Which normalization the entries of a [`RelationalMatrix`] satisfy.
///
/// - `Coherent`: Σ_i |Σ_j R_ij|² = 1 (row-sum vector normalized; the regime
///   in which a wave function exists).
/// - `Incoherent`: Σ_ij |R_ij|² = 1 (composite state vector normalized).
/// - `Raw`: no constraint; probability rules divide by the appropriate
///   normalization factor Ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMode {
    Coherent,
    Incoherent,
    Raw,
}

impl NormMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NormMode::Coherent => "coherent",
            NormMode::Incoherent => "incoherent",
            NormMode::Raw => "raw",
        }
    }
}

/// N×M complex matrix of relational probability amplitudes between a system
/// with N events and an apparatus with M events.
///
/// The conjugate-direction partner matrix is never stored: it is the adjoint
/// of this one by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationalMatrix {
    entries: DMatrix<C64>,
    norm_mode: NormMode,
    applied_scale: f64,
    norm_drift: f64,
}

impl RelationalMatrix {
    /// Builds and validates a relational matrix.
    ///
    /// For `Coherent` and `Incoherent` modes the stated normalization is
    /// enforced by a global rescale. Drifts up to [`NORM_DRIFT_TOL`] are
    /// fixed silently (scenario files carry rounded decimals); larger drifts
    /// are still fixed but flagged via [`rescale_flagged`](Self::rescale_flagged).
    pub fn new(
        n_sys: usize,
        n_app: usize,
        entries: DMatrix<C64>,
        norm_mode: NormMode,
    ) -> Result<Self> {
        if n_sys == 0 || n_app == 0 || entries.nrows() != n_sys || entries.ncols() != n_app {
            return Err(Error::DimensionMismatch {
                expected: format!("{n_sys}x{n_app} with both >= 1"),
                found: format!("{}x{}", entries.nrows(), entries.ncols()),
                context: "relational matrix entries",
            });
        }
        if !linalg::is_finite_matrix(&entries) {
            return Err(Error::NonFinite("relational matrix entries"));
        }
        if linalg::max_abs(&entries) == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let mut rel = RelationalMatrix {
            entries,
            norm_mode,
            applied_scale: 1.0,
            norm_drift: 0.0,
        };
        if norm_mode != NormMode::Raw {
            let target = match norm_mode {
                NormMode::Coherent => rel.coherent_norm_sq(),
                NormMode::Incoherent => rel.frobenius_norm_sq(),
                NormMode::Raw => unreachable!(),
            };
            if target < f64::MIN_POSITIVE {
                return Err(Error::NotNormalizable {
                    norm: target,
                    context: norm_mode.as_str(),
                });
            }
            let scale = 1.0 / target.sqrt();
            rel.norm_drift = (target - 1.0).abs();
            rel.applied_scale = scale;
            rel.entries.iter_mut().for_each(|z| *z *= scale);
        }
        Ok(rel)
    }

    /// Internal constructor for matrices produced by library operations whose
    /// entries must be preserved bit-for-bit (evolution outputs, path sums).
    pub(crate) fn from_computed(entries: DMatrix<C64>, norm_mode: NormMode) -> Result<Self> {
        if !linalg::is_finite_matrix(&entries) {
            return Err(Error::NonFinite("relational matrix entries"));
        }
        if entries.is_empty() || linalg::max_abs(&entries) == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        Ok(RelationalMatrix {
            entries,
            norm_mode,
            applied_scale: 1.0,
            norm_drift: 0.0,
        })
    }

    pub fn n_sys(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_app(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn norm_mode(&self) -> NormMode {
        self.norm_mode
    }

    /// Global factor applied at construction to enforce the normalization
    /// (1.0 for `Raw` matrices).
    pub fn applied_scale(&self) -> f64 {
        self.applied_scale
    }

    /// Pre-rescale deviation of the stated normalization from 1.
    pub fn norm_drift(&self) -> f64 {
        self.norm_drift
    }

    /// True when construction had to fix a drift larger than [`NORM_DRIFT_TOL`].
    pub fn rescale_flagged(&self) -> bool {
        self.norm_drift > NORM_DRIFT_TOL
    }

    /// Row-sum vector φ with φ_i = Σ_j R_ij.
    pub fn row_sums(&self) -> DVector<C64> {
        DVector::from_iterator(
            self.n_sys(),
            self.entries.row_iter().map(|row| row.iter().sum::<C64>()),
        )
    }

    /// Σ_i |Σ_j R_ij|², the coherent normalization target.
    pub fn coherent_norm_sq(&self) -> f64 {
        self.row_sums().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Σ_ij |R_ij|², the incoherent normalization target (and Ω).
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Derives the wave function φ_i = Σ_j R_ij, gated on the entanglement
    /// entropy being below the default tolerance.
    ///
    /// A wave function cannot be defined for an entangled matrix; the error
    /// carries the computed entropy.
    pub fn wave_function(&self) -> Result<WaveFunction> {
        self.wave_function_with(crate::entangle::DEFAULT_ENTROPY_TOL)
    }

    /// Same as [`wave_function`](Self::wave_function) with a caller-supplied
    /// entropy gate tolerance.
    pub fn wave_function_with(&self, tol: f64) -> Result<WaveFunction> {
        let entropy = crate::entangle::entropy(self)?;
        if entropy >= tol {
            return Err(Error::EntangledState { entropy, tol });
        }
        WaveFunction::new(self.row_sums())
    }

    /// Reduced density matrix ρ = RR†, the apparatus-traced description.
    pub fn reduced_density(&self) -> DensityMatrix {
        let rho = &self.entries * self.entries.adjoint();
        DensityMatrix::from_product(rho, DensityKind::Reduced)
    }

    /// Coherent density matrix ρ′ with entries Σ_jj′ R_ij R*_i′j′, i.e. the
    /// outer product of the row-sum vector with itself. Retains the cross-index
    /// interference terms that the reduced form discards.
    pub fn coherent_density(&self) -> DensityMatrix {
        let phi = self.row_sums();
        let rho = &phi * phi.adjoint();
        DensityMatrix::from_product(rho, DensityKind::Coherent)
    }

    /// Flattens R into the composite state vector Ψ with amps[i·M + j] = R_ij
    /// (system-major ordering). Raw input is rescaled to unit norm.
    pub fn composite_state(&self) -> Result<CompositeState> {
        if self.norm_mode == NormMode::Coherent {
            return Err(Error::InvalidNormMode {
                expected: "incoherent or raw",
                found: "coherent",
            });
        }
        let (n, m) = (self.n_sys(), self.n_app());
        let mut amps = DVector::from_element(n * m, C64::new(0.0, 0.0));
        for i in 0..n {
            for j in 0..m {
                amps[i * m + j] = self.entries[(i, j)];
            }
        }
        if self.norm_mode == NormMode::Raw {
            let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
            if norm_sq < f64::MIN_POSITIVE {
                return Err(Error::ZeroMatrix);
            }
            let scale = 1.0 / norm_sq.sqrt();
            amps.iter_mut().for_each(|z| *z *= scale);
        }
        CompositeState::new(amps)
    }
}

/// Length-N complex vector φ of row sums of a relational matrix.
///
/// Valid as a state description only for unentangled matrices; the
/// constructor does not enforce normalization since only coherent-mode
/// matrices guarantee it.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    amps: DVector<C64>,
}

impl WaveFunction {
    pub fn new(amps: DVector<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: "length >= 1".into(),
                found: "0".into(),
                context: "wave function",
            });
        }
        if !linalg::is_finite_vector(&amps) {
            return Err(Error::NonFinite("wave function amplitudes"));
        }
        Ok(WaveFunction { amps })
    }

    pub fn basis_dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// State vector of the composite system, Ψ_m = R_ij under m = i·M + j.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    amps: DVector<C64>,
}

impl CompositeState {
    pub fn new(amps: DVector<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: "length >= 1".into(),
                found: "0".into(),
                context: "composite state",
            });
        }
        if !linalg::is_finite_vector(&amps) {
            return Err(Error::NonFinite("composite state amplitudes"));
        }
        Ok(CompositeState { amps })
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Whether a density matrix was built by tracing out the apparatus (RR†) or
/// by keeping the full coherent double sum (φφ†).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    Reduced,
    Coherent,
}

/// N×N Hermitian positive-semidefinite complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
    kind: DensityKind,
}

impl DensityMatrix {
    /// Validates Hermiticity (within [`HERMITIAN_TOL`]) and positive
    /// semidefiniteness (eigenvalues above [`PSD_TOL`]).
    pub fn new(entries: DMatrix<C64>, kind: DensityKind) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: "square, dim >= 1".into(),
                found: format!("{}x{}", entries.nrows(), entries.ncols()),
                context: "density matrix",
            });
        }
        if !linalg::is_finite_matrix(&entries) {
            return Err(Error::NonFinite("density matrix entries"));
        }
        let dev = linalg::hermiticity_deviation(&entries);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let min_eig = linalg::hermitian_eigenvalues_desc(&entries)
            .last()
            .copied()
            .unwrap_or(0.0);
        if min_eig < PSD_TOL {
            return Err(Error::NotHermitian {
                deviation: min_eig.abs(),
            });
        }
        Ok(DensityMatrix { entries, kind })
    }

    /// For products of the form AA† / φφ†, which are Hermitian PSD by
    /// construction.
    pub(crate) fn from_product(entries: DMatrix<C64>, kind: DensityKind) -> Self {
        debug_assert!(linalg::hermiticity_deviation(&entries) <= 1e-10);
        DensityMatrix { entries, kind }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).sum()
    }

    /// Eigenvalues sorted descending.
    pub fn eigenvalues_desc(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues_desc(&self.entries)
    }

    /// Entrywise rescale so the trace is exactly 1.
    pub fn trace_normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr.abs() < f64::MIN_POSITIVE {
            return Err(Error::ZeroMatrix);
        }
        Ok(DensityMatrix {
            entries: self.entries.scale(1.0 / tr),
            kind: self.kind,
        })
    }
}
