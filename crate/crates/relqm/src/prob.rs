//! Weight-summation probability rules.
//!
//! Every probability is a sum of weights over the applicable measurement
//! configurations |a_j⟩→|s_m⟩→|s_n⟩→|a_k⟩, with the weight of one
//! configuration being the product of the two relational amplitudes for its
//! two directions. Which configurations count depends on the regime:
//! unentangled matrices keep the cross-index interference terms (coherent
//! counting), entangled matrices exclude them (incoherent counting).

use crate::entangle;
use crate::error::{Error, Result};
use crate::linalg;
use crate::relcore::{DensityMatrix, RelationalMatrix};
use crate::C64;

/// Tolerance on P² = P and Hermiticity for projectors.
pub const PROJECTOR_TOL: f64 = 1e-10;

/// Tolerance on the imaginary residue of quantities that must be real.
pub const REAL_TOL: f64 = 1e-10;

/// Non-empty set of distinct system indices, stored ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSet {
    indices: Vec<usize>,
}

impl OutcomeSet {
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidOutcome("outcome set is empty"));
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidOutcome("outcome indices must be distinct"));
        }
        Ok(OutcomeSet { indices })
    }

    pub fn single(index: usize) -> Self {
        OutcomeSet {
            indices: vec![index],
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check_bounds(&self, dim: usize) -> Result<()> {
        match self.indices.last() {
            Some(&max) if max >= dim => Err(Error::IndexOutOfBounds {
                index: max,
                bound: dim,
            }),
            _ => Ok(()),
        }
    }
}

/// Hermitian idempotent matrix P (P² = P within [`PROJECTOR_TOL`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: nalgebra::DMatrix<C64>,
}

impl Projector {
    pub fn new(matrix: nalgebra::DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: "square, dim >= 1".into(),
                found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
                context: "projector",
            });
        }
        if !linalg::is_finite_matrix(&matrix) {
            return Err(Error::NonFinite("projector entries"));
        }
        let herm_dev = linalg::hermiticity_deviation(&matrix);
        if herm_dev > PROJECTOR_TOL {
            return Err(Error::NotHermitian {
                deviation: herm_dev,
            });
        }
        let idem_dev = linalg::max_abs_diff(&(&matrix * &matrix), &matrix);
        if idem_dev > PROJECTOR_TOL {
            return Err(Error::NotProjector {
                deviation: idem_dev,
            });
        }
        Ok(Projector { matrix })
    }

    /// Projector onto the span of the given basis indices, Σ_i |s_i⟩⟨s_i|.
    pub fn onto_indices(dim: usize, outcome: &OutcomeSet) -> Result<Self> {
        outcome.check_bounds(dim)?;
        let mut m = nalgebra::DMatrix::<C64>::zeros(dim, dim);
        for &i in outcome.indices() {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        Ok(Projector { matrix: m })
    }

    pub fn identity(dim: usize) -> Self {
        Projector {
            matrix: nalgebra::DMatrix::<C64>::identity(dim, dim),
        }
    }

    pub fn matrix(&self) -> &nalgebra::DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Weight of the measurement configuration |a_j⟩→|s_m⟩→|s_n⟩→|a_k⟩:
/// (R_mj)*·R_nk, using the adjoint relation for the reverse direction.
pub fn weight(r: &RelationalMatrix, j: usize, m: usize, n: usize, k: usize) -> Result<C64> {
    let (ns, na) = (r.n_sys(), r.n_app());
    for (idx, bound) in [(m, ns), (n, ns), (j, na), (k, na)] {
        if idx >= bound {
            return Err(Error::IndexOutOfBounds { index: idx, bound });
        }
    }
    let e = r.entries();
    Ok(e[(m, j)].conj() * e[(n, k)])
}

/// Normalization factor Ω for entrywise (joint / incoherent / apparatus)
/// quantities. Always computed from the entries: for incoherent-mode
/// matrices it is 1 up to representation error, and carrying that error into
/// the division cancels the matching error in the numerator (1/√2 squared is
/// one ulp above 1/2; the ratio is exactly 1/2).
fn omega_incoherent(r: &RelationalMatrix) -> f64 {
    r.frobenius_norm_sq()
}

/// Normalization factor for coherent (row-sum) quantities; same literal
/// evaluation as [`omega_incoherent`].
fn omega_coherent(r: &RelationalMatrix) -> f64 {
    r.coherent_norm_sq()
}

/// Probability of the joint event (|s_i⟩, |a_j⟩): |R_ij|² / Ω.
pub fn prob_joint(r: &RelationalMatrix, i: usize, j: usize) -> Result<f64> {
    if i >= r.n_sys() {
        return Err(Error::IndexOutOfBounds {
            index: i,
            bound: r.n_sys(),
        });
    }
    if j >= r.n_app() {
        return Err(Error::IndexOutOfBounds {
            index: j,
            bound: r.n_app(),
        });
    }
    Ok(r.entries()[(i, j)].norm_sqr() / omega_incoherent(r))
}

/// Coherent-counting probability for an unentangled matrix, including all
/// cross-index interference weights over the outcome set.
///
/// For a single index this is the Born value |φ_i|². For a multi-element set
/// it is the probability of finding the system in the normalized uniform
/// superposition over the set, |Σ_{i∈outcome} φ_i|² / |outcome|.
pub fn prob_coherent(r: &RelationalMatrix, outcome: &OutcomeSet) -> Result<f64> {
    prob_coherent_with(r, outcome, entangle::DEFAULT_ENTROPY_TOL)
}

/// [`prob_coherent`] with a caller-supplied entropy gate tolerance.
pub fn prob_coherent_with(r: &RelationalMatrix, outcome: &OutcomeSet, tol: f64) -> Result<f64> {
    outcome.check_bounds(r.n_sys())?;
    let entropy = entangle::entropy(r)?;
    if entropy >= tol {
        return Err(Error::EntangledState { entropy, tol });
    }
    let phi = r.row_sums();
    let amp: C64 = outcome.indices().iter().map(|&i| phi[i]).sum();
    Ok(amp.norm_sqr() / (outcome.len() as f64 * omega_coherent(r)))
}

/// Incoherent-counting probability Σ_{i∈outcome} Σ_j |R_ij|² / Ω, valid for
/// any matrix regardless of entanglement. Additive over the outcome set by
/// construction: no interference weights are included.
pub fn prob_incoherent(r: &RelationalMatrix, outcome: &OutcomeSet) -> Result<f64> {
    outcome.check_bounds(r.n_sys())?;
    let e = r.entries();
    let total: f64 = outcome
        .indices()
        .iter()
        .map(|&i| (0..r.n_app()).map(|j| e[(i, j)].norm_sqr()).sum::<f64>())
        .sum();
    Ok(total / omega_incoherent(r))
}

/// Probability of the apparatus event |a_j⟩: Σ_i |R_ij|² / Ω (the partial
/// projection onto the apparatus side).
pub fn prob_apparatus(r: &RelationalMatrix, j: usize) -> Result<f64> {
    if j >= r.n_app() {
        return Err(Error::IndexOutOfBounds {
            index: j,
            bound: r.n_app(),
        });
    }
    let e = r.entries();
    let total: f64 = (0..r.n_sys()).map(|i| e[(i, j)].norm_sqr()).sum();
    Ok(total / omega_incoherent(r))
}

/// Transition probability between the states described by two unentangled
/// relational matrices: |Σ_ij (Q†R)_ij|², equal to |⟨χ|ψ⟩|² of the derived
/// (normalized) wave functions.
pub fn prob_transition(q: &RelationalMatrix, r: &RelationalMatrix) -> Result<f64> {
    prob_transition_with(q, r, entangle::DEFAULT_ENTROPY_TOL)
}

/// [`prob_transition`] with a caller-supplied entropy gate tolerance.
pub fn prob_transition_with(q: &RelationalMatrix, r: &RelationalMatrix, tol: f64) -> Result<f64> {
    if q.n_sys() != r.n_sys() {
        return Err(Error::DimensionMismatch {
            expected: format!("n_sys = {}", r.n_sys()),
            found: format!("n_sys = {}", q.n_sys()),
            context: "transition probability",
        });
    }
    for m in [q, r] {
        let entropy = entangle::entropy(m)?;
        if entropy >= tol {
            return Err(Error::EntangledState { entropy, tol });
        }
    }
    // Sum of all entries of Q†R collapses to ⟨χ|ψ⟩ of the row-sum vectors.
    let chi = q.row_sums();
    let psi = r.row_sums();
    let overlap: C64 = chi.iter().zip(psi.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok(overlap.norm_sqr() / (omega_coherent(q) * omega_coherent(r)))
}

/// Probability via the reduced-density route: trace(P·ρ). The trace must be
/// real within [`REAL_TOL`]; the residue is discarded after the check.
pub fn prob_projection(rho: &DensityMatrix, p: &Projector) -> Result<f64> {
    if rho.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("dim = {}", rho.dim()),
            found: format!("dim = {}", p.dim()),
            context: "projection probability",
        });
    }
    let n = rho.dim();
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            tr += p.matrix()[(i, k)] * rho.entries()[(k, i)];
        }
    }
    if tr.im.abs() > REAL_TOL {
        return Err(Error::NotReal { imag: tr.im });
    }
    Ok(tr.re)
}
