//! Operator application and the three equivalent evolution pictures:
//! relational-matrix propagation R(t) = U_S R(0) U_Aᵀ, the generalized
//! relational differential equation, the Liouville–von Neumann density
//! picture, and plain wave-function evolution.
//!
//! Matrix exponentials are built from the spectral decomposition of the
//! Hermitian generator: exp(-iHt/ħ) = Σ_k exp(-iE_k t/ħ)|k⟩⟨k|.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::relcore::{DensityMatrix, NormMode, RelationalMatrix, WaveFunction};
use crate::C64;

/// Hermiticity tolerance for operator construction.
pub const OPERATOR_HERMITIAN_TOL: f64 = 1e-12;

/// Tolerance on U†U = I for unitary construction.
pub const UNITARY_TOL: f64 = 1e-10;

/// Hermitian generator (a Hamiltonian) together with its ħ convention.
///
/// ħ is carried on the operator so unit choices are explicit; mixing
/// operators with different ħ in one evolution is an error.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: DMatrix<C64>,
    hbar: f64,
}

impl HermitianOperator {
    /// Validates Hermiticity within [`OPERATOR_HERMITIAN_TOL`]; ħ defaults to 1.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        Self::with_hbar(entries, 1.0)
    }

    pub fn with_hbar(entries: DMatrix<C64>, hbar: f64) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: "square, dim >= 1".into(),
                found: format!("{}x{}", entries.nrows(), entries.ncols()),
                context: "Hermitian operator",
            });
        }
        if !linalg::is_finite_matrix(&entries) {
            return Err(Error::NonFinite("Hermitian operator entries"));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidAction("hbar must be positive and finite"));
        }
        let dev = linalg::hermiticity_deviation(&entries);
        if dev > OPERATOR_HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(HermitianOperator { entries, hbar })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// exp(-iHt/ħ) via spectral decomposition.
    pub fn expm(&self, t: f64) -> UnitaryMatrix {
        let (energies, basis) = linalg::hermitian_eigen(&self.entries);
        let n = self.dim();
        let mut phases = DMatrix::<C64>::zeros(n, n);
        for (k, e) in energies.iter().enumerate() {
            phases[(k, k)] = C64::from_polar(1.0, -e * t / self.hbar);
        }
        let u = &basis * phases * basis.adjoint();
        UnitaryMatrix::from_computed(u)
    }
}

/// Matrix with U†U = I within [`UNITARY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    entries: DMatrix<C64>,
}

impl UnitaryMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: "square, dim >= 1".into(),
                found: format!("{}x{}", entries.nrows(), entries.ncols()),
                context: "unitary matrix",
            });
        }
        if !linalg::is_finite_matrix(&entries) {
            return Err(Error::NonFinite("unitary matrix entries"));
        }
        let dev = linalg::unitarity_deviation(&entries);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(UnitaryMatrix { entries })
    }

    pub(crate) fn from_computed(entries: DMatrix<C64>) -> Self {
        debug_assert!(linalg::unitarity_deviation(&entries) <= UNITARY_TOL);
        UnitaryMatrix { entries }
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }
}

/// Arbitrary local operator M acting on the system side (not necessarily
/// unitary): ⟨s_i|M|s_k⟩ propagates the relational matrix by summation over
/// intermediate steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    entries: DMatrix<C64>,
}

impl LocalOperator {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: "square, dim >= 1".into(),
                found: format!("{}x{}", entries.nrows(), entries.ncols()),
                context: "local operator",
            });
        }
        if !linalg::is_finite_matrix(&entries) {
            return Err(Error::NonFinite("local operator entries"));
        }
        Ok(LocalOperator { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }
}

fn check_hbar(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.hbar() != b.hbar() {
        return Err(Error::HbarMismatch {
            a: a.hbar(),
            b: b.hbar(),
        });
    }
    Ok(a.hbar())
}

/// R_new = M·R, summing over all intermediate system steps. The output is in
/// raw mode: a general M does not preserve any normalization, so the caller
/// renormalizes if needed.
pub fn apply_local(r: &RelationalMatrix, m: &LocalOperator) -> Result<RelationalMatrix> {
    if m.dim() != r.n_sys() {
        return Err(Error::DimensionMismatch {
            expected: format!("dim = {}", r.n_sys()),
            found: format!("dim = {}", m.dim()),
            context: "local operator application",
        });
    }
    RelationalMatrix::from_computed(m.entries() * r.entries(), NormMode::Raw)
}

/// R_new = Q·R·Oᵀ (transpose, not adjoint): the relational-matrix form of
/// applying Q̂⊗Ô to the composite state. Incoherent mode survives (two-sided
/// unitaries preserve the Frobenius norm); coherent input comes out raw.
pub fn apply_bipartite(
    r: &RelationalMatrix,
    q: &UnitaryMatrix,
    o: &UnitaryMatrix,
) -> Result<RelationalMatrix> {
    if q.dim() != r.n_sys() || o.dim() != r.n_app() {
        return Err(Error::DimensionMismatch {
            expected: format!("Q dim {} and O dim {}", r.n_sys(), r.n_app()),
            found: format!("Q dim {} and O dim {}", q.dim(), o.dim()),
            context: "bipartite operator application",
        });
    }
    let new_entries = q.entries() * r.entries() * o.entries().transpose();
    let mode = match r.norm_mode() {
        NormMode::Incoherent => NormMode::Incoherent,
        _ => NormMode::Raw,
    };
    RelationalMatrix::from_computed(new_entries, mode)
}

/// General non-interacting time evolution R(t) = exp(-iH_S t/ħ)·R(0)·exp(-iH_A t/ħ)ᵀ.
pub fn evolve_relational(
    r0: &RelationalMatrix,
    h_s: &HermitianOperator,
    h_a: &HermitianOperator,
    t: f64,
) -> Result<RelationalMatrix> {
    check_hbar(h_s, h_a)?;
    if h_s.dim() != r0.n_sys() || h_a.dim() != r0.n_app() {
        return Err(Error::DimensionMismatch {
            expected: format!("H_S dim {} and H_A dim {}", r0.n_sys(), r0.n_app()),
            found: format!("H_S dim {} and H_A dim {}", h_s.dim(), h_a.dim()),
            context: "relational evolution",
        });
    }
    apply_bipartite(r0, &h_s.expm(t), &h_a.expm(t))
}

/// Right-hand side of the relational differential equation,
/// dR/dt = (1/(iħ))·(H_S·R + R·H_Aᵀ).
///
/// R is N×M while H_Aᵀ is M×M, so the apparatus term multiplies from the
/// right only; the reversed product is not even defined for N ≠ M.
pub fn relational_rhs(
    r: &RelationalMatrix,
    h_s: &HermitianOperator,
    h_a: &HermitianOperator,
) -> Result<DMatrix<C64>> {
    let hbar = check_hbar(h_s, h_a)?;
    if h_s.dim() != r.n_sys() || h_a.dim() != r.n_app() {
        return Err(Error::DimensionMismatch {
            expected: format!("H_S dim {} and H_A dim {}", r.n_sys(), r.n_app()),
            found: format!("H_S dim {} and H_A dim {}", h_s.dim(), h_a.dim()),
            context: "relational rhs",
        });
    }
    let sum = h_s.entries() * r.entries() + r.entries() * h_a.entries().transpose();
    Ok(sum * C64::new(0.0, -1.0 / hbar))
}

/// Density evolution ρ(t) = U ρ(0) U† with U = exp(-iH_S t/ħ).
pub fn evolve_density(
    rho0: &DensityMatrix,
    h_s: &HermitianOperator,
    t: f64,
) -> Result<DensityMatrix> {
    if h_s.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("dim = {}", rho0.dim()),
            found: format!("dim = {}", h_s.dim()),
            context: "density evolution",
        });
    }
    let u = h_s.expm(t);
    let evolved = u.entries() * rho0.entries() * u.entries().adjoint();
    // Two sequential products leave a ~1 ulp Hermiticity residue; fold it out.
    let herm = (&evolved + evolved.adjoint()).scale(0.5);
    DensityMatrix::new(herm, rho0.kind())
}

/// Liouville–von Neumann right-hand side dρ/dt = (1/(iħ))·[H_S, ρ].
pub fn liouville_rhs(rho: &DensityMatrix, h_s: &HermitianOperator) -> Result<DMatrix<C64>> {
    if h_s.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("dim = {}", rho.dim()),
            found: format!("dim = {}", h_s.dim()),
            context: "Liouville rhs",
        });
    }
    let commutator = h_s.entries() * rho.entries() - rho.entries() * h_s.entries();
    Ok(commutator * C64::new(0.0, -1.0 / h_s.hbar()))
}

/// Wave-function evolution ψ(t) = exp(-iH_S t/ħ)·ψ(0). Requires a normalized
/// input state; the norm is preserved.
pub fn schrodinger_evolve(
    psi0: &WaveFunction,
    h_s: &HermitianOperator,
    t: f64,
) -> Result<WaveFunction> {
    if h_s.dim() != psi0.basis_dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("dim = {}", psi0.basis_dim()),
            found: format!("dim = {}", h_s.dim()),
            context: "wave-function evolution",
        });
    }
    let norm = psi0.norm_sq();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm });
    }
    let evolved = h_s.expm(t).entries() * psi0.amps();
    WaveFunction::new(evolved)
}

/// Kronecker product U_S ⊗ U_A under the system-major flattening
/// m = i·M + j, matching the composite-state ordering.
pub fn kron(u_s: &UnitaryMatrix, u_a: &UnitaryMatrix) -> UnitaryMatrix {
    UnitaryMatrix::from_computed(u_s.entries().kronecker(u_a.entries()))
}
