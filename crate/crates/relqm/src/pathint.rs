//! Discretized 1D path-integral backend.
//!
//! Everything is built from a per-slice transfer matrix on a uniform spatial
//! lattice. The single-system slice factor is the band-limited split-step
//! form
//!
//! ```text
//! T = exp(-i dt V/2ħ) · Kin · exp(-i dt V/2ħ),
//! Kin[b,a] = (1/(N dx)) Σ_k exp(i k (x_b - x_a) - i ħ k² dt/(2m))
//! ```
//!
//! with k running over the lattice momenta. The raw real-space Gaussian
//! slice diverges under composition on any grid coarse enough to alias its
//! kinetic phase, while the band-limited form reproduces the analytic free
//! kernel in the grid interior and is exactly unitary, so norms and
//! stationary states survive composition. Interaction phases between the two
//! subsystems keep the midpoint form exp(-(i/ħ) dt V_int((x+x')/2,(y+y')/2))
//! attached to each joint hop.
//!
//! Composing n_slices transfer matrices with dx quadrature weights realizes
//! the sum over all lattice paths; the relational matrix, the influence
//! functional and the path-sum density matrices are different contractions
//! of the same joint hop weights.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::relcore::{DensityKind, DensityMatrix, NormMode, RelationalMatrix};
use crate::C64;

/// Uniform 1D spatial grid with time slicing.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    n_slices: usize,
    dt: f64,
}

impl Lattice1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, n_slices: usize, dt: f64) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && dt.is_finite()) {
            return Err(Error::InvalidLattice("bounds and dt must be finite"));
        }
        if x_max <= x_min {
            return Err(Error::InvalidLattice("x_max must exceed x_min"));
        }
        if n_points < 2 {
            return Err(Error::InvalidLattice("need at least 2 points"));
        }
        if n_slices < 1 {
            return Err(Error::InvalidLattice("need at least 1 time slice"));
        }
        if dt <= 0.0 {
            return Err(Error::InvalidLattice("dt must be positive"));
        }
        Ok(Lattice1D {
            x_min,
            x_max,
            n_points,
            n_slices,
            dt,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_slices(&self) -> usize {
        self.n_slices
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn total_time(&self) -> f64 {
        self.n_slices as f64 * self.dt
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }
}

/// Single-particle potential on the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    Zero,
    /// V(x) = k x² / 2.
    Harmonic {
        k: f64,
    },
    /// V(x) = g x⁴.
    Quartic {
        g: f64,
    },
}

impl Potential {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Harmonic { k } => 0.5 * k * x * x,
            Potential::Quartic { g } => g * x.powi(4),
        }
    }
}

/// Two-particle interaction potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interaction {
    None,
    /// V_int(x, y) = λ x y.
    Bilinear {
        lambda: f64,
    },
}

impl Interaction {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Interaction::None => 0.0,
            Interaction::Bilinear { lambda } => lambda * x * y,
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Interaction::None)
    }
}

/// Masses, potentials and interaction defining the two-system action.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpec {
    mass_s: f64,
    mass_a: f64,
    v_s: Potential,
    v_a: Potential,
    v_int: Interaction,
    hbar: f64,
}

impl ActionSpec {
    pub fn new(
        mass_s: f64,
        mass_a: f64,
        v_s: Potential,
        v_a: Potential,
        v_int: Interaction,
        hbar: f64,
    ) -> Result<Self> {
        for (m, name) in [(mass_s, "mass_s"), (mass_a, "mass_a")] {
            if !(m.is_finite() && m > 0.0) {
                let _ = name;
                return Err(Error::InvalidAction("masses must be positive and finite"));
            }
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidAction("hbar must be positive and finite"));
        }
        Ok(ActionSpec {
            mass_s,
            mass_a,
            v_s,
            v_a,
            v_int,
            hbar,
        })
    }

    pub fn mass_s(&self) -> f64 {
        self.mass_s
    }

    pub fn mass_a(&self) -> f64 {
        self.mass_a
    }

    pub fn v_s(&self) -> Potential {
        self.v_s
    }

    pub fn v_a(&self) -> Potential {
        self.v_a
    }

    pub fn v_int(&self) -> Interaction {
        self.v_int
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

/// Which of the two subsystems an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    System,
    Apparatus,
}

/// Propagator grid K(b, a) between lattice endpoints over the total time.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    matrix: DMatrix<C64>,
}

impl Kernel {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: "square, dim >= 1".into(),
                found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
                context: "kernel",
            });
        }
        if !linalg::is_finite_matrix(&matrix) {
            return Err(Error::NonFinite("kernel entries"));
        }
        Ok(Kernel { matrix })
    }

    pub fn n_points(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn entry(&self, b: usize, a: usize) -> C64 {
        self.matrix[(b, a)]
    }
}

/// Per-slice transfer matrix for one subsystem on its lattice.
fn slice_matrix(lat: &Lattice1D, mass: f64, v: Potential, hbar: f64) -> DMatrix<C64> {
    let n = lat.n_points();
    let dx = lat.dx();
    let dt = lat.dt();

    // Circulant kinetic factor with exact k²/2m dispersion on lattice momenta.
    let mut kin = vec![C64::new(0.0, 0.0); n];
    for (s, slot) in kin.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            let f = if j <= n / 2 {
                j as f64
            } else {
                j as f64 - n as f64
            } / (n as f64 * dx);
            let k = TAU * f;
            let theta = TAU * (j * s % n) as f64 / n as f64 - hbar * k * k * dt / (2.0 * mass);
            acc += C64::from_polar(1.0, theta);
        }
        *slot = acc / (n as f64 * dx);
    }

    let half_phase: Vec<C64> = (0..n)
        .map(|i| C64::from_polar(1.0, -dt * v.eval(lat.point(i)) / (2.0 * hbar)))
        .collect();

    DMatrix::from_fn(n, n, |b, a| {
        half_phase[b] * kin[(b + n - a) % n] * half_phase[a]
    })
}

/// Composes `n_slices` copies of a transfer matrix with dx quadrature weights
/// on the interior integration points.
fn compose_slices(transfer: &DMatrix<C64>, n_slices: usize, dx: f64) -> DMatrix<C64> {
    let mut kernel = transfer.clone();
    for _ in 1..n_slices {
        kernel = transfer * (kernel.scale(dx));
    }
    kernel
}

/// Single-system propagator over the lattice's total time. The interaction
/// term of the action plays no role here.
pub fn kernel_single(lat: &Lattice1D, act: &ActionSpec, which: Subsystem) -> Result<Kernel> {
    let (mass, v) = match which {
        Subsystem::System => (act.mass_s(), act.v_s()),
        Subsystem::Apparatus => (act.mass_a(), act.v_a()),
    };
    let transfer = slice_matrix(lat, mass, v, act.hbar());
    Kernel::new(compose_slices(&transfer, lat.n_slices(), lat.dx()))
}

/// φ(x_b) = Σ_a K(b, a) φ(a) dx.
pub fn propagate_wf(kernel: &Kernel, phi: &DVector<C64>, dx: f64) -> Result<DVector<C64>> {
    if phi.len() != kernel.n_points() {
        return Err(Error::DimensionMismatch {
            expected: format!("length {}", kernel.n_points()),
            found: format!("length {}", phi.len()),
            context: "wave function propagation",
        });
    }
    if !linalg::is_finite_vector(phi) {
        return Err(Error::NonFinite("wave function samples"));
    }
    Ok((kernel.matrix() * phi).scale(dx))
}

fn check_shared_slicing(lat_s: &Lattice1D, lat_a: &Lattice1D) -> Result<()> {
    if lat_s.n_slices() != lat_a.n_slices() || lat_s.dt() != lat_a.dt() {
        return Err(Error::LatticeMismatch(
            "system and apparatus lattices must share n_slices and dt",
        ));
    }
    Ok(())
}

/// Joint transfer machinery for the coupled double path sum.
struct JointSlices {
    ts: DMatrix<C64>,
    ta: DMatrix<C64>,
    v_int: Interaction,
    phase_rate: f64,
    x_pts: Vec<f64>,
    y_pts: Vec<f64>,
}

impl JointSlices {
    fn build(lat_s: &Lattice1D, lat_a: &Lattice1D, act: &ActionSpec) -> Self {
        JointSlices {
            ts: slice_matrix(lat_s, act.mass_s(), act.v_s(), act.hbar()),
            ta: slice_matrix(lat_a, act.mass_a(), act.v_a(), act.hbar()),
            v_int: act.v_int(),
            phase_rate: -lat_s.dt() / act.hbar(),
            x_pts: lat_s.points(),
            y_pts: lat_a.points(),
        }
    }

    /// One application of the joint transfer matrix
    /// T[(x',y'),(x,y)] = T_S[x',x]·T_A[y',y]·exp(-(i/ħ) dt V_int((x+x')/2,(y+y')/2))
    /// to a joint state, with quadrature weight `w` on the input.
    fn apply(&self, state: &DMatrix<C64>, w: f64) -> DMatrix<C64> {
        let n = self.x_pts.len();
        let m = self.y_pts.len();
        if self.v_int.is_none() {
            return (&self.ts * state.scale(w)) * self.ta.transpose();
        }
        let mut out = DMatrix::<C64>::zeros(n, m);
        for xp in 0..n {
            for yp in 0..m {
                let mut acc = C64::new(0.0, 0.0);
                for x in 0..n {
                    let mid_x = 0.5 * (self.x_pts[x] + self.x_pts[xp]);
                    let tsv = self.ts[(xp, x)];
                    for y in 0..m {
                        let mid_y = 0.5 * (self.y_pts[y] + self.y_pts[yp]);
                        let phase =
                            C64::from_polar(1.0, self.phase_rate * self.v_int.eval(mid_x, mid_y));
                        acc += tsv * self.ta[(yp, y)] * phase * state[(x, y)];
                    }
                }
                out[(xp, yp)] = acc * w;
            }
        }
        out
    }

    /// Joint forward state from a delta start at lattice indices (is, ia),
    /// after all slices. Interior integration points carry dx·dy weights; the
    /// fixed start point does not.
    fn forward(&self, lat_s: &Lattice1D, lat_a: &Lattice1D, is: usize, ia: usize) -> DMatrix<C64> {
        let mut state = DMatrix::<C64>::zeros(lat_s.n_points(), lat_a.n_points());
        state[(is, ia)] = C64::new(1.0, 0.0);
        let w_interior = lat_s.dx() * lat_a.dx();
        for s in 0..lat_s.n_slices() {
            let w = if s == 0 { 1.0 } else { w_interior };
            state = self.apply(&state, w);
        }
        state
    }
}

/// Relational matrix from the joint double path sum: entry (x_b, y_b) sums
/// every pair of lattice paths from the fixed start points (system row index
/// is the system endpoint, apparatus column index the apparatus endpoint),
/// each pair weighted by both subsystem hop factors and the interaction
/// phases. Output is in raw mode.
pub fn relational_from_paths(
    lat_s: &Lattice1D,
    lat_a: &Lattice1D,
    act: &ActionSpec,
    a_start_idx_s: usize,
    a_start_idx_a: usize,
) -> Result<RelationalMatrix> {
    check_shared_slicing(lat_s, lat_a)?;
    if a_start_idx_s >= lat_s.n_points() {
        return Err(Error::IndexOutOfBounds {
            index: a_start_idx_s,
            bound: lat_s.n_points(),
        });
    }
    if a_start_idx_a >= lat_a.n_points() {
        return Err(Error::IndexOutOfBounds {
            index: a_start_idx_a,
            bound: lat_a.n_points(),
        });
    }
    let joint = JointSlices::build(lat_s, lat_a, act);
    let entries = joint.forward(lat_s, lat_a, a_start_idx_s, a_start_idx_a);
    RelationalMatrix::from_computed(entries, NormMode::Raw)
}

/// Influence functional F(x(t), x'(t)) for two given system paths: the
/// apparatus double path sum over shared endpoints (y_a, y_b), the forward
/// branch carrying the interaction phases of x(t) and the conjugate branch
/// those of x'(t). Endpoint sums use dy² quadrature weights.
pub fn influence_functional(
    lat_a: &Lattice1D,
    act: &ActionSpec,
    x_path: &[f64],
    x_path_prime: &[f64],
) -> Result<C64> {
    let expected = lat_a.n_slices() + 1;
    if x_path.len() != expected || x_path_prime.len() != expected {
        return Err(Error::DimensionMismatch {
            expected: format!("path length {expected}"),
            found: format!("{} and {}", x_path.len(), x_path_prime.len()),
            context: "influence functional paths",
        });
    }
    if !x_path.iter().chain(x_path_prime).all(|x| x.is_finite()) {
        return Err(Error::NonFinite("system path positions"));
    }
    let base = slice_matrix(lat_a, act.mass_a(), act.v_a(), act.hbar());
    let dy = lat_a.dx();
    let forward = modulated_apparatus_kernel(lat_a, act, &base, x_path);
    let backward = modulated_apparatus_kernel(lat_a, act, &base, x_path_prime);
    let mut f = C64::new(0.0, 0.0);
    for ya in 0..lat_a.n_points() {
        for yb in 0..lat_a.n_points() {
            f += forward[(yb, ya)] * backward[(yb, ya)].conj();
        }
    }
    Ok(f * (dy * dy))
}

/// Apparatus kernel with each slice's transfer modulated by the interaction
/// phase along the given system path.
fn modulated_apparatus_kernel(
    lat_a: &Lattice1D,
    act: &ActionSpec,
    base: &DMatrix<C64>,
    x_path: &[f64],
) -> DMatrix<C64> {
    let m = lat_a.n_points();
    let dy = lat_a.dx();
    let y_pts = lat_a.points();
    let rate = -lat_a.dt() / act.hbar();
    let v_int = act.v_int();
    let slice_for = |s: usize| -> DMatrix<C64> {
        if v_int.is_none() {
            return base.clone();
        }
        let x_mid = 0.5 * (x_path[s] + x_path[s + 1]);
        DMatrix::from_fn(m, m, |yp, y| {
            let y_mid = 0.5 * (y_pts[y] + y_pts[yp]);
            base[(yp, y)] * C64::from_polar(1.0, rate * v_int.eval(x_mid, y_mid))
        })
    };
    let mut kernel = slice_for(0);
    for s in 1..lat_a.n_slices() {
        kernel = slice_for(s) * (kernel.scale(dy));
    }
    kernel
}

/// One (x_a, x'_a) block of the path-sum density matrix: the grid
/// ρ(x_b, x'_b; x_a, x'_a) with the start points fixed.
///
/// Hermitian and positive semidefinite only when the two start indices
/// coincide; [`to_density_matrix`](Self::to_density_matrix) validates that.
#[derive(Debug, Clone, PartialEq)]
pub struct PathDensityBlock {
    matrix: DMatrix<C64>,
    x_a_idx: usize,
    x_a_prime_idx: usize,
}

impl PathDensityBlock {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn x_a_idx(&self) -> usize {
        self.x_a_idx
    }

    pub fn x_a_prime_idx(&self) -> usize {
        self.x_a_prime_idx
    }

    /// Validated conversion for the equal-start (Hermitian) case.
    pub fn to_density_matrix(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.matrix.clone(), DensityKind::Reduced)
    }
}

/// Reduced density matrix from forward/backward system path sums weighted by
/// the influence functional, with both start points fixed:
/// ρ(x_b, x'_b; x_a, x'_a) = Σ_{y_a,y_b} G(x_b,y_b;x_a,y_a)·G*(x'_b,y_b;x'_a,y_a)·dy²
/// where G is the joint forward sum.
pub fn reduced_density_paths(
    lat_s: &Lattice1D,
    lat_a: &Lattice1D,
    act: &ActionSpec,
    x_a_idx: usize,
    x_a_prime_idx: usize,
) -> Result<PathDensityBlock> {
    check_shared_slicing(lat_s, lat_a)?;
    for idx in [x_a_idx, x_a_prime_idx] {
        if idx >= lat_s.n_points() {
            return Err(Error::IndexOutOfBounds {
                index: idx,
                bound: lat_s.n_points(),
            });
        }
    }
    let joint = JointSlices::build(lat_s, lat_a, act);
    let n = lat_s.n_points();
    let dy = lat_a.dx();
    let mut rho = DMatrix::<C64>::zeros(n, n);
    for ya in 0..lat_a.n_points() {
        let fwd = joint.forward(lat_s, lat_a, x_a_idx, ya);
        let bwd = if x_a_prime_idx == x_a_idx {
            fwd.clone()
        } else {
            joint.forward(lat_s, lat_a, x_a_prime_idx, ya)
        };
        rho += &fwd * bwd.adjoint();
    }
    rho.iter_mut().for_each(|z| *z *= dy * dy);
    Ok(PathDensityBlock {
        matrix: rho,
        x_a_idx,
        x_a_prime_idx,
    })
}

/// Full four-index path-sum density ρ(x_b, x'_b; x_a, x'_a) over all start
/// pairs, assembled from one joint forward sum per (x_a, y_a) start.
#[derive(Debug, Clone)]
pub struct PathDensity {
    n_points: usize,
    dx: f64,
    data: Vec<C64>,
}

impl PathDensity {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// System lattice spacing, the natural quadrature weight for this grid.
    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn get(&self, x_b: usize, x_b_prime: usize, x_a: usize, x_a_prime: usize) -> C64 {
        let n = self.n_points;
        self.data[((x_b * n + x_b_prime) * n + x_a) * n + x_a_prime]
    }

    /// The (x_a, x'_a) block as a matrix over (x_b, x'_b).
    pub fn block(&self, x_a: usize, x_a_prime: usize) -> DMatrix<C64> {
        DMatrix::from_fn(self.n_points, self.n_points, |b, bp| {
            self.get(b, bp, x_a, x_a_prime)
        })
    }
}

/// Builds the full four-index path density. Start states are cached: one
/// joint forward sum per (x_a, y_a) pair.
pub fn path_density(lat_s: &Lattice1D, lat_a: &Lattice1D, act: &ActionSpec) -> Result<PathDensity> {
    check_shared_slicing(lat_s, lat_a)?;
    let joint = JointSlices::build(lat_s, lat_a, act);
    let n = lat_s.n_points();
    let m = lat_a.n_points();
    let dy = lat_a.dx();

    let mut forwards: Vec<Vec<DMatrix<C64>>> = Vec::with_capacity(n);
    for xa in 0..n {
        let mut per_ya = Vec::with_capacity(m);
        for ya in 0..m {
            per_ya.push(joint.forward(lat_s, lat_a, xa, ya));
        }
        forwards.push(per_ya);
    }

    let mut data = vec![C64::new(0.0, 0.0); n * n * n * n];
    let w = dy * dy;
    for xa in 0..n {
        for xap in 0..n {
            let mut block = DMatrix::<C64>::zeros(n, n);
            for (fwd, bwd) in forwards[xa].iter().zip(&forwards[xap]) {
                block += fwd * bwd.adjoint();
            }
            for b in 0..n {
                for bp in 0..n {
                    data[((b * n + bp) * n + xa) * n + xap] = block[(b, bp)] * w;
                }
            }
        }
    }
    Ok(PathDensity {
        n_points: n,
        dx: lat_s.dx(),
        data,
    })
}

/// Transition quadrature Σ ψ*(x'_b) ψ(x_b) ρ(x_b,x'_b;x_a,x'_a) χ(x_a) χ*(x'_a) dx⁴.
///
/// With lattice delta vectors (1/dx at one site) for χ and ψ this reduces to
/// the diagonal entry ρ(x̄_b, x̄_b; x̄_a, x̄_a) exactly. The value is the raw
/// path-sum quantity; it is real within [`crate::prob::REAL_TOL`] and the
/// imaginary residue is discarded after the check.
pub fn transition_prob_paths(
    rho: &PathDensity,
    chi_a: &DVector<C64>,
    psi_b: &DVector<C64>,
    dx: f64,
) -> Result<f64> {
    let n = rho.n_points();
    if chi_a.len() != n || psi_b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("length {n}"),
            found: format!("{} and {}", chi_a.len(), psi_b.len()),
            context: "transition quadrature states",
        });
    }
    if !(linalg::is_finite_vector(chi_a) && linalg::is_finite_vector(psi_b)) {
        return Err(Error::NonFinite("transition quadrature states"));
    }
    let mut acc = C64::new(0.0, 0.0);
    for xa in 0..n {
        for xap in 0..n {
            let w_start = chi_a[xa] * chi_a[xap].conj();
            if w_start.norm_sqr() == 0.0 {
                continue;
            }
            let mut inner = C64::new(0.0, 0.0);
            for b in 0..n {
                for bp in 0..n {
                    inner += psi_b[bp].conj() * psi_b[b] * rho.get(b, bp, xa, xap);
                }
            }
            acc += inner * w_start;
        }
    }
    acc *= dx.powi(4);
    let tol = crate::prob::REAL_TOL * acc.re.abs().max(1.0);
    if acc.im.abs() > tol {
        return Err(Error::NotReal { imag: acc.im });
    }
    Ok(acc.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn free_action() -> ActionSpec {
        ActionSpec::new(
            1.0,
            1.0,
            Potential::Zero,
            Potential::Zero,
            Interaction::None,
            1.0,
        )
        .unwrap()
    }

    fn coupled_action(lambda: f64) -> ActionSpec {
        ActionSpec::new(
            1.0,
            1.0,
            Potential::Zero,
            Potential::Zero,
            Interaction::Bilinear { lambda },
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn lattice_validation() {
        assert!(matches!(
            Lattice1D::new(1.0, -1.0, 8, 1, 0.1),
            Err(Error::InvalidLattice(_))
        ));
        assert!(matches!(
            Lattice1D::new(-1.0, 1.0, 1, 1, 0.1),
            Err(Error::InvalidLattice(_))
        ));
        assert!(matches!(
            Lattice1D::new(-1.0, 1.0, 8, 0, 0.1),
            Err(Error::InvalidLattice(_))
        ));
        assert!(matches!(
            Lattice1D::new(-1.0, 1.0, 8, 1, 0.0),
            Err(Error::InvalidLattice(_))
        ));
        let lat = Lattice1D::new(-2.0, 2.0, 5, 3, 0.1).unwrap();
        assert_abs_diff_eq!(lat.dx(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lat.total_time(), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(lat.point(2), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn free_transfer_preserves_constant_function() {
        // k = 0 mode has unit dispersion factor, so a constant is an exact
        // eigenvector with eigenvalue 1 under T·dx.
        let lat = Lattice1D::new(-5.0, 5.0, 32, 1, 0.2).unwrap();
        let k = kernel_single(&lat, &free_action(), Subsystem::System).unwrap();
        let ones = DVector::from_element(32, c(1.0, 0.0));
        let out = propagate_wf(&k, &ones, lat.dx()).unwrap();
        for i in 0..32 {
            assert!((out[i] - c(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn one_slice_potential_enters_as_half_phases() {
        let lat = Lattice1D::new(-3.0, 3.0, 16, 1, 0.3).unwrap();
        let v = Potential::Harmonic { k: 1.0 };
        let act_v = ActionSpec::new(1.0, 1.0, v, Potential::Zero, Interaction::None, 1.0).unwrap();
        let k_free = kernel_single(&lat, &free_action(), Subsystem::System).unwrap();
        let k_v = kernel_single(&lat, &act_v, Subsystem::System).unwrap();
        for b in 0..16 {
            for a in 0..16 {
                let expected_phase = C64::from_polar(
                    1.0,
                    -lat.dt() * (v.eval(lat.point(b)) + v.eval(lat.point(a))) / 2.0,
                );
                let lhs = k_v.entry(b, a);
                let rhs = k_free.entry(b, a) * expected_phase;
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn chapman_kolmogorov_composition() {
        let act = free_action();
        let lat_t = Lattice1D::new(-8.0, 8.0, 48, 6, 0.1).unwrap();
        let lat_2t = Lattice1D::new(-8.0, 8.0, 48, 12, 0.1).unwrap();
        let kt = kernel_single(&lat_t, &act, Subsystem::System).unwrap();
        let k2t = kernel_single(&lat_2t, &act, Subsystem::System).unwrap();
        let composed = kt.matrix() * kt.matrix().scale(lat_t.dx());
        assert!(linalg::max_abs_diff(k2t.matrix(), &composed) < 1e-8);
    }

    #[test]
    fn kernel_matches_explicit_two_slice_path_sum() {
        let n = 8;
        let lat = Lattice1D::new(-3.0, 3.0, n, 2, 0.4).unwrap();
        let act = ActionSpec::new(
            1.0,
            1.0,
            Potential::Harmonic { k: 0.7 },
            Potential::Zero,
            Interaction::None,
            1.0,
        )
        .unwrap();
        let k = kernel_single(&lat, &act, Subsystem::System).unwrap();
        let t = slice_matrix(&lat, act.mass_s(), act.v_s(), act.hbar());
        let dx = lat.dx();
        for b in 0..n {
            for a in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for x1 in 0..n {
                    acc += t[(b, x1)] * t[(x1, a)] * dx;
                }
                assert!((k.entry(b, a) - acc).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn propagate_with_identity_kernel() {
        let n = 10;
        let dx = 0.5;
        let id = DMatrix::<C64>::identity(n, n).scale(1.0 / dx);
        let k = Kernel::new(id).unwrap();
        let phi = DVector::from_fn(n, |i, _| c(0.1 * i as f64, -0.05 * i as f64));
        let out = propagate_wf(&k, &phi, dx).unwrap();
        for i in 0..n {
            assert!((out[i] - phi[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn free_packet_norm_and_spreading_profile() {
        let lat = Lattice1D::new(-20.0, 20.0, 128, 8, 0.125).unwrap();
        let dx = lat.dx();
        let k = kernel_single(&lat, &free_action(), Subsystem::System).unwrap();
        let phi0 = DVector::from_fn(128, |i, _| {
            let x = lat.point(i);
            c((-x * x / 2.0).exp() / std::f64::consts::PI.powf(0.25), 0.0)
        });
        let norm0: f64 = phi0.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
        let phi1 = propagate_wf(&k, &phi0, dx).unwrap();
        let norm1: f64 = phi1.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
        assert!((norm1 / norm0 - 1.0).abs() < 0.01);

        // analytic spreading packet: sigma^2(T) = 1 + T^2 for m = hbar = sigma0 = 1
        let t_total = lat.total_time();
        let sig_sq = 1.0 + t_total * t_total;
        let mut diff2 = 0.0;
        let mut ref2 = 0.0;
        for i in 0..128 {
            let x = lat.point(i);
            let expected = (-x * x / sig_sq).exp() / (std::f64::consts::PI * sig_sq).sqrt();
            diff2 += (phi1[i].norm_sqr() - expected).powi(2);
            ref2 += expected * expected;
        }
        assert!((diff2 / ref2).sqrt() < 0.01);
    }

    #[test]
    fn oscillator_ground_state_profile_is_stationary() {
        let period = std::f64::consts::TAU;
        let n_slices = 32;
        let lat = Lattice1D::new(-8.0, 8.0, 64, n_slices, period / n_slices as f64).unwrap();
        let act = ActionSpec::new(
            1.0,
            1.0,
            Potential::Harmonic { k: 1.0 },
            Potential::Zero,
            Interaction::None,
            1.0,
        )
        .unwrap();
        let k = kernel_single(&lat, &act, Subsystem::System).unwrap();
        let dx = lat.dx();
        let g = DVector::from_fn(64, |i, _| {
            let x = lat.point(i);
            c((-x * x / 2.0).exp() / std::f64::consts::PI.powf(0.25), 0.0)
        });
        let g_t = propagate_wf(&k, &g, dx).unwrap();
        let mut diff2 = 0.0;
        let mut ref2 = 0.0;
        for i in 0..64 {
            diff2 += (g_t[i].norm() - g[i].norm()).powi(2);
            ref2 += g[i].norm_sqr();
        }
        assert!((diff2 / ref2).sqrt() < 0.01);
    }

    #[test]
    fn uncoupled_relational_matrix_factorizes() {
        let lat = Lattice1D::new(-4.0, 4.0, 16, 2, 0.5).unwrap();
        let act = free_action();
        let (is, ia) = (8, 8);
        let r = relational_from_paths(&lat, &lat, &act, is, ia).unwrap();
        let ks = kernel_single(&lat, &act, Subsystem::System).unwrap();
        let ka = kernel_single(&lat, &act, Subsystem::Apparatus).unwrap();
        let outer = DMatrix::from_fn(16, 16, |b, yb| ks.entry(b, is) * ka.entry(yb, ia));
        let scale = linalg::max_abs(&outer);
        assert!(linalg::max_abs_diff(r.entries(), &outer) < 1e-10 * scale);
        assert!(crate::entangle::entropy(&r).unwrap() < 1e-8);
    }

    #[test]
    fn uncoupled_row_sums_proportional_to_kernel_column() {
        let lat = Lattice1D::new(-4.0, 4.0, 16, 2, 0.5).unwrap();
        let act = free_action();
        let (is, ia) = (8, 6);
        let r = relational_from_paths(&lat, &lat, &act, is, ia).unwrap();
        let ks = kernel_single(&lat, &act, Subsystem::System).unwrap();
        let phi = r.row_sums();
        // constant = sum of the apparatus kernel column
        let ka = kernel_single(&lat, &act, Subsystem::Apparatus).unwrap();
        let constant: C64 = (0..16).map(|yb| ka.entry(yb, ia)).sum();
        for b in 0..16 {
            let expected = ks.entry(b, is) * constant;
            assert!((phi[b] - expected).norm() < 1e-10 * constant.norm().max(1.0));
        }
    }

    #[test]
    fn coupled_relational_matrix_matches_exhaustive_path_enumeration() {
        // 3 slices = 2 interior joint positions: enumerate every lattice path
        // pair explicitly and compare against the transfer contraction.
        let n = 5;
        let lat = Lattice1D::new(-2.0, 2.0, n, 3, 0.4).unwrap();
        let act = coupled_action(0.7);
        let (is, ia) = (2, 1);
        let r = relational_from_paths(&lat, &lat, &act, is, ia).unwrap();

        let ts = slice_matrix(&lat, act.mass_s(), act.v_s(), act.hbar());
        let ta = slice_matrix(&lat, act.mass_a(), act.v_a(), act.hbar());
        let pts = lat.points();
        let rate = -lat.dt() / act.hbar();
        let hop = |xp: usize, x: usize, yp: usize, y: usize| -> C64 {
            let mid_x = 0.5 * (pts[x] + pts[xp]);
            let mid_y = 0.5 * (pts[y] + pts[yp]);
            ts[(xp, x)] * ta[(yp, y)] * C64::from_polar(1.0, rate * act.v_int().eval(mid_x, mid_y))
        };
        let w = lat.dx() * lat.dx();
        let mut brute = DMatrix::<C64>::zeros(n, n);
        for xb in 0..n {
            for yb in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for x1 in 0..n {
                    for y1 in 0..n {
                        let first = hop(x1, is, y1, ia);
                        for x2 in 0..n {
                            for y2 in 0..n {
                                acc += first * hop(x2, x1, y2, y1) * hop(xb, x2, yb, y2) * (w * w);
                            }
                        }
                    }
                }
                brute[(xb, yb)] = acc;
            }
        }
        let scale = linalg::max_abs(&brute);
        assert!(linalg::max_abs_diff(r.entries(), &brute) < 1e-10 * scale);
    }

    #[test]
    fn coupling_generates_entanglement() {
        let lat = Lattice1D::new(-4.0, 4.0, 16, 2, 0.5).unwrap();
        let r = relational_from_paths(&lat, &lat, &coupled_action(0.5), 8, 8).unwrap();
        assert!(crate::entangle::entropy(&r).unwrap() > 1e-3);
    }

    #[test]
    fn influence_functional_without_interaction_is_path_independent() {
        let lat = Lattice1D::new(-3.0, 3.0, 10, 2, 0.4).unwrap();
        let act = free_action();
        let path_a = vec![0.0, 0.5, 1.0];
        let path_b = vec![-2.0, 1.5, 0.3];
        let f1 = influence_functional(&lat, &act, &path_a, &path_a).unwrap();
        let f2 = influence_functional(&lat, &act, &path_b, &path_b).unwrap();
        assert!((f1 - f2).norm() < 1e-12 * f1.norm());
        // equals sum_{ya,yb} |K_A(yb,ya)|^2 dy^2
        let ka = kernel_single(&lat, &act, Subsystem::Apparatus).unwrap();
        let dy = lat.dx();
        let mut expected = 0.0;
        for ya in 0..10 {
            for yb in 0..10 {
                expected += ka.entry(yb, ya).norm_sqr();
            }
        }
        expected *= dy * dy;
        assert_abs_diff_eq!(f1.re, expected, epsilon = 1e-10 * expected);
        assert!(f1.im.abs() < 1e-10 * expected);
    }

    #[test]
    fn influence_functional_diagonal_is_real() {
        let lat = Lattice1D::new(-3.0, 3.0, 10, 3, 0.3).unwrap();
        let act = coupled_action(0.8);
        let path = vec![0.2, -0.4, 1.1, 0.9];
        let f = influence_functional(&lat, &act, &path, &path).unwrap();
        assert!(f.im.abs() < 1e-10 * f.re.abs().max(1.0));
        assert!(f.re > 0.0);
    }

    #[test]
    fn influence_functional_matches_brute_force_double_path_sum() {
        let n = 5;
        let lat = Lattice1D::new(-2.0, 2.0, n, 2, 0.4).unwrap();
        let act = coupled_action(0.6);
        let x_path = vec![0.5, -0.3, 1.2];
        let x_path_p = vec![-0.8, 0.1, 0.4];
        let f = influence_functional(&lat, &act, &x_path, &x_path_p).unwrap();

        let ta = slice_matrix(&lat, act.mass_a(), act.v_a(), act.hbar());
        let pts = lat.points();
        let dy = lat.dx();
        let rate = -lat.dt() / act.hbar();
        let hop = |xs: &[f64], s: usize, yp: usize, y: usize| -> C64 {
            let x_mid = 0.5 * (xs[s] + xs[s + 1]);
            let y_mid = 0.5 * (pts[y] + pts[yp]);
            ta[(yp, y)] * C64::from_polar(1.0, rate * act.v_int().eval(x_mid, y_mid))
        };
        let mut brute = C64::new(0.0, 0.0);
        for ya in 0..n {
            for yb in 0..n {
                // forward branch: sum over one interior point
                let mut fwd = C64::new(0.0, 0.0);
                let mut bwd = C64::new(0.0, 0.0);
                for y1 in 0..n {
                    fwd += hop(&x_path, 0, y1, ya) * hop(&x_path, 1, yb, y1) * dy;
                    bwd += hop(&x_path_p, 0, y1, ya) * hop(&x_path_p, 1, yb, y1) * dy;
                }
                brute += fwd * bwd.conj();
            }
        }
        brute *= dy * dy;
        assert!((f - brute).norm() < 1e-10 * brute.norm());
    }

    #[test]
    fn density_block_equal_starts_is_hermitian_psd() {
        let lat = Lattice1D::new(-3.0, 3.0, 10, 2, 0.4).unwrap();
        let act = coupled_action(0.5);
        let block = reduced_density_paths(&lat, &lat, &act, 5, 5).unwrap();
        let rho = block.to_density_matrix().unwrap();
        assert!(rho.eigenvalues_desc().last().unwrap() > &-1e-12);
    }

    #[test]
    fn density_block_matches_apparatus_summed_rr_dagger() {
        let lat = Lattice1D::new(-3.0, 3.0, 8, 2, 0.4).unwrap();
        let act = coupled_action(0.5);
        let (xa, xap) = (4, 2);
        let block = reduced_density_paths(&lat, &lat, &act, xa, xap).unwrap();
        // off-diagonal start pair: not a Hermitian density matrix
        assert!(matches!(
            block.to_density_matrix(),
            Err(Error::NotHermitian { .. })
        ));
        let dy = lat.dx();
        let mut route = DMatrix::<C64>::zeros(8, 8);
        for ya in 0..8 {
            let r1 = relational_from_paths(&lat, &lat, &act, xa, ya).unwrap();
            let r2 = relational_from_paths(&lat, &lat, &act, xap, ya).unwrap();
            route += r1.entries() * r2.entries().adjoint();
        }
        route.iter_mut().for_each(|z| *z *= dy * dy);
        let scale = linalg::max_abs(&route);
        assert!(linalg::max_abs_diff(block.matrix(), &route) < 1e-8 * scale);
    }

    #[test]
    fn uncoupled_density_block_is_rank_one() {
        let lat = Lattice1D::new(-4.0, 4.0, 12, 2, 0.5).unwrap();
        let block = reduced_density_paths(&lat, &lat, &free_action(), 6, 6).unwrap();
        let rho = block.to_density_matrix().unwrap();
        let eigs = rho.eigenvalues_desc();
        assert!(eigs[1].abs() < 1e-10 * eigs[0]);
    }

    #[test]
    fn path_density_blocks_match_reduced_density_paths() {
        let lat = Lattice1D::new(-3.0, 3.0, 6, 2, 0.4).unwrap();
        let act = coupled_action(0.5);
        let family = path_density(&lat, &lat, &act).unwrap();
        for (xa, xap) in [(3, 3), (2, 4)] {
            let block = reduced_density_paths(&lat, &lat, &act, xa, xap).unwrap();
            let fam_block = family.block(xa, xap);
            assert!(linalg::max_abs_diff(block.matrix(), &fam_block) < 1e-12);
        }
    }

    #[test]
    fn transition_delta_states_pick_diagonal_entry() {
        let lat = Lattice1D::new(-3.0, 3.0, 8, 2, 0.4).unwrap();
        let act = coupled_action(0.5);
        let family = path_density(&lat, &lat, &act).unwrap();
        let dx = lat.dx();
        let (xa_bar, xb_bar) = (3, 5);
        let delta = |site: usize| {
            DVector::from_fn(8, |i, _| {
                if i == site {
                    c(1.0 / dx, 0.0)
                } else {
                    c(0.0, 0.0)
                }
            })
        };
        let p = transition_prob_paths(&family, &delta(xa_bar), &delta(xb_bar), dx).unwrap();
        let expected = family.get(xb_bar, xb_bar, xa_bar, xa_bar);
        assert!(expected.im.abs() < 1e-12);
        assert_abs_diff_eq!(p, expected.re, epsilon = 1e-12 * expected.re.abs().max(1.0));
        assert!(p >= -1e-10);
    }

    #[test]
    fn path_sums_are_bitwise_deterministic() {
        let lat = Lattice1D::new(-4.0, 4.0, 12, 3, 0.3).unwrap();
        let act = coupled_action(0.4);
        let k1 = kernel_single(&lat, &act, Subsystem::System).unwrap();
        let k2 = kernel_single(&lat, &act, Subsystem::System).unwrap();
        assert_eq!(k1.matrix(), k2.matrix());
        let r1 = relational_from_paths(&lat, &lat, &act, 6, 6).unwrap();
        let r2 = relational_from_paths(&lat, &lat, &act, 6, 6).unwrap();
        assert_eq!(r1.entries(), r2.entries());
    }

    #[test]
    fn transition_matches_kernel_overlap_for_uncoupled_oscillator() {
        // chi = psi = discretized oscillator ground state, no coupling: the
        // trace-normalized quadrature equals the kernel-route value.
        let n = 16;
        let lat = Lattice1D::new(-6.0, 6.0, n, 2, 0.25).unwrap();
        let act = ActionSpec::new(
            1.0,
            1.0,
            Potential::Harmonic { k: 1.0 },
            Potential::Zero,
            Interaction::None,
            1.0,
        )
        .unwrap();
        let dx = lat.dx();
        let mut g = DVector::from_fn(n, |i, _| {
            let x = lat.point(i);
            c((-x * x / 2.0).exp(), 0.0)
        });
        let norm: f64 = g.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
        g.iter_mut().for_each(|z| *z /= norm.sqrt());

        let family = path_density(&lat, &lat, &act).unwrap();
        let p_raw = transition_prob_paths(&family, &g, &g, dx).unwrap();
        // trace of the chi-evolved density: psi replaced by delta sum
        let mut trace = 0.0;
        for b in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for xa in 0..n {
                for xap in 0..n {
                    acc += family.get(b, b, xa, xap) * g[xa] * g[xap].conj();
                }
            }
            assert!(acc.im.abs() < 1e-10);
            trace += acc.re * dx * dx * dx;
        }
        let p_normalized = p_raw / trace;

        let ks = kernel_single(&lat, &act, Subsystem::System).unwrap();
        let u_chi = propagate_wf(&ks, &g, dx).unwrap();
        let overlap: C64 = g
            .iter()
            .zip(u_chi.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            * dx;
        let u_norm: f64 = u_chi.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
        let p_kernel = overlap.norm_sqr() / u_norm;
        assert!((p_normalized - p_kernel).abs() < 0.02 * p_kernel);
    }
}
