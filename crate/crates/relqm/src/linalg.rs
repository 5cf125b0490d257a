//! Internal dense complex linear-algebra helpers.

use nalgebra::{DMatrix, DVector};

use crate::C64;

pub(crate) fn is_finite_matrix(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn is_finite_vector(v: &DVector<C64>) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub(crate) fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Max deviation from Hermiticity, max_ij |m_ij - conj(m_ji)|.
pub(crate) fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn unitarity_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let gram = m.adjoint() * m;
    let id = DMatrix::<C64>::identity(n, n);
    max_abs_diff(&gram, &id)
}

/// Eigenvalues and orthonormal eigenvectors of a Hermitian matrix, sorted by
/// descending eigenvalue. Input is symmetrized first so callers may pass
/// matrices that are Hermitian only up to rounding.
pub(crate) fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::new(herm);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub(crate) fn hermitian_eigenvalues_desc(m: &DMatrix<C64>) -> Vec<f64> {
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::new(herm);
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    values
}
