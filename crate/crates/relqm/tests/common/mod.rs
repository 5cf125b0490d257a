//! Shared helpers for integration tests: seeded random inputs and the
//! explicit weight-enumeration oracles.
//!
//! Each integration test binary compiles this module separately and uses a
//! subset of it.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use relqm::prob::{weight, OutcomeSet};
use relqm::relcore::{NormMode, RelationalMatrix};
use relqm::C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, m, |_, _| random_complex(rng))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| random_complex(rng))
}

/// Random rank-one matrix with a row-sum vector bounded away from zero, so
/// coherent-mode construction is well conditioned.
pub fn random_product_matrix(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DMatrix<C64> {
    loop {
        let cv = random_vector(rng, n);
        let dv = random_vector(rng, m);
        let dsum: C64 = dv.iter().sum();
        let cnorm: f64 = cv.iter().map(|z| z.norm_sqr()).sum();
        if dsum.norm() > 0.2 && cnorm > 0.05 {
            return DMatrix::from_fn(n, m, |i, j| cv[i] * dv[j]);
        }
    }
}

/// Random unitary via QR of a dense complex matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
    loop {
        let a = random_matrix(rng, n, n);
        let qr = a.qr();
        let q = qr.q();
        let gram = q.adjoint() * &q;
        let id = DMatrix::<C64>::identity(n, n);
        let dev = (&gram - &id).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev < 1e-10 {
            return q;
        }
    }
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
    let a = random_matrix(rng, n, n);
    (&a + a.adjoint()).scale(0.5)
}

pub fn rel(entries: DMatrix<C64>, mode: NormMode) -> RelationalMatrix {
    let (n, m) = entries.shape();
    RelationalMatrix::new(n, m, entries, mode).unwrap()
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn flatten_system_major(m: &DMatrix<C64>) -> DVector<C64> {
    let (n, cols) = m.shape();
    DVector::from_iterator(
        n * cols,
        (0..n)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)]),
    )
}

fn omega_entrywise(r: &RelationalMatrix) -> f64 {
    r.frobenius_norm_sq()
}

fn omega_rowsum(r: &RelationalMatrix) -> f64 {
    r.coherent_norm_sq()
}

/// Enumeration oracle for the joint probability: the single configuration
/// |a_j⟩→|s_i⟩→|s_i⟩→|a_j⟩.
pub fn enum_joint(r: &RelationalMatrix, i: usize, j: usize) -> f64 {
    weight(r, j, i, i, j).unwrap().re / omega_entrywise(r)
}

/// Enumeration oracle for incoherent counting: diagonal configurations only
/// (m = n in the outcome set, k = j).
pub fn enum_incoherent(r: &RelationalMatrix, outcome: &OutcomeSet) -> f64 {
    let mut acc = 0.0;
    for &i in outcome.indices() {
        for j in 0..r.n_app() {
            acc += weight(r, j, i, i, j).unwrap().re;
        }
    }
    acc / omega_entrywise(r)
}

/// Enumeration oracle for the apparatus-side probability.
pub fn enum_apparatus(r: &RelationalMatrix, j: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..r.n_sys() {
        acc += weight(r, j, i, i, j).unwrap().re;
    }
    acc / omega_entrywise(r)
}

/// Enumeration oracle for coherent counting: every configuration with both
/// system indices in the outcome set and all apparatus index pairs, i.e. the
/// full interference sum, with the superposed-state proportionality 1/k.
pub fn enum_coherent(r: &RelationalMatrix, outcome: &OutcomeSet) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for &m in outcome.indices() {
        for &n in outcome.indices() {
            for j in 0..r.n_app() {
                for k in 0..r.n_app() {
                    acc += weight(r, j, m, n, k).unwrap();
                }
            }
        }
    }
    assert!(
        acc.im.abs() < 1e-12 * acc.re.abs().max(1.0),
        "coherent weight sum must be real"
    );
    acc.re / (outcome.len() as f64 * omega_rowsum(r))
}

/// Runs one acceptance criterion, printing a single pass/fail line.
pub fn criterion(name: &str, body: impl FnOnce() -> Result<(), String>) {
    let start = std::time::Instant::now();
    match body() {
        Ok(()) => {
            println!(
                "acceptance: {name} ... PASS ({:.2}s)",
                start.elapsed().as_secs_f64()
            );
        }
        Err(msg) => {
            println!(
                "acceptance: {name} ... FAIL ({:.2}s): {msg}",
                start.elapsed().as_secs_f64()
            );
            panic!("acceptance criterion failed: {name}: {msg}");
        }
    }
}

#[macro_export]
macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($arg)+));
        }
    };
}
