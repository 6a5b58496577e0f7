//! Helpers shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix4, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use symdec::EmeqState;

/// Eigenvalues from an unrelated general eigensolver.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    let fm = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    fm.eigenvalues()
        .expect("eigenvalue oracle failed")
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect()
}

pub fn eigenvalues4(m: &Matrix4<f64>) -> Vec<Complex64> {
    eigenvalues(&to_dyn(m))
}

pub fn to_dyn(m: &Matrix4<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

pub fn to_fixed(m: &DMatrix<f64>) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| m[(i, j)])
}

/// Largest distance under a greedy nearest matching of two spectra.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut rest = b.to_vec();
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = rest
            .iter()
            .enumerate()
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|u, v| u.1.total_cmp(&v.1))
            .expect("spectra of equal length");
        rest.remove(k);
        worst = worst.max(d);
    }
    worst
}

pub fn random_state(rng: &mut ChaCha8Rng) -> EmeqState {
    let mut v = || {
        Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
    };
    let (p, e, b) = (v(), v(), v());
    EmeqState {
        energy: rng.random_range(-1.0..1.0),
        momentum: p,
        electric: e,
        magnetic: b,
    }
}

/// `γ₀·A` with `A` symmetric and diagonally dominant, so all eigenvalues are
/// imaginary.
pub fn random_stable_force(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let dim = 2 * n;
    let mut a = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let x: f64 = rng.random();
            let v = if i == j { n as f64 + x } else { x - 0.5 };
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    symdec::dirac::gamma0_n(n) * a
}

/// Exact integer product of two table entries.
pub fn int_mul(a: &[[i8; 4]; 4], b: &[[i8; 4]; 4]) -> [[i8; 4]; 4] {
    let mut c = [[0i8; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}
