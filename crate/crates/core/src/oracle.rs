//! Independent eigensolver used by the unit tests.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dirac::Matrix4;

pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    let fm = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    fm.eigenvalues()
        .expect("eigenvalue oracle failed")
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect()
}

pub fn eigenvalues4(m: &Matrix4) -> Vec<Complex64> {
    eigenvalues(&crate::dirac::to_dyn(m))
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
