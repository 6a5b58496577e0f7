//! The sixteen real Dirac matrices and the expansion of 4×4 matrices over them.
//!
//! Indices 0..=9 are symplices (`γᵀ = γ₀γγ₀`), 10..=15 cosymplices
//! (`γᵀ = -γ₀γγ₀`). `γ₀..γ₃` are the basic matrices, `γ₄..γ₆ = γ₀γ₁..γ₀γ₃`,
//! `γ₇..γ₉ = γ₁₄γ₀γ₁..γ₁₄γ₀γ₃`, `γ₁₀..γ₁₃ = γ₁₄γ₀..γ₁₄γ₃`,
//! `γ₁₄ = γ₀γ₁γ₂γ₃` and `γ₁₅ = 1`.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

use crate::{Error, Result};

pub type Matrix4 = nalgebra::Matrix4<f64>;

type IntMatrix = [[i8; 4]; 4];

/// Integer entries of all sixteen matrices, row-major.
pub const GAMMA_TABLE: [IntMatrix; 16] = [
    [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]],
    [[0, -1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    [[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]],
    [[-1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]],
    [[-1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]],
    [[0, 0, 1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, -1, 0, 0]],
    [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    [[0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]],
    [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]],
    [[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]],
    [[0, 0, 1, 0], [0, 0, 0, -1], [-1, 0, 0, 0], [0, 1, 0, 0]],
    [[0, 0, -1, 0], [0, 0, 0, -1], [-1, 0, 0, 0], [0, -1, 0, 0]],
    [[-1, 0, 0, 0], [0, -1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
    [[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]],
    [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]],
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
];

/// Index of one of the sixteen real Dirac matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GammaIndex(u8);

impl GammaIndex {
    pub fn new(k: usize) -> Result<Self> {
        if k < 16 {
            Ok(GammaIndex(k as u8))
        } else {
            Err(Error::IndexOutOfRange {
                index: k,
                limit: 16,
            })
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    pub fn is_symplex(self) -> bool {
        self.0 < 10
    }

    /// `+1` if `γₖ² = 1`, `-1` if `γₖ² = -1`. Symmetric matrices square to
    /// `+1`, skew-symmetric ones to `-1`.
    pub fn square_sign(self) -> f64 {
        match self.0 {
            0 | 7 | 8 | 9 | 10 | 14 => -1.0,
            _ => 1.0,
        }
    }

    pub fn all() -> impl Iterator<Item = GammaIndex> {
        (0..16u8).map(GammaIndex)
    }
}

/// The `k`-th real Dirac matrix.
pub fn gamma(k: GammaIndex) -> Matrix4 {
    basis(k.get())
}

pub(crate) fn basis(k: usize) -> Matrix4 {
    let t = &GAMMA_TABLE[k];
    Matrix4::from_fn(|i, j| t[i][j] as f64)
}

/// Expansion coefficients of a 4×4 matrix over the Dirac basis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RdmCoefficients(pub [f64; 16]);

impl RdmCoefficients {
    /// Coefficients with only the ten symplex entries set.
    pub fn from_symplex_coefficients(f: [f64; 10]) -> Self {
        let mut c = [0.0; 16];
        c[..10].copy_from_slice(&f);
        RdmCoefficients(c)
    }

    pub fn as_array(&self) -> &[f64; 16] {
        &self.0
    }

    pub fn to_matrix(&self) -> Matrix4 {
        from_coefficients(self)
    }

    /// Largest magnitude among the six cosymplex coefficients.
    pub fn max_cosymplex(&self) -> f64 {
        self.0[10..].iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Index<usize> for RdmCoefficients {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl IndexMut<usize> for RdmCoefficients {
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.0[k]
    }
}

/// `mₖ = Tr(γₖ²)·Tr((Mγₖ + γₖM)/32)`.
pub fn rdm_coefficients(m: &Matrix4) -> RdmCoefficients {
    let mut c = [0.0; 16];
    for k in GammaIndex::all() {
        let g = gamma(k);
        let tr_sq = 4.0 * k.square_sign();
        c[k.get()] = tr_sq * (m * g + g * m).trace() / 32.0;
    }
    RdmCoefficients(c)
}

/// `Σ cₖ γₖ`.
pub fn from_coefficients(c: &RdmCoefficients) -> Matrix4 {
    let mut m = Matrix4::zeros();
    for (k, t) in GAMMA_TABLE.iter().enumerate() {
        let ck = c[k];
        if ck == 0.0 {
            continue;
        }
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] += ck * t[i][j] as f64;
            }
        }
    }
    m
}

pub fn gamma0() -> Matrix4 {
    basis(0)
}

/// `‖Mᵀ − γ₀Mγ₀‖_F`.
pub fn symplex_residual(m: &Matrix4) -> f64 {
    let g0 = gamma0();
    (m.transpose() - g0 * m * g0).norm()
}

/// `‖Mᵀ + γ₀Mγ₀‖_F`.
pub fn cosymplex_residual(m: &Matrix4) -> f64 {
    let g0 = gamma0();
    (m.transpose() + g0 * m * g0).norm()
}

pub fn is_symplex(m: &Matrix4, tol: f64) -> bool {
    symplex_residual(m) <= tol * m.norm().max(1.0)
}

pub fn is_cosymplex(m: &Matrix4, tol: f64) -> bool {
    cosymplex_residual(m) <= tol * m.norm().max(1.0)
}

/// Split `M` into its symplex part `(M + γ₀Mᵀγ₀)/2` and cosymplex part
/// `(M − γ₀Mᵀγ₀)/2`.
pub fn symplex_cosymplex_split(m: &Matrix4) -> (Matrix4, Matrix4) {
    let g0 = gamma0();
    let mirrored = g0 * m.transpose() * g0;
    ((m + mirrored) * 0.5, (m - mirrored) * 0.5)
}

/// The `2n×2n` symplectic unit matrix for `(q₁, p₁, …, qₙ, pₙ)` ordering.
pub fn gamma0_n(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

fn check_even_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() % 2 != 0 || m.nrows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "expected a square matrix of even dimension, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows() / 2)
}

/// `‖Fᵀ − γ₀Fγ₀‖_F` for any even dimension.
pub fn symplex_residual_n(m: &DMatrix<f64>) -> Result<f64> {
    let n = check_even_square(m)?;
    let g0 = gamma0_n(n);
    Ok((m.transpose() - &g0 * m * &g0).norm())
}

/// `‖Mγ₀Mᵀ − γ₀‖_F` for any even dimension.
pub fn symplectic_residual_n(m: &DMatrix<f64>) -> Result<f64> {
    let n = check_even_square(m)?;
    let g0 = gamma0_n(n);
    Ok((m * &g0 * m.transpose() - g0).norm())
}

/// Symplex / cosymplex split for any even dimension.
pub fn split_n(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = check_even_square(m)?;
    let g0 = gamma0_n(n);
    let mirrored = &g0 * m.transpose() * &g0;
    Ok(((m + &mirrored) * 0.5, (m - mirrored) * 0.5))
}

pub(crate) fn to_dyn(m: &Matrix4) -> DMatrix<f64> {
    DMatrix::from_column_slice(4, 4, m.as_slice())
}

pub(crate) fn to_fixed(m: &DMatrix<f64>) -> Matrix4 {
    Matrix4::from_column_slice(m.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn int_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
        let mut c = [[0i8; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        c
    }

    fn random_matrix(rng: &mut ChaCha8Rng) -> Matrix4 {
        Matrix4::from_fn(|_, _| rng.random_range(-1.0..1.0))
    }

    fn random_symplex(rng: &mut ChaCha8Rng) -> Matrix4 {
        let a = random_matrix(rng);
        gamma0() * (a + a.transpose())
    }

    #[test]
    fn products_match_table() {
        let g = &GAMMA_TABLE;
        let g14 = int_mul(&int_mul(&int_mul(&g[0], &g[1]), &g[2]), &g[3]);
        assert_eq!(g14, g[14]);
        for k in 1..=3 {
            assert_eq!(int_mul(&g[0], &g[k]), g[3 + k]);
            assert_eq!(int_mul(&int_mul(&g[14], &g[0]), &g[k]), g[6 + k]);
            assert_eq!(int_mul(&g[14], &g[k]), g[10 + k]);
        }
        assert_eq!(int_mul(&g[14], &g[0]), g[10]);
        assert_eq!(int_mul(&g[2], &g[3]), g[7]);
        assert_eq!(int_mul(&g[3], &g[1]), g[8]);
        assert_eq!(int_mul(&g[1], &g[2]), g[9]);
    }

    #[test]
    fn squares_and_signature() {
        for k in GammaIndex::all() {
            let g = gamma(k);
            assert_eq!(g * g, Matrix4::identity() * k.square_sign());
            let symmetric = g == g.transpose();
            assert_eq!(symmetric, k.square_sign() > 0.0, "k = {}", k.get());
            assert_eq!(is_symplex(&g, 1e-12), k.is_symplex());
            assert_eq!(is_cosymplex(&g, 1e-12), !k.is_symplex());
        }
    }

    #[test]
    fn basic_matrices_anticommute() {
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    let (a, b) = (basis(i), basis(j));
                    assert_eq!(a * b + b * a, Matrix4::zeros());
                }
            }
        }
    }

    #[test]
    fn literal_examples() {
        let g0 = gamma(GammaIndex::new(0).unwrap());
        let j = nalgebra::Matrix2::new(0.0, 1.0, -1.0, 0.0);
        assert_eq!(g0.fixed_view::<2, 2>(0, 0), j);
        assert_eq!(g0.fixed_view::<2, 2>(2, 2), j);
        assert_eq!(gamma(GammaIndex::new(15).unwrap()), Matrix4::identity());
        assert!(GammaIndex::new(16).is_err());
        assert!(!is_symplex(&basis(14), 1e-10));
        assert!(is_symplex(&basis(3), 1e-10));
        assert!(!is_cosymplex(&basis(5), 1e-10));
    }

    #[test]
    fn coefficients_of_basis_elements() {
        for k in 0..16 {
            let c = rdm_coefficients(&basis(k));
            for m in 0..16 {
                assert_eq!(c[m], if m == k { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn symplex_from_first_ten_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f: [f64; 10] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let m = RdmCoefficients::from_symplex_coefficients(f).to_matrix();
        assert!(is_symplex(&m, 1e-12));
        assert!(rdm_coefficients(&m).max_cosymplex() < 1e-14);
    }

    #[test]
    fn closure_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let s1 = random_symplex(&mut rng);
            let s2 = random_symplex(&mut rng);
            let (_, c) = symplex_cosymplex_split(&random_matrix(&mut rng));
            let (_, c2) = symplex_cosymplex_split(&random_matrix(&mut rng));
            assert!(is_symplex(&(s1 * s2 - s2 * s1), 1e-12));
            assert!(is_cosymplex(&(s1 * s2 + s2 * s1), 1e-12));
            assert!(is_symplex(&(c * c2 - c2 * c), 1e-12));
            assert!(is_cosymplex(&(c * c2 + c2 * c), 1e-12));
            assert!(is_symplex(&(c * s1 + s1 * c), 1e-12));
            assert!(is_cosymplex(&(c * s1 - s1 * c), 1e-12));
        }
    }

    #[test]
    fn split_of_symplex_and_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = random_symplex(&mut rng);
        let (ms, mc) = symplex_cosymplex_split(&s);
        assert!((ms - s).norm() < 1e-15);
        assert!(mc.norm() < 1e-15);

        let f = to_dyn(&(random_symplex(&mut rng) * 0.3));
        let m = to_fixed(&crate::transform::matrix_exponential(&f, 1.0).unwrap().0);
        let (ms, mc) = symplex_cosymplex_split(&m);
        let minv = m.try_inverse().unwrap();
        assert!((ms - (m - minv) * 0.5).norm() < 1e-12);
        assert!((mc - (m + minv) * 0.5).norm() < 1e-12);
    }

    #[test]
    fn split_of_random_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_matrix(&mut rng);
        let (s, c) = symplex_cosymplex_split(&m);
        assert!((s + c - m).norm() < 1e-15);
        assert!(is_symplex(&s, 1e-12));
        assert!(is_cosymplex(&c, 1e-12));
    }

    #[test]
    fn n_dimensional_helpers() {
        let g = gamma0_n(2);
        assert_eq!(to_fixed(&g), gamma0());
        assert!(symplex_residual_n(&DMatrix::zeros(3, 3)).is_err());
        let id = DMatrix::<f64>::identity(6, 6);
        assert_eq!(symplectic_residual_n(&id).unwrap(), 0.0);
        assert!(symplex_residual_n(&id).unwrap() > 1.0);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn coeffs() -> impl Strategy<Value = [f64; 16]> {
            proptest::array::uniform16(-10.0f64..10.0)
        }

        proptest! {
            #[test]
            fn roundtrip_from_coefficients(c in coeffs()) {
                let back = rdm_coefficients(&from_coefficients(&RdmCoefficients(c)));
                for k in 0..16 {
                    prop_assert!((back[k] - c[k]).abs() < 1e-13);
                }
            }

            #[test]
            fn roundtrip_from_matrix(e in proptest::array::uniform16(-10.0f64..10.0)) {
                let m = Matrix4::from_column_slice(&e);
                let back = from_coefficients(&rdm_coefficients(&m));
                prop_assert!((back - m).amax() < 1e-13);
            }

            #[test]
            fn symplex_has_no_cosymplex_part(c in proptest::array::uniform10(-5.0f64..5.0)) {
                let m = RdmCoefficients::from_symplex_coefficients(c).to_matrix();
                prop_assert!(is_symplex(&m, PREDICATE));
                prop_assert!(rdm_coefficients(&m).max_cosymplex() < 1e-12);
            }
        }

        use crate::tol::PREDICATE;
    }
}
