//! Symplectic similarity transformations.
//!
//! The elementary transforms are `R_b(ε) = exp(γ_b·ε/2)` for the ten symplex
//! generators. Rotations (`γ_b² = −1`, b ∈ {0, 7, 8, 9}) and boosts
//! (`γ_b² = +1`, b ∈ {1..6}) have the closed forms
//! `cos(ε/2) + γ_b sin(ε/2)` and `cosh(ε/2) + γ_b sinh(ε/2)`.
//! A [`SymplecticTransform`] carries `R`, `R⁻¹` and a replayable log of the
//! steps that produced it.

use nalgebra::DMatrix;

use crate::dirac::{self, basis, gamma0_n, Matrix4};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    Rotation,
    Boost,
}

/// One of the ten symplex generators `γ₀..γ₉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GeneratorKind(u8);

impl GeneratorKind {
    pub fn new(index: u8) -> Result<Self> {
        if index < 10 {
            Ok(GeneratorKind(index))
        } else {
            Err(Error::IndexOutOfRange {
                index: index as usize,
                limit: 10,
            })
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn signature(self) -> Signature {
        match self.0 {
            0 | 7 | 8 | 9 => Signature::Rotation,
            _ => Signature::Boost,
        }
    }
}

/// A single replayable entry of a transform log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// `R_b(ε)`; `pairs = Some((i, j))` when the 4×4 transform acts on the
    /// coordinate pairs `i < j` of a larger system.
    Generator {
        generator: u8,
        angle: f64,
        pairs: Option<(usize, usize)>,
    },
    /// Plane rotation `[[cos θ, sin θ], [−sin θ, cos θ]]` of a single pair.
    PairRotation { pair: usize, angle: f64 },
    /// `Diag(e^{−s}, e^{s})` on a single pair.
    PairScaling { pair: usize, exponent: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    r: DMatrix<f64>,
    r_inv: DMatrix<f64>,
    log: Vec<Step>,
}

impl SymplecticTransform {
    pub fn identity(dim: usize) -> Self {
        SymplecticTransform {
            r: DMatrix::identity(dim, dim),
            r_inv: DMatrix::identity(dim, dim),
            log: Vec::new(),
        }
    }

    /// Build a transform from `R` and `R⁻¹` without checking them.
    pub fn from_parts(r: DMatrix<f64>, r_inv: DMatrix<f64>, log: Vec<Step>) -> Self {
        SymplecticTransform { r, r_inv, log }
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn inverse_matrix(&self) -> &DMatrix<f64> {
        &self.r_inv
    }

    pub fn log(&self) -> &[Step] {
        &self.log
    }

    pub fn inverse(&self) -> Self {
        SymplecticTransform {
            r: self.r_inv.clone(),
            r_inv: self.r.clone(),
            log: self.log.iter().rev().map(|s| s.inverted()).collect(),
        }
    }

    /// `‖Rγ₀Rᵀ − γ₀‖_F`.
    pub fn symplectic_residual(&self) -> f64 {
        let g0 = gamma0_n(self.dim() / 2);
        (&self.r * &g0 * self.r.transpose() - g0).norm()
    }

    /// `‖R·R⁻¹ − 1‖_F`.
    pub fn inverse_residual(&self) -> f64 {
        let n = self.dim();
        (&self.r * &self.r_inv - DMatrix::<f64>::identity(n, n)).norm()
    }

    /// `R·F·R⁻¹`.
    pub fn apply(&self, f: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if f.nrows() != self.dim() || f.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: f.nrows(),
            });
        }
        Ok(&self.r * f * &self.r_inv)
    }

    /// `R·F·R⁻¹` for a 4×4 transform.
    ///
    /// # Panics
    /// If the transform is not 4×4.
    pub fn apply4(&self, f: &Matrix4) -> Matrix4 {
        assert_eq!(self.dim(), 4, "apply4 needs a 4x4 transform");
        let r = dirac::to_fixed(&self.r);
        let ri = dirac::to_fixed(&self.r_inv);
        r * f * ri
    }

    /// `self` followed by `next`: `R = R_next·R_self`.
    pub fn then(&self, next: &SymplecticTransform) -> Result<Self> {
        compose(next, self)
    }

    /// Rebuild a transform of dimension `dim` by replaying a log.
    pub fn replay(log: &[Step], dim: usize) -> Result<Self> {
        let mut t = SymplecticTransform::identity(dim);
        for step in log {
            let s = step_transform(step, dim)?;
            t = compose(&s, &t)?;
        }
        Ok(t)
    }
}

impl Step {
    fn inverted(&self) -> Step {
        match *self {
            Step::Generator {
                generator,
                angle,
                pairs,
            } => Step::Generator {
                generator,
                angle: -angle,
                pairs,
            },
            Step::PairRotation { pair, angle } => Step::PairRotation {
                pair,
                angle: -angle,
            },
            Step::PairScaling { pair, exponent } => Step::PairScaling {
                pair,
                exponent: -exponent,
            },
        }
    }
}

fn step_transform(step: &Step, dim: usize) -> Result<SymplecticTransform> {
    let n = dim / 2;
    match *step {
        Step::Generator {
            generator,
            angle,
            pairs,
        } => {
            let t = basic_transform(GeneratorKind::new(generator)?, angle);
            match pairs {
                None if dim == 4 => Ok(t),
                None => Err(Error::DimensionMismatch {
                    expected: 4,
                    found: dim,
                }),
                Some((i, j)) => embed_4x4(&t, i, j, n),
            }
        }
        Step::PairRotation { pair, angle } => pair_rotation(n, pair, angle),
        Step::PairScaling { pair, exponent } => pair_scaling(n, pair, exponent),
    }
}

/// `R_b(ε) = exp(γ_b·ε/2)` in closed form.
pub fn basic_transform(b: GeneratorKind, angle: f64) -> SymplecticTransform {
    let g = basis(b.index() as usize);
    let half = angle / 2.0;
    let (c, s) = match b.signature() {
        Signature::Rotation => (half.cos(), half.sin()),
        Signature::Boost => (half.cosh(), half.sinh()),
    };
    let id = Matrix4::identity();
    let r = id * c + g * s;
    let r_inv = id * c - g * s;
    SymplecticTransform {
        r: dirac::to_dyn(&r),
        r_inv: dirac::to_dyn(&r_inv),
        log: vec![Step::Generator {
            generator: b.index(),
            angle,
            pairs: None,
        }],
    }
}

/// `R₂·R₁` with `R⁻¹ = R₁⁻¹·R₂⁻¹` and the logs concatenated.
pub fn compose(t2: &SymplecticTransform, t1: &SymplecticTransform) -> Result<SymplecticTransform> {
    if t1.dim() != t2.dim() {
        return Err(Error::DimensionMismatch {
            expected: t1.dim(),
            found: t2.dim(),
        });
    }
    let mut log = t1.log.clone();
    log.extend_from_slice(&t2.log);
    Ok(SymplecticTransform {
        r: &t2.r * &t1.r,
        r_inv: &t1.r_inv * &t2.r_inv,
        log,
    })
}

/// `R·F·R⁻¹`.
pub fn apply_similarity(t: &SymplecticTransform, f: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    t.apply(f)
}

/// Write a 4×4 transform into the 2×2 blocks `(ii, ij, ji, jj)` of the
/// `2n×2n` identity.
pub fn embed_4x4(t: &SymplecticTransform, i: usize, j: usize, n: usize) -> Result<SymplecticTransform> {
    if t.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: t.dim(),
        });
    }
    if i >= j || j >= n {
        return Err(Error::IndexOutOfRange {
            index: j.max(i),
            limit: n,
        });
    }
    let idx = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1];
    let embed = |m: &DMatrix<f64>| {
        let mut out = DMatrix::identity(2 * n, 2 * n);
        for (a, &ra) in idx.iter().enumerate() {
            for (b, &cb) in idx.iter().enumerate() {
                out[(ra, cb)] = m[(a, b)];
            }
        }
        out
    };
    let log = embedded_log(&t.log, i, j);
    Ok(SymplecticTransform {
        r: embed(&t.r),
        r_inv: embed(&t.r_inv),
        log,
    })
}

/// Rewrite a 4×4 log so that it addresses pairs `i` and `j` of a larger system.
pub(crate) fn embedded_log(log: &[Step], i: usize, j: usize) -> Vec<Step> {
    // a 4×4 log can only address pairs 0 and 1
    let map = |p: usize| if p == 0 { i } else { j };
    log.iter()
        .map(|s| match *s {
            Step::Generator {
                generator,
                angle,
                pairs,
            } => Step::Generator {
                generator,
                angle,
                pairs: Some(pairs.map_or((i, j), |(a, b)| (map(a), map(b)))),
            },
            Step::PairRotation { pair, angle } => Step::PairRotation {
                pair: map(pair),
                angle,
            },
            Step::PairScaling { pair, exponent } => Step::PairScaling {
                pair: map(pair),
                exponent,
            },
        })
        .collect()
}

fn pair_block(n: usize, pair: usize, block: [[f64; 2]; 2], inv: [[f64; 2]; 2]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if pair >= n {
        return Err(Error::IndexOutOfRange {
            index: pair,
            limit: n,
        });
    }
    let mut r = DMatrix::identity(2 * n, 2 * n);
    let mut ri = DMatrix::identity(2 * n, 2 * n);
    for a in 0..2 {
        for b in 0..2 {
            r[(2 * pair + a, 2 * pair + b)] = block[a][b];
            ri[(2 * pair + a, 2 * pair + b)] = inv[a][b];
        }
    }
    Ok((r, ri))
}

/// Rotation `[[cos θ, sin θ], [−sin θ, cos θ]]` acting on one pair.
pub fn pair_rotation(n: usize, pair: usize, angle: f64) -> Result<SymplecticTransform> {
    let (c, s) = (angle.cos(), angle.sin());
    let (r, r_inv) = pair_block(n, pair, [[c, s], [-s, c]], [[c, -s], [s, c]])?;
    Ok(SymplecticTransform {
        r,
        r_inv,
        log: vec![Step::PairRotation { pair, angle }],
    })
}

/// Scaling `Diag(e^{−s}, e^{s})` acting on one pair.
pub fn pair_scaling(n: usize, pair: usize, exponent: f64) -> Result<SymplecticTransform> {
    let (a, b) = ((-exponent).exp(), exponent.exp());
    let (r, r_inv) = pair_block(n, pair, [[a, 0.0], [0.0, b]], [[b, 0.0], [0.0, a]])?;
    Ok(SymplecticTransform {
        r,
        r_inv,
        log: vec![Step::PairScaling { pair, exponent }],
    })
}

/// `exp(F·s)` by scaling and squaring with a truncated Taylor series.
///
/// Returns the matrix and its symplecticity residual `‖Mγ₀Mᵀ − γ₀‖_F`
/// (NaN for odd dimensions). The residual is reported, never repaired.
pub fn matrix_exponential(f: &DMatrix<f64>, s: f64) -> Result<(DMatrix<f64>, f64)> {
    let dim = f.nrows();
    if f.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: f.ncols(),
        });
    }
    let a = f * s;
    let norm1 = (0..dim)
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if !norm1.is_finite() {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let squarings = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings);

    let mut sum = DMatrix::<f64>::identity(dim, dim);
    let mut term = DMatrix::<f64>::identity(dim, dim);
    for k in 1..=30 {
        term = &term * &scaled / k as f64;
        sum += &term;
        if term.amax() <= f64::EPSILON * 1e-3 * sum.amax() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    let residual = if dim % 2 == 0 {
        dirac::symplectic_residual_n(&sum)?
    } else {
        f64::NAN
    };
    Ok((sum, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emeq::{lax_invariants, EmeqState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn gk(b: u8) -> GeneratorKind {
        GeneratorKind::new(b).unwrap()
    }

    fn random_symplex(rng: &mut ChaCha8Rng) -> Matrix4 {
        let a = Matrix4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        basis(0) * (a + a.transpose())
    }

    /// Plain Taylor series without scaling, for small arguments only.
    fn taylor(m: &Matrix4) -> Matrix4 {
        let mut sum = Matrix4::identity();
        let mut term = Matrix4::identity();
        for k in 1..40 {
            term = term * m / k as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn signatures() {
        for b in 0..10 {
            let g = basis(b as usize);
            let expected = if g * g == -Matrix4::identity() {
                Signature::Rotation
            } else {
                Signature::Boost
            };
            assert_eq!(gk(b).signature(), expected);
        }
        assert!(GeneratorKind::new(10).is_err());
    }

    #[test]
    fn zero_angle_is_identity() {
        let t = basic_transform(gk(0), 0.0);
        assert_eq!(t.matrix(), &DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn half_turn_about_x() {
        let t = basic_transform(gk(7), PI);
        assert!((dirac::to_fixed(t.matrix()) - basis(7)).amax() < 1e-15);
        assert!(t.symplectic_residual() < 1e-15);
    }

    #[test]
    fn closed_form_matches_series() {
        for b in 0..10 {
            let eps = 0.37;
            let t = basic_transform(gk(b), eps);
            let series = taylor(&(basis(b as usize) * (eps / 2.0)));
            assert!((dirac::to_fixed(t.matrix()) - series).amax() < 1e-12, "b = {b}");
        }
    }

    #[test]
    fn every_generator_is_symplectic_and_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            for b in 0..10 {
                let eps = rng.random_range(-3.0..3.0);
                let t = basic_transform(gk(b), eps);
                assert!(t.symplectic_residual() < 1e-10);
                assert!(t.inverse_residual() < 1e-12);
                let back = basic_transform(gk(b), -eps);
                let prod = t.matrix() * back.matrix();
                assert!((prod - DMatrix::<f64>::identity(4, 4)).amax() < 1e-14);
            }
        }
    }

    #[test]
    fn rotation_about_x_rotates_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_symplex(&mut rng);
        let s = EmeqState::from_coefficients(&dirac::rdm_coefficients(&f));
        let eps = 0.6;
        let s2 = EmeqState::from_coefficients(&dirac::rdm_coefficients(
            &basic_transform(gk(7), eps).apply4(&f),
        ));
        let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Vector3::x_axis(), eps);
        // the sense of rotation is fixed by the generator; accept either
        let rot_inv = rot.inverse();
        let matches = |r: &nalgebra::Rotation3<f64>| {
            (r * s.momentum - s2.momentum).amax() < 1e-12
                && (r * s.electric - s2.electric).amax() < 1e-12
                && (r * s.magnetic - s2.magnetic).amax() < 1e-12
        };
        assert!(matches(&rot) || matches(&rot_inv));
        assert!((s.energy - s2.energy).abs() < 1e-12);
    }

    #[test]
    fn similarity_preserves_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let f = random_symplex(&mut rng);
            let b = rng.random_range(0..10u8);
            let t = basic_transform(gk(b), rng.random_range(-1.0..1.0));
            let g = t.apply4(&f);
            assert!(dirac::is_symplex(&g, 1e-10));
            let (i, j) = (lax_invariants(&f), lax_invariants(&g));
            for k in 0..4 {
                assert!((i[k] - j[k]).abs() <= 1e-9 * i[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn one_parameter_subgroup() {
        let t = compose(&basic_transform(gk(7), 0.3), &basic_transform(gk(7), 0.5)).unwrap();
        let direct = basic_transform(gk(7), 0.8);
        assert!((t.matrix() - direct.matrix()).amax() < 1e-15);
        assert_eq!(t.log().len(), 2);
    }

    #[test]
    fn compose_with_inverse() {
        let t = basic_transform(gk(5), 0.9);
        let id = compose(&t.inverse(), &t).unwrap();
        assert!((id.matrix() - DMatrix::<f64>::identity(4, 4)).amax() < 1e-14);
        assert!(compose(&t, &SymplecticTransform::identity(6)).is_err());
    }

    #[test]
    fn apply_checks_dimension() {
        let t = basic_transform(gk(1), 0.1);
        assert!(matches!(
            t.apply(&DMatrix::zeros(6, 6)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn embedding() {
        let id = embed_4x4(&SymplecticTransform::identity(4), 0, 1, 3).unwrap();
        assert_eq!(id.matrix(), &DMatrix::<f64>::identity(6, 6));

        let t = embed_4x4(&basic_transform(gk(7), 0.4), 0, 1, 3).unwrap();
        for k in 4..6 {
            let mut e = nalgebra::DVector::zeros(6);
            e[k] = 1.0;
            assert_eq!(t.matrix() * &e, e);
        }
        assert!(t.symplectic_residual() < 1e-14);
        assert!(embed_4x4(&t, 0, 1, 3).is_err());
        assert!(embed_4x4(&basic_transform(gk(0), 0.1), 2, 1, 3).is_err());
        assert!(embed_4x4(&basic_transform(gk(0), 0.1), 1, 3, 3).is_err());
    }

    #[test]
    fn embedded_transform_preserves_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = DMatrix::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0));
        let f = gamma0_n(3) * (&a + a.transpose());
        let t = embed_4x4(&basic_transform(gk(2), 0.7), 0, 2, 3).unwrap();
        let g = t.apply(&f).unwrap();
        let d = crate::oracle::spectrum_distance(
            &crate::oracle::eigenvalues(&f),
            &crate::oracle::eigenvalues(&g),
        );
        assert!(d < 1e-9);
    }

    #[test]
    fn replay_reproduces() {
        let t = embed_4x4(
            &compose(&basic_transform(gk(3), 0.2), &basic_transform(gk(8), -0.4)).unwrap(),
            1,
            2,
            3,
        )
        .unwrap();
        let t = compose(&pair_scaling(3, 0, 0.3).unwrap(), &t).unwrap();
        let t = compose(&pair_rotation(3, 2, 1.1).unwrap(), &t).unwrap();
        let replayed = SymplecticTransform::replay(t.log(), 6).unwrap();
        assert!((replayed.matrix() - t.matrix()).amax() < 1e-15);
        assert!((replayed.inverse_matrix() - t.inverse_matrix()).amax() < 1e-15);
    }

    #[test]
    fn exponential_of_zero() {
        let (m, res) = matrix_exponential(&DMatrix::zeros(4, 4), 1.0).unwrap();
        assert_eq!(m, DMatrix::<f64>::identity(4, 4));
        assert_eq!(res, 0.0);
    }

    #[test]
    fn exponential_of_rotation_blocks() {
        let (w1, w2, s) = (0.8, -2.5, 1.7);
        let mut f = DMatrix::zeros(4, 4);
        f[(0, 1)] = w1;
        f[(1, 0)] = -w1;
        f[(2, 3)] = w2;
        f[(3, 2)] = -w2;
        let (m, res) = matrix_exponential(&f, s).unwrap();
        for (k, w) in [(0, w1), (2, w2)] {
            let (c, sn) = ((w * s).cos(), (w * s).sin());
            assert!((m[(k, k)] - c).abs() < 1e-13);
            assert!((m[(k, k + 1)] - sn).abs() < 1e-13);
            assert!((m[(k + 1, k)] + sn).abs() < 1e-13);
            assert!((m[(k + 1, k + 1)] - c).abs() < 1e-13);
        }
        assert!(res < 1e-12);
        // 2×2 only
        let (m1, _) = matrix_exponential(&f.view((0, 0), (2, 2)).into_owned(), s).unwrap();
        assert!((m1[(0, 1)] - (w1 * s).sin()).abs() < 1e-13);
    }

    #[test]
    fn exponential_group_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let f = dirac::to_dyn(&random_symplex(&mut rng));
            let (s, t) = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
            let (ms, _) = matrix_exponential(&f, s).unwrap();
            let (mt, _) = matrix_exponential(&f, t).unwrap();
            let (mst, res) = matrix_exponential(&f, s + t).unwrap();
            assert!((ms * mt - &mst).amax() <= 1e-9 * mst.amax().max(1.0));
            assert!(res <= 1e-9 * mst.norm_squared().max(1.0));
        }
    }

    #[test]
    fn exponential_matches_basic_transform() {
        let f = dirac::to_dyn(&basis(2));
        let (m, _) = matrix_exponential(&f, 0.45).unwrap();
        let t = basic_transform(gk(2), 0.9);
        assert!((m - t.matrix()).amax() < 1e-12);
    }
}
