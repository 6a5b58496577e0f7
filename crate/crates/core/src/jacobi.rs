//! Jacobi-like block diagonalization of `2n×2n` symplices.
//!
//! Each step picks the off-diagonal 2×2 block with the largest mean squared
//! entry, extracts the 4×4 symplex formed by the two coordinate pairs,
//! decouples it and applies the embedded transform to the full matrix.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decouple4::{
    block_scaling, decouple_block_diagonal, folded_atan, DecoupleConfig, Symplex4,
};
use crate::dirac::{self, gamma0_n, Matrix4};
use crate::transform::{compose, embedded_log, pair_scaling, Step, SymplecticTransform};
use crate::{tol, Error, Result};

/// A `2n×2n` symplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplexN {
    matrix: DMatrix<f64>,
}

impl SymplexN {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(matrix, tol::PREDICATE)
    }

    pub fn with_tolerance(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        let residual = dirac::symplex_residual_n(&matrix)?;
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        if residual > tol * matrix.norm().max(1.0) {
            return Err(Error::NotASymplex { residual });
        }
        Ok(SymplexN { matrix })
    }

    /// Degrees of freedom.
    pub fn n(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotRecord {
    pub i: usize,
    pub j: usize,
    /// Mean squared entry of block `(i, j)` before the step.
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationStats {
    /// 4×4 decoupling steps to block-diagonal form.
    pub block_steps: usize,
    /// Pair rotations needed afterwards for Hamiltonian form.
    pub hamiltonian_steps: usize,
    pub pivots: Vec<PivotRecord>,
    /// Off-block residual (sum of Frobenius norms) after each step.
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiConfig {
    /// Convergence threshold relative to `‖F‖_F`.
    pub tol: f64,
    /// Defaults to `40·n²`.
    pub max_steps: Option<usize>,
    /// Rotate every diagonal block to zero diagonal after convergence.
    pub hamiltonian: bool,
    pub decouple: DecoupleConfig,
}

impl Default for JacobiConfig {
    fn default() -> Self {
        JacobiConfig {
            tol: tol::JACOBI,
            max_steps: None,
            hamiltonian: false,
            decouple: DecoupleConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiResult {
    pub transform: SymplecticTransform,
    pub decoupled: SymplexN,
    pub stats: IterationStats,
}

/// Mean squared entry of each off-diagonal 2×2 block; zero on the diagonal.
pub fn off_block_norms(f: &DMatrix<f64>) -> DMatrix<f64> {
    let n = f.nrows() / 2;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            f.view((2 * i, 2 * j), (2, 2)).norm_squared() / 4.0
        }
    })
}

/// Sum of the Frobenius norms of all off-diagonal 2×2 blocks.
pub fn off_block_residual(f: &DMatrix<f64>) -> f64 {
    let n = f.nrows() / 2;
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += f.view((2 * i, 2 * j), (2, 2)).norm();
            }
        }
    }
    sum
}

/// Largest entry outside the pattern `(2k, 2k+1), (2k+1, 2k)`.
pub fn off_hamiltonian_residual(f: &DMatrix<f64>) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..f.nrows() {
        for j in 0..f.ncols() {
            if i / 2 == j / 2 && i != j {
                continue;
            }
            r = r.max(f[(i, j)].abs());
        }
    }
    r
}

/// Accumulates `R`, `R⁻¹` and the applied matrix with sparse updates.
struct Accumulator {
    f: DMatrix<f64>,
    r: DMatrix<f64>,
    r_inv: DMatrix<f64>,
    log: Vec<Step>,
}

impl Accumulator {
    /// Apply a transform acting only on the coordinates `idx`.
    fn apply_local(&mut self, idx: &[usize], r: &DMatrix<f64>, r_inv: &DMatrix<f64>) {
        left_local(&mut self.f, idx, r);
        right_local(&mut self.f, idx, r_inv);
        left_local(&mut self.r, idx, r);
        right_local(&mut self.r_inv, idx, r_inv);
    }
}

/// `M ← R_emb·M` where `R_emb` is the identity outside `idx`.
fn left_local(m: &mut DMatrix<f64>, idx: &[usize], r: &DMatrix<f64>) {
    let k = idx.len();
    let mut rows = DMatrix::zeros(k, m.ncols());
    for (a, &ra) in idx.iter().enumerate() {
        rows.row_mut(a).copy_from(&m.row(ra));
    }
    let new = r * rows;
    for (a, &ra) in idx.iter().enumerate() {
        m.row_mut(ra).copy_from(&new.row(a));
    }
}

/// `M ← M·R_emb` where `R_emb` is the identity outside `idx`.
fn right_local(m: &mut DMatrix<f64>, idx: &[usize], r: &DMatrix<f64>) {
    let k = idx.len();
    let mut cols = DMatrix::zeros(m.nrows(), k);
    for (a, &ca) in idx.iter().enumerate() {
        cols.column_mut(a).copy_from(&m.column(ca));
    }
    let new = cols * r;
    for (a, &ca) in idx.iter().enumerate() {
        m.column_mut(ca).copy_from(&new.column(a));
    }
}

/// Pivot with the largest block amplitude; ties go to the smallest `(i, j)`.
fn select_pivot(norms: &DMatrix<f64>) -> (usize, usize, f64) {
    let n = norms.nrows();
    let mut best = (0, 1, -1.0);
    for i in 0..n {
        for j in i + 1..n {
            let a = norms[(i, j)].max(norms[(j, i)]);
            if a > best.2 {
                best = (i, j, a);
            }
        }
    }
    best
}

/// Angle of the pair rotation that zeroes the diagonal of `[[a, b], [c, −a]]`.
fn hamiltonian_angle(a: f64, b: f64, c: f64, eps: f64) -> f64 {
    0.5 * folded_atan(-a, 0.5 * (b + c), eps)
}

/// Block-diagonalize `F`, optionally continuing to Hamiltonian form.
///
/// Stops when the sum of off-diagonal block norms is at most
/// `tol·‖F‖_F`. A pivot with a complex eigenvalue quadruple aborts with
/// [`Error::PivotComplex`].
pub fn jacobi_decouple(f: &SymplexN, cfg: &JacobiConfig) -> Result<JacobiResult> {
    let n = f.n();
    let dim = 2 * n;
    let max_steps = cfg.max_steps.unwrap_or(40 * n * n);
    let threshold = cfg.tol * f.matrix.norm();
    let mut acc = Accumulator {
        f: f.matrix.clone(),
        r: DMatrix::identity(dim, dim),
        r_inv: DMatrix::identity(dim, dim),
        log: Vec::new(),
    };
    let mut stats = IterationStats::default();

    let mut residual = off_block_residual(&acc.f);
    while residual > threshold {
        if stats.block_steps >= max_steps {
            return Err(Error::MaxStepsExceeded {
                steps: stats.block_steps,
                residual,
            });
        }
        let (i, j, amplitude) = select_pivot(&off_block_norms(&acc.f));
        let idx = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1];
        let sub = Matrix4::from_fn(|a, b| acc.f[(idx[a], idx[b])]);
        // the pivot is a symplex by construction; rounding drift is not re-checked
        let sub = Symplex4::with_tolerance(sub, f64::INFINITY)?;
        let r4 = decouple_block_diagonal(&sub, &cfg.decouple).map_err(|e| match e {
            Error::ComplexEigenvalues { k2 } => Error::PivotComplex { i, j, k2 },
            other => other,
        })?;
        acc.apply_local(&idx, r4.transform.matrix(), r4.transform.inverse_matrix());
        acc.log.extend(embedded_log(r4.transform.log(), i, j));
        stats.pivots.push(PivotRecord { i, j, amplitude });
        stats.block_steps += 1;
        residual = off_block_residual(&acc.f);
        stats.residual_history.push(residual);
    }

    if cfg.hamiltonian {
        for k in 0..n {
            let (a, b, c) = (acc.f[(2 * k, 2 * k)], acc.f[(2 * k, 2 * k + 1)], acc.f[(2 * k + 1, 2 * k)]);
            let theta = hamiltonian_angle(a, b, c, cfg.decouple.step_tol);
            if theta.abs() < cfg.decouple.step_tol {
                continue;
            }
            let (cs, sn) = (theta.cos(), theta.sin());
            let rot = DMatrix::from_row_slice(2, 2, &[cs, sn, -sn, cs]);
            let rot_inv = rot.transpose();
            acc.apply_local(&[2 * k, 2 * k + 1], &rot, &rot_inv);
            acc.log.push(Step::PairRotation { pair: k, angle: theta });
            stats.hamiltonian_steps += 1;
        }
    }
    stats.final_residual = off_block_residual(&acc.f);

    Ok(JacobiResult {
        transform: SymplecticTransform::from_parts(acc.r, acc.r_inv, acc.log),
        decoupled: SymplexN { matrix: acc.f },
        stats,
    })
}

/// Scale every pair of a Hamiltonian-form result to `[[0, ω], [−ω, 0]]`.
///
/// Pairs whose off-diagonal entries have opposite signs (a real eigenvalue
/// pair) fail with [`Error::UnstableBlock`].
pub fn scale_to_normal_form(r: &JacobiResult, cfg: &DecoupleConfig) -> Result<JacobiResult> {
    let n = r.decoupled.n();
    let mut m = r.decoupled.matrix.clone();
    let scale = m.norm().max(1.0);
    if off_hamiltonian_residual(&m) > cfg.post_tol * scale {
        return Err(Error::WrongForm {
            expected: "hamiltonian",
            found: "block-diagonal",
        });
    }
    let mut t = r.transform.clone();
    let mut stats = r.stats.clone();
    let zero = cfg.step_tol * scale;
    for k in 0..n {
        let (alpha, beta) = (m[(2 * k, 2 * k + 1)], -m[(2 * k + 1, 2 * k)]);
        let s = block_scaling(alpha, beta, zero).ok_or(Error::UnstableBlock { block: k })?;
        if s.abs() < cfg.step_tol {
            continue;
        }
        let p = pair_scaling(n, k, s)?;
        m = p.apply(&m)?;
        t = compose(&p, &t)?;
        stats.hamiltonian_steps += 1;
    }
    stats.final_residual = off_block_residual(&m);
    Ok(JacobiResult {
        transform: t,
        decoupled: SymplexN { matrix: m },
        stats,
    })
}

/// Random symplex `F = γ₀·A` with symmetric `A`, `A_ij = x − ½` off the
/// diagonal and `A_ii = n + x`.
///
/// `x` is uniform in `[0, 1)` from `ChaCha8Rng::seed_from_u64(seed)`, drawn
/// for the upper triangle in row-major order (`i ≤ j`).
pub fn random_test_symplex(n: usize, seed: u64) -> SymplexN {
    let dim = 2 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let x: f64 = rng.random();
            let v = if i == j { n as f64 + x } else { x - 0.5 };
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    SymplexN {
        matrix: gamma0_n(n) * a,
    }
}

/// Step counts of one system size over a range of seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub seeds: usize,
    pub mean_steps: f64,
    pub min_steps: usize,
    pub max_steps: usize,
    /// `5·n(n−2)/2`.
    pub reference: f64,
    pub mean_hamiltonian_steps: f64,
    pub mean_seconds: f64,
    pub max_seconds: f64,
}

/// Run [`jacobi_decouple`] on [`random_test_symplex`] for seeds `0..seeds`.
///
/// Seeds are evaluated concurrently; results are aggregated in seed order.
pub fn benchmark_size(n: usize, seeds: usize, cfg: &JacobiConfig) -> Result<BenchRow> {
    if seeds == 0 {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    let run = |seed: u64| -> Result<(usize, usize, f64)> {
        let f = random_test_symplex(n, seed);
        let start = Instant::now();
        let r = jacobi_decouple(&f, cfg)?;
        Ok((r.stats.block_steps, r.stats.hamiltonian_steps, start.elapsed().as_secs_f64()))
    };
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get()).min(seeds);
    let results: Vec<Result<(usize, usize, f64)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let run = &run;
                scope.spawn(move || {
                    (w..seeds)
                        .step_by(workers)
                        .map(|s| (s, run(s as u64)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let mut all: Vec<(usize, Result<(usize, usize, f64)>)> = handles
            .into_iter()
            .flat_map(|h| h.join().expect("benchmark worker panicked"))
            .collect();
        all.sort_by_key(|(s, _)| *s);
        all.into_iter().map(|(_, r)| r).collect()
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let count = results.len() as f64;
    Ok(BenchRow {
        n,
        seeds,
        mean_steps: results.iter().map(|r| r.0 as f64).sum::<f64>() / count,
        min_steps: results.iter().map(|r| r.0).min().unwrap_or(0),
        max_steps: results.iter().map(|r| r.0).max().unwrap_or(0),
        reference: 5.0 * n as f64 * (n as f64 - 2.0) / 2.0,
        mean_hamiltonian_steps: results.iter().map(|r| r.1 as f64).sum::<f64>() / count,
        mean_seconds: results.iter().map(|r| r.2).sum::<f64>() / count,
        max_seconds: results.iter().map(|r| r.2).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn cfg() -> JacobiConfig {
        JacobiConfig::default()
    }

    /// Coefficients of the characteristic polynomial from the eigenvalues.
    fn char_poly(m: &DMatrix<f64>) -> Vec<Complex64> {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for z in crate::oracle::eigenvalues(m).iter() {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, ck) in c.iter().enumerate() {
                next[k] += ck;
                next[k + 1] -= ck * z;
            }
            c = next;
        }
        c
    }

    #[test]
    fn generator_rule() {
        let a = random_test_symplex(3, 7);
        assert_eq!(a, random_test_symplex(3, 7));
        assert_ne!(a, random_test_symplex(3, 8));
        let sym = -gamma0_n(3) * a.matrix();
        assert!((&sym - sym.transpose()).amax() == 0.0);
        for i in 0..6 {
            assert!((3.0..4.0).contains(&sym[(i, i)]));
            for j in 0..6 {
                if i != j {
                    assert!((-0.5..0.5).contains(&sym[(i, j)]));
                }
            }
        }
        assert!(SymplexN::new(a.matrix().clone()).is_ok());
    }

    #[test]
    fn rejects_non_symplex() {
        assert!(matches!(
            SymplexN::new(DMatrix::identity(6, 6)),
            Err(Error::NotASymplex { .. })
        ));
        assert!(SymplexN::new(DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn off_block_norms_by_hand() {
        let f = random_test_symplex(3, 1);
        let norms = off_block_norms(f.matrix());
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                if i != j {
                    for a in 0..2 {
                        for b in 0..2 {
                            s += f.matrix()[(2 * i + a, 2 * j + b)].powi(2);
                        }
                    }
                }
                assert!((norms[(i, j)] - s / 4.0).abs() < 1e-15);
            }
        }
        let mut g = DMatrix::zeros(6, 6);
        g[(0, 1)] = 1.0;
        g[(1, 0)] = -1.0;
        assert_eq!(off_block_norms(&g), DMatrix::zeros(3, 3));
        g[(0, 4)] = 0.5;
        let norms = off_block_norms(&g);
        assert_eq!(norms.iter().filter(|x| **x != 0.0).count(), 1);
    }

    #[test]
    fn single_degree_of_freedom() {
        let f = random_test_symplex(1, 3);
        let r = jacobi_decouple(&f, &cfg()).unwrap();
        assert_eq!(r.stats.block_steps, 0);
        assert_eq!(r.decoupled, f);
    }

    #[test]
    fn two_degrees_of_freedom_take_one_step() {
        for seed in 0..10 {
            let f = random_test_symplex(2, seed);
            let r = jacobi_decouple(&f, &cfg()).unwrap();
            assert_eq!(r.stats.block_steps, 1);
        }
    }

    #[test]
    fn converges_and_preserves_spectrum() {
        for n in [3, 4, 5] {
            for seed in 0..3 {
                let f = random_test_symplex(n, seed);
                let r = jacobi_decouple(&f, &cfg()).unwrap();
                assert!(r.stats.final_residual <= 1e-12 * f.matrix().norm());
                assert!(r.transform.symplectic_residual() < 1e-9);
                let replay = r.transform.apply(f.matrix()).unwrap();
                assert!((replay - r.decoupled.matrix()).amax() < 1e-9);
                let (p, q) = (char_poly(f.matrix()), char_poly(r.decoupled.matrix()));
                for (a, b) in p.iter().zip(&q) {
                    assert!((a - b).norm() <= 1e-8 * a.norm().max(1.0));
                }
                let again = jacobi_decouple(&r.decoupled, &cfg()).unwrap();
                assert_eq!(again.stats.block_steps, 0);
            }
        }
    }

    #[test]
    fn hamiltonian_target() {
        let f = random_test_symplex(4, 5);
        let c = JacobiConfig {
            hamiltonian: true,
            ..cfg()
        };
        let r = jacobi_decouple(&f, &c).unwrap();
        assert!(off_hamiltonian_residual(r.decoupled.matrix()) < 1e-10);
        assert!(r.stats.hamiltonian_steps <= 4);
        let replayed = SymplecticTransform::replay(r.transform.log(), 8).unwrap();
        assert!((replayed.matrix() - r.transform.matrix()).amax() < 1e-9);
    }

    #[test]
    fn step_limit() {
        let f = random_test_symplex(4, 2);
        let c = JacobiConfig {
            max_steps: Some(2),
            ..cfg()
        };
        assert!(matches!(
            jacobi_decouple(&f, &c),
            Err(Error::MaxStepsExceeded { steps: 2, .. })
        ));
    }

    #[test]
    fn complex_pivot_is_reported() {
        // pairs 0 and 1 form a complex quadruple E_x γ4 + B_x γ7
        let mut s = crate::emeq::EmeqState::default();
        s.electric.x = 0.6;
        s.magnetic.x = 0.8;
        let m4 = s.to_matrix();
        let mut f = DMatrix::zeros(6, 6);
        for a in 0..4 {
            for b in 0..4 {
                f[(a, b)] = m4[(a, b)];
            }
        }
        f[(4, 5)] = 1.0;
        f[(5, 4)] = -1.0;
        let err = jacobi_decouple(&SymplexN::new(f).unwrap(), &cfg()).unwrap_err();
        assert!(matches!(err, Error::PivotComplex { i: 0, j: 1, .. }));
    }

    #[test]
    fn benchmark_row() {
        let row = benchmark_size(4, 4, &cfg()).unwrap();
        assert_eq!(row.seeds, 4);
        assert_eq!(row.reference, 20.0);
        assert!(row.min_steps as f64 <= row.mean_steps && row.mean_steps <= row.max_steps as f64);
        let again = benchmark_size(4, 4, &cfg()).unwrap();
        assert_eq!(row.mean_steps, again.mean_steps);
    }
}
