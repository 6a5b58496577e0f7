//! Decoupling of a single 4×4 symplex.
//!
//! Every pipeline is a short list of elementary transforms whose angles are
//! read off the current EMEQ state; the state is recomputed from the matrix
//! after each step. Steps whose angle falls below the step tolerance are
//! recorded as skipped and contribute nothing to the transform.
//!
//! One-argument arctangents `atan(y/x)` are evaluated as `atan2(y, x)` folded
//! into `(−π/2, π/2]`, and as zero when both arguments are negligible.

use num_complex::Complex64;

use crate::dirac::{self, Matrix4};
use crate::emeq::{self, EmeqState, Frequency, PairNature, SpectralInvariants};
use crate::transform::{basic_transform, compose, GeneratorKind, SymplecticTransform};
use crate::{tol, Error, Result};

/// A 4×4 symplex together with its EMEQ state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Symplex4 {
    matrix: Matrix4,
    state: EmeqState,
}

impl Symplex4 {
    /// Validate with the default predicate tolerance.
    pub fn new(matrix: Matrix4) -> Result<Self> {
        Self::with_tolerance(matrix, tol::PREDICATE)
    }

    pub fn with_tolerance(matrix: Matrix4, tol: f64) -> Result<Self> {
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let state = emeq::emeq_from_symplex(&matrix, tol)?;
        Ok(Symplex4 { matrix, state })
    }

    pub fn from_state(state: EmeqState) -> Self {
        Symplex4 {
            matrix: state.to_matrix(),
            state,
        }
    }

    fn unchecked(matrix: Matrix4) -> Self {
        let state = EmeqState::from_coefficients(&dirac::rdm_coefficients(&matrix));
        Symplex4 { matrix, state }
    }

    pub fn matrix(&self) -> &Matrix4 {
        &self.matrix
    }

    pub fn state(&self) -> &EmeqState {
        &self.state
    }

    pub fn spectral_invariants(&self) -> SpectralInvariants {
        self.state.spectral_invariants()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    BlockDiagonal,
    HamiltonianForm,
    NormalForm,
    ComplexCanonical,
}

impl Form {
    pub fn as_str(self) -> &'static str {
        match self {
            Form::BlockDiagonal => "block-diagonal",
            Form::HamiltonianForm => "hamiltonian",
            Form::NormalForm => "normal",
            Form::ComplexCanonical => "complex-canonical",
        }
    }
}

/// One executed (or skipped) pipeline step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub generator: u8,
    pub angle: f64,
    pub skipped: bool,
    pub purpose: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoupleConfig {
    pub step_tol: f64,
    pub post_tol: f64,
    pub cross_tol: f64,
    pub symplex_tol: f64,
}

impl Default for DecoupleConfig {
    fn default() -> Self {
        DecoupleConfig {
            step_tol: tol::STEP,
            post_tol: tol::POSTCONDITION,
            cross_tol: tol::CROSS_CHECK,
            symplex_tol: tol::PREDICATE,
        }
    }
}

/// Closed-form block-diagonal coefficients `(ℰ′, P_x′, P_z′, E_x′, E_z′, B_y′)`
/// next to the pipeline values, brought to the same orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCheck {
    pub closed_form: [f64; 6],
    pub pipeline: [f64; 6],
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoupleResult {
    pub input: Symplex4,
    pub transform: SymplecticTransform,
    pub decoupled: Symplex4,
    pub form: Form,
    /// Largest entry outside the pattern of `form`.
    pub residual: f64,
    pub steps: Vec<StepRecord>,
    /// Invariants of the input.
    pub invariants: SpectralInvariants,
    /// Per-block frequencies for real forms, `[ρ, ρ]` for complex ones.
    pub frequencies: [Frequency; 2],
    pub complex_radius: Option<f64>,
    pub cross_check: Option<CrossCheck>,
}

impl DecoupleResult {
    /// Steps that changed the matrix.
    pub fn applied_steps(&self) -> impl Iterator<Item = &StepRecord> {
        self.steps.iter().filter(|s| !s.skipped)
    }
}

/// Complex eigenvectors `E` and eigenvalues with `F·E = E·Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub vectors: nalgebra::Matrix4<Complex64>,
    pub values: [Complex64; 4],
    /// `‖F·E − E·Λ‖_F`.
    pub residual: f64,
}

/// `atan(y/x)` in `(−π/2, π/2]`, zero when both arguments are negligible.
pub(crate) fn folded_atan(y: f64, x: f64, eps: f64) -> f64 {
    if y.abs() < eps && x.abs() < eps {
        return 0.0;
    }
    let a = y.atan2(x);
    if a > std::f64::consts::FRAC_PI_2 {
        a - std::f64::consts::PI
    } else if a <= -std::f64::consts::FRAC_PI_2 {
        a + std::f64::consts::PI
    } else {
        a
    }
}

struct Pipeline<'a> {
    current: Symplex4,
    transform: SymplecticTransform,
    steps: Vec<StepRecord>,
    cfg: &'a DecoupleConfig,
}

impl<'a> Pipeline<'a> {
    fn new(f: &Symplex4, cfg: &'a DecoupleConfig) -> Self {
        Pipeline {
            current: *f,
            transform: SymplecticTransform::identity(4),
            steps: Vec::new(),
            cfg,
        }
    }

    fn resume(r: &DecoupleResult, cfg: &'a DecoupleConfig) -> Self {
        Pipeline {
            current: r.decoupled,
            transform: r.transform.clone(),
            steps: r.steps.clone(),
            cfg,
        }
    }

    fn s(&self) -> &EmeqState {
        &self.current.state
    }

    fn step(&mut self, generator: u8, angle: f64, purpose: &'static str) {
        let skipped = angle.abs() < self.cfg.step_tol;
        self.steps.push(StepRecord {
            generator,
            angle: if skipped { 0.0 } else { angle },
            skipped,
            purpose,
        });
        if skipped {
            return;
        }
        let t = basic_transform(GeneratorKind::new(generator).expect("generator < 10"), angle);
        self.current = Symplex4::unchecked(t.apply4(&self.current.matrix));
        self.transform = compose(&t, &self.transform).expect("4x4 transforms");
    }

    fn atan(&self, y: f64, x: f64) -> f64 {
        folded_atan(y, x, self.cfg.step_tol)
    }

    /// `arctanh(num/den)`, zero for a negligible numerator.
    fn rapidity(&self, num: f64, den: f64) -> Result<f64> {
        if num.abs() < self.cfg.step_tol {
            return Ok(0.0);
        }
        let x = num / den;
        if !(x.abs() < 1.0) {
            return Err(Error::BoostDomain {
                step: self.steps.len() + 1,
                argument: x,
            });
        }
        Ok(x.atanh())
    }

    fn scale(&self) -> f64 {
        self.current.matrix.norm().max(1.0)
    }
}

fn off_block(m: &Matrix4) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..2 {
        for j in 2..4 {
            r = r.max(m[(i, j)].abs()).max(m[(j, i)].abs());
        }
    }
    r
}

fn off_hamiltonian(m: &Matrix4) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i / 2 == j / 2 && i != j {
                continue;
            }
            r = r.max(m[(i, j)].abs());
        }
    }
    r
}

fn off_normal(m: &Matrix4) -> f64 {
    off_hamiltonian(m)
        .max((m[(0, 1)] + m[(1, 0)]).abs())
        .max((m[(2, 3)] + m[(3, 2)]).abs())
}

/// Coefficients other than `E_y, E_z, B_y`.
fn off_canonical(s: &Symplex4) -> f64 {
    let c = dirac::rdm_coefficients(&s.matrix);
    (0..16)
        .filter(|k| !matches!(k, 5 | 6 | 8))
        .fold(0.0f64, |m, k| m.max(c[k].abs()))
}

/// Frequency of each diagonal 2×2 block, signed by its upper-right entry.
fn block_frequencies(m: &Matrix4) -> [Frequency; 2] {
    let block = |k: usize| {
        let det = m[(k, k)] * m[(k + 1, k + 1)] - m[(k, k + 1)] * m[(k + 1, k)];
        let sign = if m[(k, k + 1)] < 0.0 { -1.0 } else { 1.0 };
        if det >= 0.0 {
            Frequency {
                value: sign * det.sqrt(),
                nature: PairNature::Imaginary,
            }
        } else {
            Frequency {
                value: (-det).sqrt(),
                nature: PairNature::Real,
            }
        }
    };
    [block(0), block(2)]
}

fn complex_frequencies(inv: &SpectralInvariants) -> [Frequency; 2] {
    let rho = (inv.k1 * inv.k1 + 4.0 * inv.k2.abs()).powf(0.25);
    let f = Frequency {
        value: rho,
        nature: PairNature::Complex,
    };
    [f, f]
}

fn finish(
    input: &Symplex4,
    p: Pipeline<'_>,
    form: Form,
    residual: f64,
    cross_check: Option<CrossCheck>,
) -> DecoupleResult {
    let invariants = input.spectral_invariants();
    let (frequencies, complex_radius) = match form {
        Form::ComplexCanonical => {
            let f = complex_frequencies(&invariants);
            (f, Some(f[0].value))
        }
        _ => (block_frequencies(&p.current.matrix), None),
    };
    DecoupleResult {
        input: *input,
        transform: p.transform,
        decoupled: p.current,
        form,
        residual,
        steps: p.steps,
        invariants,
        frequencies,
        complex_radius,
        cross_check,
    }
}

/// Closed-form coefficients of the block-diagonal result, oriented as if
/// every arctangent had been taken with the unfolded two-argument branch.
fn closed_form_block(s: &EmeqState) -> Option<[f64; 6]> {
    let m = s.mass_components();
    let b = s.aux_vectors().b;
    let (en, p, e, bf) = (s.energy, &s.momentum, &s.electric, &s.magnetic);
    let mx = m.m_r.hypot(m.m_g);
    let byz = b.y.hypot(b.z);
    let b2 = b.norm_squared();
    let bn = b2.sqrt();
    let limit = 1e-8;
    if mx < limit || byz < limit || bn < limit || b2 - mx * mx <= 0.0 {
        return None;
    }
    let root = (b2 - mx * mx).sqrt();
    Some([
        en * (1.0 - mx * mx / b2).sqrt(),
        (p.x * m.m_r - e.x * m.m_g) / mx * root / byz,
        root / (bn * mx * byz)
            * (m.m_g * (b.z * e.y - b.y * e.z) + m.m_r * (b.y * p.z - b.z * p.y)),
        (b2 * (m.m_r * e.x + m.m_g * p.x) - en * b.x * mx * mx) / (mx * byz * bn),
        (m.m_r * (b.y * e.z - b.z * e.y) + m.m_g * (b.y * p.z - b.z * p.y)) / (mx * byz),
        (en * bf.norm_squared() - p.dot(&e.cross(bf))) / bn,
    ])
}

/// Bring a symplex with `K₂ ≥ 0` to 2×2 block-diagonal form.
///
/// Steps: phase rotation `γ₀` by `atan(M_g/M_r)`, rotations `γ₇` by
/// `atan(b_z/b_y)` and `γ₉` by `−atan(b_x/b_y)`, boost `γ₂` by
/// `arctanh(M_r/b_y)`. Afterwards `B_x = B_z = E_y = P_y = 0`.
pub fn decouple_block_diagonal(f: &Symplex4, cfg: &DecoupleConfig) -> Result<DecoupleResult> {
    let inv = f.spectral_invariants();
    if inv.is_complex() {
        return Err(Error::ComplexEigenvalues { k2: inv.k2 });
    }
    let mut p = Pipeline::new(f, cfg);

    let m = p.s().mass_components();
    let raw_phase = m.m_g.atan2(m.m_r);
    let phase = p.atan(m.m_g, m.m_r);
    p.step(0, phase, "phase rotation removing M_g");

    let b = p.s().aux_vectors().b;
    let m = p.s().mass_components();
    if b.norm() < cfg.step_tol && m.m_r.abs() < cfg.step_tol && m.m_g.abs() < cfg.step_tol {
        let residual = off_block(&p.current.matrix);
        if residual > cfg.post_tol * p.scale() {
            return Err(Error::DegenerateB);
        }
    }
    let b = p.s().aux_vectors().b;
    p.step(7, p.atan(b.z, b.y), "rotation about x aligning b with y");
    let b = p.s().aux_vectors().b;
    p.step(9, -p.atan(b.x, b.y), "rotation about z aligning b with y");

    let m_r = p.s().mass_components().m_r;
    let b_y = p.s().aux_vectors().b.y;
    if m_r.abs() >= cfg.step_tol && !((m_r / b_y).abs() < 1.0) {
        return Err(Error::ComplexEigenvalues { k2: inv.k2 });
    }
    let eps = p.rapidity(m_r, b_y)?;
    p.step(2, eps, "boost removing M_r");

    let residual = off_block(&p.current.matrix);
    if residual > cfg.post_tol * p.scale() {
        return Err(Error::PrecisionLoss { residual });
    }

    let cross_check = closed_form_block(f.state()).map(|closed| {
        let s = p.s();
        let s_phase = if (raw_phase - phase).abs() > 1.0 { -1.0 } else { 1.0 };
        let s_x = if s.aux_vectors().b.y < 0.0 { -1.0 } else { 1.0 };
        let pipeline = [
            s.energy,
            s_phase * s.momentum.x,
            s_phase * s_x * s.momentum.z,
            s_phase * s.electric.x,
            s_phase * s_x * s.electric.z,
            s_x * s.magnetic.y,
        ];
        let max_deviation = closed
            .iter()
            .zip(&pipeline)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        CrossCheck {
            closed_form: closed,
            pipeline,
            max_deviation,
            passed: max_deviation <= cfg.cross_tol * f.matrix.norm().max(1.0),
        }
    });

    Ok(finish(f, p, Form::BlockDiagonal, residual, cross_check))
}

/// Remove the diagonal entries of both blocks: phase rotation `γ₀` by
/// `½·atan(2M_b/(E² − P²))`, then rotation `γ₈` by `−atan(P_z/P_x)`.
pub fn to_hamiltonian_form(r: &DecoupleResult, cfg: &DecoupleConfig) -> Result<DecoupleResult> {
    if r.form != Form::BlockDiagonal {
        return Err(Error::WrongForm {
            expected: Form::BlockDiagonal.as_str(),
            found: r.form.as_str(),
        });
    }
    let mut p = Pipeline::resume(r, cfg);
    let s = *p.s();
    let m_b = s.mass_components().m_b;
    let diff = s.electric.norm_squared() - s.momentum.norm_squared();
    p.step(0, 0.5 * p.atan(2.0 * m_b, diff), "phase rotation removing M_b");
    let mom = p.s().momentum;
    p.step(8, -p.atan(mom.z, mom.x), "rotation about y removing P_z");

    let residual = off_hamiltonian(&p.current.matrix);
    if residual > cfg.post_tol * p.scale() {
        return Err(Error::PrecisionLoss { residual });
    }
    Ok(finish(&r.input, p, Form::HamiltonianForm, residual, r.cross_check))
}

/// Exponent `s = ¼·ln|α/β|` that scales `[[0, α], [−β, 0]]` to a rotation
/// generator. A vanishing block needs no scaling; `αβ ≤ 0` has none.
pub(crate) fn block_scaling(alpha: f64, beta: f64, zero: f64) -> Option<f64> {
    if alpha.abs() < zero && beta.abs() < zero {
        Some(0.0)
    } else if alpha * beta > 0.0 {
        Some(0.25 * (alpha / beta).abs().ln())
    } else {
        None
    }
}

/// Scale each block `[[0, α], [−β, 0]]` to `[[0, ω], [−ω, 0]]` with
/// `ω = sign(α)·√(αβ)`, using `R = Diag(e^{−s}, e^{s}, e^{−t}, e^{t})`,
/// `s = ¼·ln|α/β|`. `R` is generated by `γ₃` (angle `s + t`) and `γ₄`
/// (angle `s − t`).
pub fn to_normal_form(r: &DecoupleResult, cfg: &DecoupleConfig) -> Result<DecoupleResult> {
    if r.form != Form::HamiltonianForm {
        return Err(Error::WrongForm {
            expected: Form::HamiltonianForm.as_str(),
            found: r.form.as_str(),
        });
    }
    let m = r.decoupled.matrix;
    let mut exps = [0.0; 2];
    for (block, k) in [0usize, 2].into_iter().enumerate() {
        let (alpha, beta) = (m[(k, k + 1)], -m[(k + 1, k)]);
        exps[block] = block_scaling(alpha, beta, cfg.step_tol * m.norm().max(1.0))
            .ok_or(Error::UnstableBlock { block })?;
    }
    let (s, t) = (exps[0], exps[1]);
    let mut p = Pipeline::resume(r, cfg);
    p.step(3, s + t, "scaling of both blocks");
    p.step(4, s - t, "relative scaling of the blocks");

    let residual = off_normal(&p.current.matrix);
    if residual > cfg.post_tol * p.scale() {
        return Err(Error::PrecisionLoss { residual });
    }
    Ok(finish(&r.input, p, Form::NormalForm, residual, r.cross_check))
}

/// The diagonalizing matrix `E₀ = ½(1 − γ₀ + iγ₃ + iγ₆)` of the normal form.
pub fn e0() -> nalgebra::Matrix4<Complex64> {
    let (g0, g3, g6) = (dirac::basis(0), dirac::basis(3), dirac::basis(6));
    let re = (Matrix4::identity() - g0) * 0.5;
    let im = (g3 + g6) * 0.5;
    nalgebra::Matrix4::from_fn(|i, j| Complex64::new(re[(i, j)], im[(i, j)]))
}

/// Eigenvectors `E = R⁻¹·E₀` and eigenvalues `(iω₁, −iω₁, iω₂, −iω₂)` of the
/// input of a normal-form result.
pub fn diagonalize(r: &DecoupleResult) -> Result<Eigensystem> {
    if r.form != Form::NormalForm {
        return Err(Error::WrongForm {
            expected: Form::NormalForm.as_str(),
            found: r.form.as_str(),
        });
    }
    let to_c = |m: &Matrix4| m.map(|x| Complex64::new(x, 0.0));
    let rinv = to_c(&dirac::to_fixed(r.transform.inverse_matrix()));
    let vectors = rinv * e0();
    let (w1, w2) = (r.decoupled.matrix[(0, 1)], r.decoupled.matrix[(2, 3)]);
    let i = Complex64::i();
    let values = [i * w1, -i * w1, i * w2, -i * w2];
    let lambda = nalgebra::Matrix4::from_diagonal(&nalgebra::Vector4::from(values));
    let f = to_c(&r.input.matrix);
    let residual = (f * vectors - vectors * lambda).norm();
    Ok(Eigensystem {
        vectors,
        values,
        residual,
    })
}

fn check_complex(f: &Symplex4) -> Result<SpectralInvariants> {
    let inv = f.spectral_invariants();
    if !inv.is_complex() {
        return Err(Error::BranchMismatch {
            reason: format!("K2 = {:.6e} is not negative", inv.k2),
        });
    }
    Ok(inv)
}

fn finish_complex(f: &Symplex4, p: Pipeline<'_>) -> Result<DecoupleResult> {
    let residual = off_canonical(&p.current);
    if residual > p.cfg.post_tol * p.scale() {
        return Err(Error::PrecisionLoss { residual });
    }
    Ok(finish(f, p, Form::ComplexCanonical, residual, None))
}

/// Complex quadruple with `ℰ² < max(P², E²)`: reach `E_yγ₅ + E_zγ₆ + B_yγ₈`
/// in nine steps.
pub fn complex_low_energy(f: &Symplex4, cfg: &DecoupleConfig) -> Result<DecoupleResult> {
    check_complex(f)?;
    let s = f.state();
    let (p2, e2) = (s.momentum.norm_squared(), s.electric.norm_squared());
    if !(s.energy * s.energy < p2.max(e2)) {
        return Err(Error::BranchMismatch {
            reason: "low-energy procedure needs E0^2 < max(P^2, E^2)".into(),
        });
    }
    let mut p = Pipeline::new(f, cfg);
    let m = p.s().mass_components();
    p.step(0, p.atan(m.m_g, m.m_r), "phase rotation removing M_g");
    let e = p.s().electric;
    p.step(7, p.atan(e.z, e.y), "rotation about x aligning E with y");
    let e = p.s().electric;
    p.step(9, -p.atan(e.x, e.y), "rotation about z aligning E with y");
    let s = *p.s();
    let eps = p.rapidity(s.energy, s.electric.y)?;
    p.step(2, eps, "boost removing the energy");
    let s = *p.s();
    let eps = p.rapidity(s.momentum.x, s.magnetic.y)?;
    p.step(3, -eps, "boost removing P_x");
    let s = *p.s();
    let eps = p.rapidity(s.momentum.z, s.magnetic.y)?;
    p.step(1, eps, "boost removing P_z");
    let b = p.s().magnetic;
    p.step(7, p.atan(b.z, b.y), "rotation about x aligning B with y");
    let b = p.s().magnetic;
    p.step(9, -p.atan(b.x, b.y), "rotation about z aligning B with y");
    let e = p.s().electric;
    p.step(8, p.atan(e.x, e.z), "rotation about y removing E_x");
    finish_complex(f, p)
}

/// Complex quadruple with `ℰ² ≥ min(P², E²)`: reach `E_yγ₅ + E_zγ₆ + B_yγ₈`
/// in eight steps.
pub fn complex_intermediate(f: &Symplex4, cfg: &DecoupleConfig) -> Result<DecoupleResult> {
    check_complex(f)?;
    let s = f.state();
    let (p2, e2) = (s.momentum.norm_squared(), s.electric.norm_squared());
    if !(s.energy * s.energy >= p2.min(e2)) {
        return Err(Error::BranchMismatch {
            reason: "intermediate procedure needs E0^2 >= min(P^2, E^2)".into(),
        });
    }
    let mut p = Pipeline::new(f, cfg);
    // unfolded: of the two stationary angles this one minimizes P²
    let s = *p.s();
    let m_b = s.mass_components().m_b;
    let diff = s.electric.norm_squared() - s.momentum.norm_squared();
    let phase = if m_b.abs() < cfg.step_tol && diff.abs() < cfg.step_tol {
        0.0
    } else {
        0.5 * (2.0 * m_b).atan2(diff)
    };
    p.step(0, phase, "phase rotation minimizing P^2");
    let mom = p.s().momentum;
    p.step(7, p.atan(mom.z, mom.y), "rotation about x aligning P with y");
    let mom = p.s().momentum;
    p.step(9, -p.atan(mom.x, mom.y), "rotation about z aligning P with y");
    let s = *p.s();
    let eps = p.rapidity(s.momentum.y, s.energy)?;
    p.step(5, -eps, "boost removing P_y");
    let b = p.s().magnetic;
    p.step(7, p.atan(b.z, b.y), "rotation about x aligning B with y");
    let b = p.s().magnetic;
    p.step(9, -p.atan(b.x, b.y), "rotation about z aligning B with y");
    let s = *p.s();
    let eps = p.rapidity(s.energy, s.electric.y)?;
    p.step(2, eps, "boost removing the energy");
    let e = p.s().electric;
    p.step(8, p.atan(e.x, e.z), "rotation about y removing E_x");
    finish_complex(f, p)
}

/// Decouple as far as `target`, choosing the branch from the sign of `K₂`.
///
/// Complex quadruples always end in [`Form::ComplexCanonical`]; the
/// low-energy procedure is tried first when its precondition holds.
pub fn decouple(f: &Symplex4, target: Form, cfg: &DecoupleConfig) -> Result<DecoupleResult> {
    let inv = f.spectral_invariants();
    if inv.is_complex() {
        let s = f.state();
        let (p2, e2) = (s.momentum.norm_squared(), s.electric.norm_squared());
        if s.energy * s.energy < p2.max(e2) {
            match complex_low_energy(f, cfg) {
                Ok(r) => return Ok(r),
                Err(e) if s.energy * s.energy < p2.min(e2) => return Err(e),
                Err(_) => {}
            }
        }
        return complex_intermediate(f, cfg);
    }
    let r = decouple_block_diagonal(f, cfg)?;
    match target {
        Form::BlockDiagonal | Form::ComplexCanonical => Ok(r),
        Form::HamiltonianForm => to_hamiltonian_form(&r, cfg),
        Form::NormalForm => to_normal_form(&to_hamiltonian_form(&r, cfg)?, cfg),
    }
}
