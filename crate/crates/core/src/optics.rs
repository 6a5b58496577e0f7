//! One-turn matrix analysis for periodic systems.
//!
//! A symplectic one-turn matrix `M` is split into its symplex part
//! `M_s = ½(M + γ₀Mᵀγ₀)` and cosymplex part `M_c`. Bringing `M_s` to normal
//! form decouples `M` itself; in that frame every 2×2 block of `M` reads
//! `cos(ωτ)·1 + sin(ωτ)·J` and the tunes, matched beam and effective force
//! follow block by block.

use nalgebra::{DMatrix, Vector4};

use crate::decouple4::{self, DecoupleConfig, Form, Symplex4};
use crate::dirac::{self, basis, gamma0_n, Matrix4};
use crate::emeq::EmeqState;
use crate::jacobi::{self, IterationStats, JacobiConfig, SymplexN};
use crate::transform::{matrix_exponential, SymplecticTransform};
use crate::{tol, Error, Result};

/// A symplectic one-turn (or segment) matrix with its period.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    m: DMatrix<f64>,
    period: f64,
}

impl TransferMatrix {
    /// Accept `M` if `‖Mγ₀Mᵀ − γ₀‖_F ≤ 1e−8·max(1, ‖M‖²_F)`.
    pub fn new(m: DMatrix<f64>, period: f64) -> Result<Self> {
        Self::with_tolerance(m, period, tol::TRANSFER_SYMPLECTIC)
    }

    pub fn with_tolerance(m: DMatrix<f64>, period: f64, tol: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        let residual = dirac::symplectic_residual_n(&m)?;
        if !(residual <= tol * m.norm_squared().max(1.0)) {
            return Err(Error::NotSymplectic { residual });
        }
        Ok(TransferMatrix { m, period })
    }

    /// `exp(F·τ)`.
    pub fn from_force(f: &DMatrix<f64>, period: f64) -> Result<Self> {
        let (m, _) = matrix_exponential(f, period)?;
        Self::new(m, period)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn symplectic_residual(&self) -> f64 {
        dirac::symplectic_residual_n(&self.m).unwrap_or(f64::NAN)
    }
}

/// Second moments `σ`; `S = σγ₀` is a symplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaMatrix {
    sigma: DMatrix<f64>,
}

impl SigmaMatrix {
    pub fn new(sigma: DMatrix<f64>) -> Result<Self> {
        if sigma.nrows() != sigma.ncols() || sigma.nrows() % 2 != 0 || sigma.nrows() == 0 {
            return Err(Error::InvalidArgument("sigma must be square with even dimension".into()));
        }
        let asym = (&sigma - sigma.transpose()).amax();
        if asym > tol::PREDICATE * sigma.amax().max(1.0) {
            return Err(Error::InvalidArgument(format!("sigma is not symmetric ({asym:.3e})")));
        }
        Ok(SigmaMatrix { sigma })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// `S = σγ₀`.
    pub fn s_matrix(&self) -> DMatrix<f64> {
        &self.sigma * gamma0_n(self.sigma.nrows() / 2)
    }

    /// `Iₖ = Tr((σγ₀)ᵏ)`, `k = 1..4`.
    pub fn lax_invariants(&self) -> [f64; 4] {
        crate::emeq::lax_invariants_n(&self.s_matrix())
    }

    pub fn is_positive_definite(&self) -> bool {
        self.sigma.clone().cholesky().is_some()
    }
}

/// Phase advance of one decoupled degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tune {
    pub cos: f64,
    pub sin: f64,
    /// `ωτ = atan2(sin, cos)` in `(−π, π]`.
    pub phase: f64,
    /// `|ωτ|/2π` in `[0, ½]`; integer parts are not observable.
    pub tune: f64,
    /// `sin ≈ 0`: the phase is 0 or π and its sign (and the logarithm
    /// branch) is undefined.
    pub branch_ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpticsReport {
    pub n: usize,
    pub period: f64,
    pub tunes: Vec<Tune>,
    /// `ωᵢ = phaseᵢ/τ`.
    pub frequencies: Vec<f64>,
    /// Decouples `M`: `M̃ = R·M·R⁻¹`.
    pub transform: SymplecticTransform,
    pub decoupled_transfer: DMatrix<f64>,
    /// Normal form of the symplex part.
    pub decoupled_symplex: DMatrix<f64>,
    pub symplectic_residual: f64,
    /// Off-block residual of `R·M_c·R⁻¹`.
    pub cosymplex_off_block: f64,
    /// Off-block residual of `M̃`.
    pub transfer_off_block: f64,
    pub jacobi: Option<IterationStats>,
}

impl OpticsReport {
    pub fn is_stable(&self) -> bool {
        self.tunes.iter().all(|t| t.cos.abs() <= 1.0 + 1e-9)
    }
}

/// Normal form of a `2n×2n` symplex: transform, result, per-pair frequency.
fn normal_form_n(
    ms: &DMatrix<f64>,
    cfg: &DecoupleConfig,
) -> Result<(SymplecticTransform, DMatrix<f64>, Vec<f64>, Option<IterationStats>)> {
    let n = ms.nrows() / 2;
    if n == 2 {
        let f = Symplex4::with_tolerance(dirac::to_fixed(ms), cfg.symplex_tol)?;
        let inv = f.spectral_invariants();
        if inv.is_complex() {
            return Err(Error::UnstableSystem {
                reason: format!("symplex part has {}", inv.classification.as_str()),
            });
        }
        let r = decouple4::decouple(&f, Form::NormalForm, cfg).map_err(|e| match e {
            Error::UnstableBlock { block } => Error::UnstableSystem {
                reason: format!("degree of freedom {block} has a real eigenvalue pair"),
            },
            other => other,
        })?;
        let m = dirac::to_dyn(r.decoupled.matrix());
        let omegas = vec![m[(0, 1)], m[(2, 3)]];
        return Ok((r.transform, m, omegas, None));
    }

    let f = SymplexN::with_tolerance(ms.clone(), cfg.symplex_tol)?;
    let jcfg = JacobiConfig {
        hamiltonian: true,
        decouple: *cfg,
        ..JacobiConfig::default()
    };
    let r = jacobi::jacobi_decouple(&f, &jcfg)?;
    let r = jacobi::scale_to_normal_form(&r, cfg).map_err(|e| match e {
        Error::UnstableBlock { block } => Error::UnstableSystem {
            reason: format!("degree of freedom {block} has a real eigenvalue pair"),
        },
        other => other,
    })?;
    let m = r.decoupled.into_matrix();
    let omegas = (0..n).map(|k| m[(2 * k, 2 * k + 1)]).collect();
    Ok((r.transform, m, omegas, Some(r.stats)))
}

/// `cos ω₁τ`, `cos ω₂τ` from `Tr(M̃)/2 = cos₁ + cos₂` and
/// `Tr(M̃γ₁₂ + γ₁₂M̃)/4 = cos₂ − cos₁`.
pub fn tune_cosines_4(m: &Matrix4) -> [f64; 2] {
    let g12 = basis(12);
    let sum = m.trace() / 2.0;
    let diff = (m * g12 + g12 * m).trace() / 4.0;
    [(sum - diff) / 2.0, (sum + diff) / 2.0]
}

/// Decouple a one-turn matrix and extract its tunes.
pub fn analyze_one_turn(m: &TransferMatrix) -> Result<OpticsReport> {
    analyze_one_turn_with(m, &DecoupleConfig::default())
}

pub fn analyze_one_turn_with(tm: &TransferMatrix, cfg: &DecoupleConfig) -> Result<OpticsReport> {
    let n = tm.n();
    let (ms, mc) = dirac::split_n(&tm.m)?;
    let (t, ms_d, sines, stats) = normal_form_n(&ms, cfg)?;
    let m_d = t.apply(&tm.m)?;
    let mc_d = t.apply(&mc)?;

    let cosines: Vec<f64> = if n == 2 {
        tune_cosines_4(&dirac::to_fixed(&m_d)).to_vec()
    } else {
        (0..n)
            .map(|k| (m_d[(2 * k, 2 * k)] + m_d[(2 * k + 1, 2 * k + 1)]) / 2.0)
            .collect()
    };
    let tunes: Vec<Tune> = cosines
        .iter()
        .zip(&sines)
        .map(|(&c, &s)| {
            let phase = s.atan2(c);
            Tune {
                cos: c,
                sin: s,
                phase,
                tune: phase.abs() / (2.0 * std::f64::consts::PI),
                branch_ambiguous: s.abs() < 1e-12,
            }
        })
        .collect();
    Ok(OpticsReport {
        n,
        period: tm.period,
        frequencies: tunes.iter().map(|t| t.phase / tm.period).collect(),
        tunes,
        transform: t,
        symplectic_residual: tm.symplectic_residual(),
        cosymplex_off_block: jacobi::off_block_residual(&mc_d),
        transfer_off_block: jacobi::off_block_residual(&m_d),
        decoupled_transfer: m_d,
        decoupled_symplex: ms_d,
        jacobi: stats,
    })
}

fn require_unique(report: &OpticsReport) -> Result<()> {
    if let Some(k) = report.tunes.iter().position(|t| t.cos.abs() > 1.0 + 1e-9) {
        return Err(Error::UnstableSystem {
            reason: format!("degree of freedom {k} has |cos| > 1"),
        });
    }
    if let Some(k) = report.tunes.iter().position(|t| t.branch_ambiguous) {
        return Err(Error::UnstableSystem {
            reason: format!("degree of freedom {k} is at an integer or half-integer tune; the matched beam is not unique"),
        });
    }
    Ok(())
}

/// The σ-matrix left unchanged by `M`, with emittance `εᵢ` per decoupled
/// degree of freedom: `σ = R⁻¹·Diag(ε₁, ε₁, ε₂, ε₂, …)·R⁻ᵀ`.
pub fn matched_sigma(m: &TransferMatrix, emittances: &[f64]) -> Result<SigmaMatrix> {
    let report = analyze_one_turn(m)?;
    matched_sigma_from(&report, emittances)
}

pub fn matched_sigma_from(report: &OpticsReport, emittances: &[f64]) -> Result<SigmaMatrix> {
    if emittances.len() != report.n {
        return Err(Error::DimensionMismatch {
            expected: report.n,
            found: emittances.len(),
        });
    }
    if emittances.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidArgument("emittances must be positive".into()));
    }
    require_unique(report)?;
    let diag = DMatrix::from_fn(2 * report.n, 2 * report.n, |i, j| {
        if i == j {
            emittances[i / 2]
        } else {
            0.0
        }
    });
    let rinv = report.transform.inverse_matrix();
    let sigma = rinv * diag * rinv.transpose();
    // symmetrize the rounding of the two products
    SigmaMatrix::new((&sigma + sigma.transpose()) * 0.5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveForce {
    /// `F̄` with `exp(F̄τ) = M`.
    pub force: DMatrix<f64>,
    /// A phase sits at 0 or π; the principal branch was returned.
    pub branch_ambiguous: bool,
    /// `max |exp(F̄τ) − M|`.
    pub reconstruction_residual: f64,
}

/// `F̄ = ln(M)/τ` through the decoupled frame.
pub fn effective_force(m: &TransferMatrix) -> Result<EffectiveForce> {
    let report = analyze_one_turn(m)?;
    if let Some(k) = report.tunes.iter().position(|t| t.cos.abs() > 1.0 + 1e-9) {
        return Err(Error::UnstableSystem {
            reason: format!("degree of freedom {k} has |cos| > 1"),
        });
    }
    let dim = 2 * report.n;
    let md = &report.decoupled_transfer;
    let mut fd = DMatrix::zeros(dim, dim);
    let mut ambiguous = false;
    for (k, t) in report.tunes.iter().enumerate() {
        let o = 2 * k;
        if t.branch_ambiguous {
            ambiguous = true;
            if t.cos < 0.0 {
                // −1 block: the principal logarithm is a half turn
                fd[(o, o + 1)] = std::f64::consts::PI;
                fd[(o + 1, o)] = -std::f64::consts::PI;
            }
            continue;
        }
        let scale = t.phase / t.sin;
        for a in 0..2 {
            for b in 0..2 {
                let id = if a == b { t.cos } else { 0.0 };
                fd[(o + a, o + b)] = scale * (md[(o + a, o + b)] - id);
            }
        }
    }
    let rinv = report.transform.inverse_matrix();
    let force = rinv * fd * report.transform.matrix() / m.period;
    let (back, _) = matrix_exponential(&force, m.period)?;
    Ok(EffectiveForce {
        reconstruction_residual: (back - &m.m).amax(),
        force,
        branch_ambiguous: ambiguous,
    })
}

/// `σ ↦ M·σ·Mᵀ`.
pub fn propagate_sigma(sigma: &SigmaMatrix, m: &TransferMatrix) -> Result<SigmaMatrix> {
    if sigma.sigma.nrows() != m.m.nrows() {
        return Err(Error::DimensionMismatch {
            expected: m.m.nrows(),
            found: sigma.sigma.nrows(),
        });
    }
    Ok(SigmaMatrix {
        sigma: &m.m * &sigma.sigma * m.m.transpose(),
    })
}

/// Bilinear observables of a real state vector `ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorObservables {
    /// `fₖ = ½ψ̄γₖψ` with `ψ̄ = ψᵀγ₀`; zero for cosymplex `k`.
    pub f: [f64; 16],
    /// `gₖ = ψ̄(γₖF + Fγₖ)ψ`; zero for symplex `k`.
    pub g: [f64; 16],
}

pub fn spinor_observables(psi: &Vector4<f64>, f: &Matrix4) -> SpinorObservables {
    let bar = psi.transpose() * basis(0);
    let mut out = SpinorObservables {
        f: [0.0; 16],
        g: [0.0; 16],
    };
    for k in 0..16 {
        let g = basis(k);
        out.f[k] = 0.5 * (bar * g * psi)[0];
        out.g[k] = (bar * (g * f + f * g) * psi)[0];
    }
    out
}

/// `g₁₀..g₁₅` expressed through the `fₖ` and the EMEQ quantities of `F`.
pub fn cosymplex_g(s: &EmeqState, f: &[f64; 16]) -> [f64; 6] {
    let (e0, p, e, b) = (s.energy, &s.momentum, &s.electric, &s.magnetic);
    let coeffs = s.coefficients();
    let sum: f64 = (0..10).map(|k| coeffs[k] * f[k]).sum();
    [
        4.0 * (p.x * f[7] + p.y * f[8] + p.z * f[9] - b.x * f[1] - b.y * f[2] - b.z * f[3]),
        4.0 * (-e0 * f[7] - p.y * f[6] + p.z * f[5] + e.y * f[3] - e.z * f[2] - b.x * f[0]),
        4.0 * (-e0 * f[8] + p.x * f[6] - p.z * f[4] - e.x * f[3] + e.z * f[1] - b.y * f[0]),
        4.0 * (-e0 * f[9] - p.x * f[5] + p.y * f[4] + e.x * f[2] - e.y * f[1] - b.z * f[0]),
        4.0 * (e.x * f[7] + e.y * f[8] + e.z * f[9] - b.x * f[4] - b.y * f[5] - b.z * f[6]),
        4.0 * sum,
    ]
}

/// Time derivatives `ġ₁₀..ġ₁₄` along `ψ̇ = Fψ` (`ġ₁₅ = 0`).
pub fn cosymplex_g_dot(s: &EmeqState, f: &[f64; 16]) -> [f64; 5] {
    let m = s.mass_components();
    let b = s.aux_vectors().b;
    [
        8.0 * (m.m_r * f[0] + b.x * f[4] + b.y * f[5] + b.z * f[6]),
        8.0 * (m.m_r * f[1] - m.m_g * f[4] + b.y * f[9] - b.z * f[8]),
        8.0 * (m.m_r * f[2] - m.m_g * f[5] + b.z * f[7] - b.x * f[9]),
        8.0 * (m.m_r * f[3] - m.m_g * f[6] + b.x * f[8] - b.y * f[7]),
        -8.0 * (m.m_g * f[0] + b.x * f[1] + b.y * f[2] + b.z * f[3]),
    ]
}
