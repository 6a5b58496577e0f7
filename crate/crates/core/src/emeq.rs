//! Electromechanical-equivalence view of a 4×4 symplex.
//!
//! The ten symplex coefficients `f₀..f₉` are read as energy `ℰ = f₀`,
//! momentum `P = (f₁, f₂, f₃)`, electric field `E = (f₄, f₅, f₆)` and
//! magnetic field `B = (f₇, f₈, f₉)`. Under the symplectic similarity
//! transformations generated by `γ₀..γ₉` these transform like their
//! namesakes under phase rotations, spatial rotations and Lorentz boosts.

use nalgebra::{DMatrix, Vector3};

use crate::dirac::{self, Matrix4, RdmCoefficients};
use crate::{tol, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmeqState {
    pub energy: f64,
    pub momentum: Vector3<f64>,
    pub electric: Vector3<f64>,
    pub magnetic: Vector3<f64>,
}

/// `M_r = E·B`, `M_g = B·P`, `M_b = E·P`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MassComponents {
    pub m_r: f64,
    pub m_g: f64,
    pub m_b: f64,
}

/// `r = ℰP + B×E`, `g = ℰE + P×B`, `b = ℰB + E×P`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AuxVectors {
    pub r: Vector3<f64>,
    pub g: Vector3<f64>,
    pub b: Vector3<f64>,
}

/// What kind of eigenvalue pair a frequency belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairNature {
    /// `±iω`: a stable oscillation.
    Imaginary,
    /// `±ω`: an unstable (unfocused) degree of freedom.
    Real,
    /// Part of a complex quadruple; the value is the common modulus `ρ`.
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency {
    pub value: f64,
    pub nature: PairNature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    TwoImaginaryPairs,
    TwoRealPairs,
    MixedRealImaginary,
    ComplexQuadruple,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::TwoImaginaryPairs => "two-imaginary-pairs",
            Classification::TwoRealPairs => "two-real-pairs",
            Classification::MixedRealImaginary => "mixed-real-imaginary",
            Classification::ComplexQuadruple => "complex-quadruple",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralInvariants {
    pub k1: f64,
    pub k2: f64,
    /// `Det(F) = K₁² − 4K₂`.
    pub det: f64,
    /// `ω₁ = √(K₁ + 2√K₂)` and `ω₂ = √(K₁ − 2√K₂)` as magnitudes.
    pub omega: [Frequency; 2],
    pub classification: Classification,
    /// `|K₂|` is below the degeneracy threshold; `K₂` was taken as zero for
    /// the classification.
    pub degenerate: bool,
    /// `ρ = (K₁² + 4|K₂|)^{1/4}` for complex quadruples.
    pub complex_radius: Option<f64>,
}

impl SpectralInvariants {
    /// Both eigenvalue pairs on the imaginary axis.
    pub fn is_stable(&self) -> bool {
        self.classification == Classification::TwoImaginaryPairs
    }

    pub fn is_complex(&self) -> bool {
        self.classification == Classification::ComplexQuadruple
    }
}

impl EmeqState {
    pub fn from_coefficients(c: &RdmCoefficients) -> Self {
        EmeqState {
            energy: c[0],
            momentum: Vector3::new(c[1], c[2], c[3]),
            electric: Vector3::new(c[4], c[5], c[6]),
            magnetic: Vector3::new(c[7], c[8], c[9]),
        }
    }

    pub fn coefficients(&self) -> RdmCoefficients {
        let (p, e, b) = (&self.momentum, &self.electric, &self.magnetic);
        RdmCoefficients::from_symplex_coefficients([
            self.energy,
            p.x,
            p.y,
            p.z,
            e.x,
            e.y,
            e.z,
            b.x,
            b.y,
            b.z,
        ])
    }

    pub fn to_matrix(&self) -> Matrix4 {
        self.coefficients().to_matrix()
    }

    pub fn mass_components(&self) -> MassComponents {
        MassComponents {
            m_r: self.electric.dot(&self.magnetic),
            m_g: self.magnetic.dot(&self.momentum),
            m_b: self.electric.dot(&self.momentum),
        }
    }

    pub fn aux_vectors(&self) -> AuxVectors {
        let (en, p, e, b) = (self.energy, &self.momentum, &self.electric, &self.magnetic);
        AuxVectors {
            r: p * en + b.cross(e),
            g: e * en + p.cross(b),
            b: b * en + e.cross(p),
        }
    }

    /// `K₁ = ℰ² + B² − E² − P²`.
    pub fn k1(&self) -> f64 {
        self.energy * self.energy + self.magnetic.norm_squared()
            - self.electric.norm_squared()
            - self.momentum.norm_squared()
    }

    /// `K₂ = (ℰB + E×P)² − (E·B)² − (P·B)²`.
    pub fn k2(&self) -> f64 {
        let m = self.mass_components();
        self.aux_vectors().b.norm_squared() - m.m_r * m.m_r - m.m_g * m.m_g
    }

    /// The expanded form of `K₂`:
    /// `−2ℰ P·(E×B) + ℰ²B² + E²P² − (E·P)² − (E·B)² − (P·B)²`.
    pub fn k2_expanded(&self) -> f64 {
        let (en, p, e, b) = (self.energy, &self.momentum, &self.electric, &self.magnetic);
        let m = self.mass_components();
        -2.0 * en * p.dot(&e.cross(b)) + en * en * b.norm_squared()
            + e.norm_squared() * p.norm_squared()
            - m.m_b * m.m_b
            - m.m_r * m.m_r
            - m.m_g * m.m_g
    }

    pub fn spectral_invariants(&self) -> SpectralInvariants {
        classify(self.k1(), self.k2(), tol::DEGENERATE_K2)
    }
}

/// Classify the spectrum from the two similarity invariants.
///
/// Eigenvalues satisfy `λ² = −(K₁ ± 2√K₂)`.
pub fn classify(k1: f64, k2: f64, degenerate_tol: f64) -> SpectralInvariants {
    let det = k1 * k1 - 4.0 * k2;
    let degenerate = k2.abs() < degenerate_tol * (k1 * k1).max(1.0);
    if !degenerate && k2 < 0.0 {
        let rho = (k1 * k1 + 4.0 * k2.abs()).powf(0.25);
        let f = Frequency {
            value: rho,
            nature: PairNature::Complex,
        };
        return SpectralInvariants {
            k1,
            k2,
            det,
            omega: [f, f],
            classification: Classification::ComplexQuadruple,
            degenerate,
            complex_radius: Some(rho),
        };
    }
    let root = if degenerate { 0.0 } else { k2.sqrt() };
    let freq = |radicand: f64| {
        if radicand >= 0.0 {
            Frequency {
                value: radicand.sqrt(),
                nature: PairNature::Imaginary,
            }
        } else {
            Frequency {
                value: (-radicand).sqrt(),
                nature: PairNature::Real,
            }
        }
    };
    let omega = [freq(k1 + 2.0 * root), freq(k1 - 2.0 * root)];
    let classification = match (omega[0].nature, omega[1].nature) {
        (PairNature::Imaginary, PairNature::Imaginary) => Classification::TwoImaginaryPairs,
        (PairNature::Real, PairNature::Real) => Classification::TwoRealPairs,
        _ => Classification::MixedRealImaginary,
    };
    SpectralInvariants {
        k1,
        k2,
        det,
        omega,
        classification,
        degenerate,
        complex_radius: None,
    }
}

/// Read the EMEQ quantities off a symplex.
///
/// Fails with [`Error::NotASymplex`] if any cosymplex coefficient exceeds
/// `tol·max(1, ‖F‖_F)`.
pub fn emeq_from_symplex(f: &Matrix4, tol: f64) -> Result<EmeqState> {
    let c = dirac::rdm_coefficients(f);
    let cos = c.max_cosymplex();
    if cos > tol * f.norm().max(1.0) {
        return Err(Error::NotASymplex { residual: cos });
    }
    Ok(EmeqState::from_coefficients(&c))
}

/// `Iₖ = Tr(Sᵏ)` for `k = 1..4`.
pub fn lax_invariants(s: &Matrix4) -> [f64; 4] {
    let s2 = s * s;
    [s.trace(), s2.trace(), (s2 * s).trace(), (s2 * s2).trace()]
}

/// `Iₖ = Tr(Sᵏ)` for any dimension.
pub fn lax_invariants_n(s: &DMatrix<f64>) -> [f64; 4] {
    let s2 = s * s;
    [s.trace(), s2.trace(), (&s2 * s).trace(), (&s2 * &s2).trace()]
}
