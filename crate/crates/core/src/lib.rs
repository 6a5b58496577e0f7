//! Structure-preserving decoupling of coupled linear oscillators.
//!
//! A force matrix `F = γ₀·A` (with `A` symmetric) of a linear Hamiltonian
//! system is brought to 2×2 block-diagonal form by a sequence of symplectic
//! similarity transformations generated by the ten real Dirac matrices that
//! are themselves symplices. For two degrees of freedom the transformation
//! angles follow in closed form from an interpretation of the ten expansion
//! coefficients as energy, momentum, electric and magnetic field
//! ([`emeq::EmeqState`]). Larger systems are handled by a Jacobi-like sweep
//! over 4×4 pivot submatrices ([`jacobi`]).
//!
//! Phase-space coordinates are ordered `(q₁, p₁, q₂, p₂, …)`, which fixes the
//! symplectic unit matrix `γ₀` to be block diagonal with `[[0, 1], [-1, 0]]`
//! blocks.

pub mod decouple4;
pub mod dirac;
pub mod emeq;
mod error;
pub mod jacobi;
#[cfg(test)]
mod oracle;
pub mod optics;
pub mod tol;
pub mod transform;

pub use decouple4::{
    complex_intermediate, complex_low_energy, decouple, decouple_block_diagonal, diagonalize,
    to_hamiltonian_form, to_normal_form, DecoupleConfig, DecoupleResult, Eigensystem, Form,
    StepRecord, Symplex4,
};
pub use dirac::{gamma, GammaIndex, Matrix4, RdmCoefficients};
pub use emeq::{
    AuxVectors, Classification, EmeqState, Frequency, MassComponents, PairNature,
    SpectralInvariants,
};
pub use error::Error;
pub use jacobi::{
    jacobi_decouple, off_block_norms, random_test_symplex, IterationStats, JacobiConfig,
    JacobiResult, SymplexN,
};
pub use optics::{
    analyze_one_turn, effective_force, matched_sigma, propagate_sigma, spinor_observables,
    EffectiveForce, OpticsReport, SigmaMatrix, SpinorObservables, TransferMatrix, Tune,
};
pub use transform::{GeneratorKind, Step, SymplecticTransform};

pub type Result<T, E = Error> = std::result::Result<T, E>;
