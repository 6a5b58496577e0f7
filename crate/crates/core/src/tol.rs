//! Default tolerances shared by the pipelines.
//!
//! Every pipeline takes its tolerances through a config struct; these are the
//! defaults and the values reported when no override is given.

/// Relative Frobenius tolerance for the symplex / cosymplex predicates.
pub const PREDICATE: f64 = 1e-10;

/// Angles (and arctan/arctanh numerators) below this are treated as zero and
/// the step is logged as skipped.
pub const STEP: f64 = 1e-14;

/// Postcondition tolerance for the shape of a decoupled matrix.
pub const POSTCONDITION: f64 = 1e-10;

/// Agreement required between the closed-form decoupled coefficients and the
/// pipeline output.
pub const CROSS_CHECK: f64 = 1e-7;

/// Relative threshold under which `K₂` counts as zero.
pub const DEGENERATE_K2: f64 = 1e-12;

/// Convergence threshold of the Jacobi sweep, relative to `‖F‖_F`.
pub const JACOBI: f64 = 1e-12;

/// Symplecticity required of transfer matrices handed to the optics routines.
pub const TRANSFER_SYMPLECTIC: f64 = 1e-8;
