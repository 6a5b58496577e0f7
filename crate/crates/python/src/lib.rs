//! Python bindings for `symdec`.
//!
//! Matrices cross the boundary as nested lists of floats (any sequence of
//! sequences, including NumPy arrays, is accepted on input).

use nalgebra::DMatrix;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use symdec::decouple4::{self, DecoupleConfig, Form, Symplex4};
use symdec::dirac;
use symdec::jacobi::{self, JacobiConfig, SymplexN};
use symdec::optics;
use symdec::transform::{self, GeneratorKind, Step, SymplecticTransform};
use symdec::Error;

create_exception!(symdec_py, SymdecError, PyException, "Base class of all symdec errors.");
create_exception!(symdec_py, ValidationError, SymdecError, "Input is not of the required kind.");
create_exception!(symdec_py, InfeasibleError, SymdecError, "The requested reduction cannot be carried out.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::IndexOutOfRange { .. }
        | Error::DimensionMismatch { .. }
        | Error::NotASymplex { .. }
        | Error::NotSymplectic { .. }
        | Error::WrongForm { .. }
        | Error::InvalidArgument(_) => ValidationError::new_err(e.to_string()),
        _ => InfeasibleError::new_err(e.to_string()),
    }
}

type Rows = Vec<Vec<f64>>;

fn to_matrix(rows: &Rows) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(ValidationError::new_err("matrix must be square and non-empty"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn to_matrix4(rows: &Rows) -> PyResult<symdec::Matrix4> {
    let m = to_matrix(rows)?;
    if m.nrows() != 4 {
        return Err(ValidationError::new_err(format!("expected a 4x4 matrix, got {0}x{0}", m.nrows())));
    }
    Ok(symdec::Matrix4::from_fn(|i, j| m[(i, j)]))
}

fn rows(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn rows4(m: &symdec::Matrix4) -> Rows {
    (0..4).map(|i| (0..4).map(|j| m[(i, j)]).collect()).collect()
}

fn parse_form(form: &str) -> PyResult<Form> {
    match form {
        "block" | "block-diagonal" => Ok(Form::BlockDiagonal),
        "hamiltonian" => Ok(Form::HamiltonianForm),
        "normal" => Ok(Form::NormalForm),
        other => Err(ValidationError::new_err(format!(
            "unknown form {other:?}; use 'block', 'hamiltonian' or 'normal'"
        ))),
    }
}

/// A symplectic similarity transform `F ↦ R F R⁻¹` with its replayable log.
#[pyclass(module = "symdec_py", name = "Transform", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTransform(SymplecticTransform);

#[pymethods]
impl PyTransform {
    #[getter]
    fn matrix(&self) -> Rows {
        rows(self.0.matrix())
    }

    #[getter]
    fn inverse(&self) -> Rows {
        rows(self.0.inverse_matrix())
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Log entries as `(kind, index, angle, pairs)` tuples; `kind` is
    /// `"generator"`, `"pair-rotation"` or `"pair-scaling"`.
    #[getter]
    fn log(&self) -> Vec<(&'static str, usize, f64, Option<(usize, usize)>)> {
        self.0
            .log()
            .iter()
            .map(|s| match *s {
                Step::Generator {
                    generator,
                    angle,
                    pairs,
                } => ("generator", generator as usize, angle, pairs),
                Step::PairRotation { pair, angle } => ("pair-rotation", pair, angle, None),
                Step::PairScaling { pair, exponent } => ("pair-scaling", pair, exponent, None),
            })
            .collect()
    }

    /// `R F R⁻¹`.
    fn apply(&self, f: Rows) -> PyResult<Rows> {
        self.0.apply(&to_matrix(&f)?).map(|m| rows(&m)).map_err(to_py)
    }

    fn symplectic_residual(&self) -> f64 {
        self.0.symplectic_residual()
    }

    fn __repr__(&self) -> String {
        format!("Transform(dim={}, steps={})", self.0.dim(), self.0.log().len())
    }
}

#[pyclass(module = "symdec_py", name = "Frequency", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyFrequency {
    value: f64,
    /// `"imaginary"`, `"real"` or `"complex"`.
    nature: &'static str,
}

fn frequency(f: &symdec::Frequency) -> PyFrequency {
    PyFrequency {
        value: f.value,
        nature: match f.nature {
            symdec::PairNature::Imaginary => "imaginary",
            symdec::PairNature::Real => "real",
            symdec::PairNature::Complex => "complex",
        },
    }
}

#[pymethods]
impl PyFrequency {
    fn __repr__(&self) -> String {
        format!("Frequency({}, {:?})", self.value, self.nature)
    }
}

/// Outcome of decoupling a 4×4 symplex.
#[pyclass(module = "symdec_py", name = "DecoupleResult", frozen, skip_from_py_object)]
struct PyDecoupleResult(decouple4::DecoupleResult);

#[pymethods]
impl PyDecoupleResult {
    #[getter]
    fn transform(&self) -> PyTransform {
        PyTransform(self.0.transform.clone())
    }

    #[getter]
    fn decoupled(&self) -> Rows {
        rows4(self.0.decoupled.matrix())
    }

    #[getter]
    fn form(&self) -> &'static str {
        self.0.form.as_str()
    }

    #[getter]
    fn classification(&self) -> &'static str {
        self.0.invariants.classification.as_str()
    }

    #[getter]
    fn k1(&self) -> f64 {
        self.0.invariants.k1
    }

    #[getter]
    fn k2(&self) -> f64 {
        self.0.invariants.k2
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.0.residual
    }

    #[getter]
    fn frequencies(&self) -> Vec<PyFrequency> {
        self.0.frequencies.iter().map(frequency).collect()
    }

    #[getter]
    fn complex_radius(&self) -> Option<f64> {
        self.0.complex_radius
    }

    /// Pipeline steps as `(generator, angle, skipped, purpose)`.
    #[getter]
    fn steps(&self) -> Vec<(u8, f64, bool, &'static str)> {
        self.0
            .steps
            .iter()
            .map(|s| (s.generator, s.angle, s.skipped, s.purpose))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "DecoupleResult(form={:?}, steps={}, residual={:e})",
            self.0.form.as_str(),
            self.0.applied_steps().count(),
            self.0.residual
        )
    }
}

/// Outcome of the Jacobi-like sweep on a `2n×2n` symplex.
#[pyclass(module = "symdec_py", name = "JacobiResult", frozen, skip_from_py_object)]
struct PyJacobiResult(jacobi::JacobiResult);

#[pymethods]
impl PyJacobiResult {
    #[getter]
    fn transform(&self) -> PyTransform {
        PyTransform(self.0.transform.clone())
    }

    #[getter]
    fn decoupled(&self) -> Rows {
        rows(self.0.decoupled.matrix())
    }

    #[getter]
    fn block_steps(&self) -> usize {
        self.0.stats.block_steps
    }

    #[getter]
    fn hamiltonian_steps(&self) -> usize {
        self.0.stats.hamiltonian_steps
    }

    /// `(i, j, mean square amplitude before the step)` per pivot.
    #[getter]
    fn pivots(&self) -> Vec<(usize, usize, f64)> {
        self.0.stats.pivots.iter().map(|p| (p.i, p.j, p.amplitude)).collect()
    }

    #[getter]
    fn residual_history(&self) -> Vec<f64> {
        self.0.stats.residual_history.clone()
    }

    #[getter]
    fn final_residual(&self) -> f64 {
        self.0.stats.final_residual
    }

    fn __repr__(&self) -> String {
        format!(
            "JacobiResult(n={}, block_steps={}, final_residual={:e})",
            self.0.decoupled.n(),
            self.0.stats.block_steps,
            self.0.stats.final_residual
        )
    }
}

#[pyclass(module = "symdec_py", name = "Tune", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyTune {
    cos: f64,
    sin: f64,
    phase: f64,
    tune: f64,
    branch_ambiguous: bool,
}

#[pymethods]
impl PyTune {
    fn __repr__(&self) -> String {
        format!("Tune(cos={}, sin={}, tune={})", self.cos, self.sin, self.tune)
    }
}

/// Decoupled one-turn matrix with its tunes.
#[pyclass(module = "symdec_py", name = "OpticsReport", frozen, skip_from_py_object)]
struct PyOpticsReport(optics::OpticsReport);

#[pymethods]
impl PyOpticsReport {
    #[getter]
    fn tunes(&self) -> Vec<PyTune> {
        self.0
            .tunes
            .iter()
            .map(|t| PyTune {
                cos: t.cos,
                sin: t.sin,
                phase: t.phase,
                tune: t.tune,
                branch_ambiguous: t.branch_ambiguous,
            })
            .collect()
    }

    #[getter]
    fn frequencies(&self) -> Vec<f64> {
        self.0.frequencies.clone()
    }

    #[getter]
    fn transform(&self) -> PyTransform {
        PyTransform(self.0.transform.clone())
    }

    #[getter]
    fn decoupled_transfer(&self) -> Rows {
        rows(&self.0.decoupled_transfer)
    }

    #[getter]
    fn cosymplex_off_block(&self) -> f64 {
        self.0.cosymplex_off_block
    }

    /// Matched second moments for the given emittances.
    fn matched_sigma(&self, emittances: Vec<f64>) -> PyResult<Rows> {
        optics::matched_sigma_from(&self.0, &emittances)
            .map(|s| rows(s.matrix()))
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let t: Vec<String> = self.0.tunes.iter().map(|t| format!("{:.6}", t.tune)).collect();
        format!("OpticsReport(n={}, tunes=[{}])", self.0.n, t.join(", "))
    }
}

/// The real Dirac matrix `γₖ`, `k = 0..15`.
#[pyfunction]
fn gamma(k: usize) -> PyResult<Rows> {
    let k = dirac::GammaIndex::new(k).map_err(to_py)?;
    Ok(rows4(&dirac::gamma(k)))
}

/// The sixteen expansion coefficients of a 4×4 matrix.
#[pyfunction]
fn rdm_coefficients(m: Rows) -> PyResult<Vec<f64>> {
    Ok(dirac::rdm_coefficients(&to_matrix4(&m)?).as_array().to_vec())
}

/// `Σ cₖ γₖ`.
#[pyfunction]
fn from_coefficients(c: [f64; 16]) -> Rows {
    rows4(&dirac::RdmCoefficients(c).to_matrix())
}

/// `(energy, momentum, electric, magnetic)` of a 4×4 symplex.
#[pyfunction]
#[pyo3(signature = (f, tol = symdec::tol::PREDICATE))]
fn emeq(f: Rows, tol: f64) -> PyResult<(f64, [f64; 3], [f64; 3], [f64; 3])> {
    let s = symdec::emeq::emeq_from_symplex(&to_matrix4(&f)?, tol).map_err(to_py)?;
    let v = |x: &nalgebra::Vector3<f64>| [x.x, x.y, x.z];
    Ok((s.energy, v(&s.momentum), v(&s.electric), v(&s.magnetic)))
}

/// `(K₁, K₂, classification)` of a 4×4 symplex.
#[pyfunction]
#[pyo3(signature = (f, tol = symdec::tol::PREDICATE))]
fn spectral_invariants(f: Rows, tol: f64) -> PyResult<(f64, f64, &'static str)> {
    let s = Symplex4::with_tolerance(to_matrix4(&f)?, tol).map_err(to_py)?;
    let inv = s.spectral_invariants();
    Ok((inv.k1, inv.k2, inv.classification.as_str()))
}

/// `R_b(ε)` for generator `b ∈ {0..9}`.
#[pyfunction]
fn basic_transform(b: u8, angle: f64) -> PyResult<PyTransform> {
    let kind = GeneratorKind::new(b).map_err(to_py)?;
    Ok(PyTransform(transform::basic_transform(kind, angle)))
}

/// `exp(F·s)`.
#[pyfunction]
#[pyo3(signature = (f, s = 1.0))]
fn matrix_exponential(f: Rows, s: f64) -> PyResult<Rows> {
    let (m, _) = transform::matrix_exponential(&to_matrix(&f)?, s).map_err(to_py)?;
    Ok(rows(&m))
}

/// Decouple a 4×4 symplex as far as `form` (`"block"`, `"hamiltonian"`,
/// `"normal"`); complex quadruples end in the complex canonical form.
#[pyfunction]
#[pyo3(signature = (f, form = "block", step_tol = None, post_tol = None))]
fn decouple(f: Rows, form: &str, step_tol: Option<f64>, post_tol: Option<f64>) -> PyResult<PyDecoupleResult> {
    let mut cfg = DecoupleConfig::default();
    if let Some(t) = step_tol {
        cfg.step_tol = t;
    }
    if let Some(t) = post_tol {
        cfg.post_tol = t;
    }
    let s = Symplex4::with_tolerance(to_matrix4(&f)?, cfg.symplex_tol).map_err(to_py)?;
    decouple4::decouple(&s, parse_form(form)?, &cfg)
        .map(PyDecoupleResult)
        .map_err(to_py)
}

/// Jacobi-like block diagonalization of a `2n×2n` symplex.
#[pyfunction]
#[pyo3(signature = (f, form = "block", tol = symdec::tol::JACOBI, max_steps = None))]
fn jacobi_decouple(f: Rows, form: &str, tol: f64, max_steps: Option<usize>) -> PyResult<PyJacobiResult> {
    let form = parse_form(form)?;
    let cfg = JacobiConfig {
        tol,
        max_steps,
        hamiltonian: form != Form::BlockDiagonal,
        ..JacobiConfig::default()
    };
    let s = SymplexN::with_tolerance(to_matrix(&f)?, cfg.decouple.symplex_tol).map_err(to_py)?;
    let mut r = jacobi::jacobi_decouple(&s, &cfg).map_err(to_py)?;
    if form == Form::NormalForm {
        r = jacobi::scale_to_normal_form(&r, &cfg.decouple).map_err(to_py)?;
    }
    Ok(PyJacobiResult(r))
}

/// The random test symplex of size `2n` for `seed`.
#[pyfunction]
fn random_test_symplex(n: usize, seed: u64) -> PyResult<Rows> {
    if n == 0 {
        return Err(ValidationError::new_err("n must be at least 1"));
    }
    Ok(rows(jacobi::random_test_symplex(n, seed).matrix()))
}

fn transfer(m: &Rows, period: f64) -> PyResult<optics::TransferMatrix> {
    optics::TransferMatrix::new(to_matrix(m)?, period).map_err(to_py)
}

/// Decouple a one-turn matrix and extract its tunes.
#[pyfunction]
#[pyo3(signature = (m, period = 1.0))]
fn analyze_one_turn(m: Rows, period: f64) -> PyResult<PyOpticsReport> {
    optics::analyze_one_turn(&transfer(&m, period)?)
        .map(PyOpticsReport)
        .map_err(to_py)
}

/// σ with `M σ Mᵀ = σ` and emittance `εᵢ` per degree of freedom.
#[pyfunction]
#[pyo3(signature = (m, emittances, period = 1.0))]
fn matched_sigma(m: Rows, emittances: Vec<f64>, period: f64) -> PyResult<Rows> {
    optics::matched_sigma(&transfer(&m, period)?, &emittances)
        .map(|s| rows(s.matrix()))
        .map_err(to_py)
}

/// `(F̄, reconstruction residual, branch ambiguous)` with `exp(F̄·period) = M`.
#[pyfunction]
#[pyo3(signature = (m, period = 1.0))]
fn effective_force(m: Rows, period: f64) -> PyResult<(Rows, f64, bool)> {
    let e = optics::effective_force(&transfer(&m, period)?).map_err(to_py)?;
    Ok((rows(&e.force), e.reconstruction_residual, e.branch_ambiguous))
}

/// `M σ Mᵀ`.
#[pyfunction]
fn propagate_sigma(sigma: Rows, m: Rows) -> PyResult<Rows> {
    let s = optics::SigmaMatrix::new(to_matrix(&sigma)?).map_err(to_py)?;
    optics::propagate_sigma(&s, &transfer(&m, 1.0)?)
        .map(|s| rows(s.matrix()))
        .map_err(to_py)
}

#[pymodule]
fn symdec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("SymdecError", py.get_type::<SymdecError>())?;
    m.add("ValidationError", py.get_type::<ValidationError>())?;
    m.add("InfeasibleError", py.get_type::<InfeasibleError>())?;
    m.add_class::<PyTransform>()?;
    m.add_class::<PyFrequency>()?;
    m.add_class::<PyDecoupleResult>()?;
    m.add_class::<PyJacobiResult>()?;
    m.add_class::<PyTune>()?;
    m.add_class::<PyOpticsReport>()?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(rdm_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(from_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(emeq, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_invariants, m)?)?;
    m.add_function(wrap_pyfunction!(basic_transform, m)?)?;
    m.add_function(wrap_pyfunction!(matrix_exponential, m)?)?;
    m.add_function(wrap_pyfunction!(decouple, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_decouple, m)?)?;
    m.add_function(wrap_pyfunction!(random_test_symplex, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_one_turn, m)?)?;
    m.add_function(wrap_pyfunction!(matched_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(effective_force, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_sigma, m)?)?;
    Ok(())
}
