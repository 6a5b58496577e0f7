mod input;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use input::{InputError, Kind, MatrixFile};
use symdec::decouple4::{DecoupleResult, StepRecord};
use symdec::dirac::{rdm_coefficients, symplectic_residual_n, symplex_residual_n};
use symdec::emeq::lax_invariants_n;
use symdec::jacobi::{self, benchmark_size, scale_to_normal_form, BenchRow};
use symdec::optics::{analyze_one_turn_with, effective_force, matched_sigma_from};
use symdec::{
    decouple, jacobi_decouple, tol, DecoupleConfig, Error, Form, Frequency, JacobiConfig,
    PairNature, Step, Symplex4, SymplecticTransform, SymplexN, TransferMatrix,
};

const SCHEMA: &str = "symdec-report/1";

#[derive(Parser)]
#[command(name = "symdec", version, about = "Symplectic decoupling of linear Hamiltonian systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a matrix file and print its invariants.
    Check(CheckArgs),
    /// Decouple a force matrix into 2×2 blocks.
    Decouple(DecoupleArgs),
    /// Tunes, matched beam and effective force of a one-turn matrix.
    Tunes(TunesArgs),
    /// Jacobi step counts over random systems.
    Bench(BenchArgs),
}

#[derive(Args)]
struct Output {
    /// Emit the JSON report.
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Emit the plain-text report (default).
    #[arg(long)]
    text: bool,
}

#[derive(Args)]
struct CheckArgs {
    path: PathBuf,
    /// Override the matrix kind (text files default to force).
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Relative tolerance of the symplex predicate.
    #[arg(long, default_value_t = tol::PREDICATE)]
    symplex_tol: f64,
    /// Relative tolerance of the symplectic predicate.
    #[arg(long, default_value_t = tol::TRANSFER_SYMPLECTIC)]
    symplectic_tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormArg {
    Block,
    Hamiltonian,
    Normal,
}

#[derive(Args)]
struct PipelineTolerances {
    /// Jacobi convergence: off-block norm sum relative to ‖F‖.
    #[arg(long, default_value_t = tol::JACOBI)]
    tol: f64,
    /// Rotation or boost angles below this are skipped.
    #[arg(long, default_value_t = tol::STEP)]
    step_tol: f64,
    /// Postcondition tolerance of each 4×4 form.
    #[arg(long, default_value_t = tol::POSTCONDITION)]
    post_tol: f64,
    /// Closed-form against pipeline agreement.
    #[arg(long, default_value_t = tol::CROSS_CHECK)]
    cross_tol: f64,
    /// Relative tolerance of the symplex predicate.
    #[arg(long, default_value_t = tol::PREDICATE)]
    symplex_tol: f64,
}

impl PipelineTolerances {
    fn decouple(&self) -> DecoupleConfig {
        DecoupleConfig {
            step_tol: self.step_tol,
            post_tol: self.post_tol,
            cross_tol: self.cross_tol,
            symplex_tol: self.symplex_tol,
        }
    }

    fn json(&self) -> Value {
        json!({
            "jacobi": self.tol,
            "step": self.step_tol,
            "postcondition": self.post_tol,
            "cross_check": self.cross_tol,
            "symplex": self.symplex_tol,
        })
    }
}

#[derive(Args)]
struct DecoupleArgs {
    path: PathBuf,
    #[arg(long, value_enum, default_value = "block")]
    form: FormArg,
    #[command(flatten)]
    tolerances: PipelineTolerances,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TunesArgs {
    path: PathBuf,
    /// Period; required for force matrices, defaults to the file's `tau` or 1.
    #[arg(long)]
    tau: Option<f64>,
    /// One emittance per degree of freedom, comma separated.
    #[arg(long, value_delimiter = ',')]
    emittances: Option<Vec<f64>>,
    #[command(flatten)]
    tolerances: PipelineTolerances,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    /// Emit CSV instead of a table.
    #[arg(long)]
    csv: bool,
    #[arg(long, default_value_t = tol::JACOBI)]
    tol: f64,
}

enum Failure {
    Validation(String),
    Infeasible(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn category(&self) -> &'static str {
        match self {
            Failure::Validation(_) => "validation",
            Failure::Infeasible(_) => "infeasible",
            Failure::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Infeasible(m) | Failure::Io(m) => m,
        }
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        match e {
            InputError::Invalid(..) => Failure::Validation(e.to_string()),
            _ => Failure::Io(e.to_string()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::IndexOutOfRange { .. }
            | Error::DimensionMismatch { .. }
            | Error::NotASymplex { .. }
            | Error::NotSymplectic { .. }
            | Error::WrongForm { .. }
            | Error::InvalidArgument(_) => Failure::Validation(e.to_string()),
            _ => Failure::Infeasible(e.to_string()),
        }
    }
}

/// A finished report and the exit status it implies.
struct Outcome {
    report: Value,
    code: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (json_out, name) = match &cli.command {
        Command::Check(a) => (a.output.json, "check"),
        Command::Decouple(a) => (a.output.json, "decouple"),
        Command::Tunes(a) => (a.output.json, "tunes"),
        Command::Bench(_) => (false, "bench"),
    };
    let result = match cli.command {
        Command::Check(a) => cmd_check(&a),
        Command::Decouple(a) => cmd_decouple(&a),
        Command::Tunes(a) => cmd_tunes(&a),
        Command::Bench(a) => return cmd_bench(&a),
    };
    match result {
        Ok(o) => {
            emit(&o.report, json_out);
            ExitCode::from(o.code)
        }
        Err((f, context)) => {
            if json_out {
                let mut doc = json!({
                    "schema": SCHEMA,
                    "command": name,
                    "error": {"category": f.category(), "message": f.message()},
                });
                if let Some(c) = context {
                    doc["context"] = c;
                }
                emit(&doc, true);
            } else {
                eprintln!("error: {}", f.message());
                if let Some(c) = context {
                    eprint!("{}", render::text(&c));
                }
            }
            ExitCode::from(f.code())
        }
    }
}

fn emit(report: &Value, json_out: bool) {
    let mut out = std::io::stdout().lock();
    let body = if json_out {
        serde_json::to_string_pretty(report).expect("report serializes") + "\n"
    } else {
        render::text(report)
    };
    // a closed pipe is not worth a panic
    let _ = out.write_all(body.as_bytes());
}

type CmdResult = Result<Outcome, (Failure, Option<Value>)>;

fn bare<E: Into<Failure>>(e: E) -> (Failure, Option<Value>) {
    (e.into(), None)
}

fn matrix_json(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|&x| json!(x)).collect()))
            .collect(),
    )
}

fn input_json(file: &MatrixFile, kind: Kind) -> Value {
    json!({
        "path": file.path,
        "kind": kind.as_str(),
        "n": file.n,
        "tau": file.tau,
        "label": file.label,
        "digest": file.digest,
    })
}

fn step_json(s: &Step) -> Value {
    match *s {
        Step::Generator {
            generator,
            angle,
            pairs,
        } => json!({
            "type": "generator",
            "generator": generator,
            "angle": angle,
            "pairs": pairs.map(|(i, j)| vec![i, j]),
        }),
        Step::PairRotation { pair, angle } => json!({
            "type": "pair-rotation",
            "pair": pair,
            "angle": angle,
        }),
        Step::PairScaling { pair, exponent } => json!({
            "type": "pair-scaling",
            "pair": pair,
            "exponent": exponent,
        }),
    }
}

fn pipeline_json(steps: &[StepRecord]) -> Value {
    Value::Array(
        steps
            .iter()
            .map(|s| {
                json!({
                    "generator": s.generator,
                    "angle": s.angle,
                    "skipped": s.skipped,
                    "purpose": s.purpose,
                })
            })
            .collect(),
    )
}

fn nature(p: PairNature) -> &'static str {
    match p {
        PairNature::Imaginary => "imaginary",
        PairNature::Real => "real",
        PairNature::Complex => "complex",
    }
}

fn frequency_json(f: &Frequency) -> Value {
    json!({"value": f.value, "nature": nature(f.nature)})
}

fn to_fixed(m: &DMatrix<f64>) -> symdec::Matrix4 {
    symdec::Matrix4::from_fn(|i, j| m[(i, j)])
}

fn to_dyn(m: &symdec::Matrix4) -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

fn spectral_json(f: &symdec::Matrix4) -> Value {
    let inv = symdec::emeq::EmeqState::from_coefficients(&rdm_coefficients(f)).spectral_invariants();
    json!({
        "k1": inv.k1,
        "k2": inv.k2,
        "det": inv.det,
        "classification": inv.classification.as_str(),
        "degenerate": inv.degenerate,
        "omega": inv.omega.iter().map(frequency_json).collect::<Vec<_>>(),
        "complex_radius": inv.complex_radius,
    })
}

fn invariants_json(m: &DMatrix<f64>) -> Value {
    let lax = lax_invariants_n(m);
    let mut v = json!({"lax": lax});
    if m.nrows() == 4 {
        let s = spectral_json(&to_fixed(m));
        v["k1"] = s["k1"].clone();
        v["k2"] = s["k2"].clone();
    }
    v
}

fn cmd_check(a: &CheckArgs) -> CmdResult {
    let file = input::read(&a.path).map_err(bare)?;
    let kind = a.kind.or(file.kind).unwrap_or(Kind::Force);
    let m = &file.matrix;
    let mut report = json!({
        "schema": SCHEMA,
        "command": "check",
        "input": input_json(&file, kind),
    });
    let mut violations: Vec<String> = Vec::new();
    match kind {
        Kind::Force => {
            let limit = a.symplex_tol * m.norm().max(1.0);
            let residual = symplex_residual_n(m).map_err(bare)?;
            report["tolerances"] = json!({"symplex": a.symplex_tol});
            report["residuals"] = json!({"symplex": residual, "trace": m.trace()});
            if residual > limit {
                violations.push(format!("F^T - gamma0 F gamma0 has norm {residual:.3e} > {limit:.3e}"));
            }
            if file.n == 2 {
                let f = to_fixed(m);
                let c = rdm_coefficients(&f);
                for k in 10..16 {
                    if c[k].abs() > limit {
                        violations.push(format!("coefficient on gamma_{k} is {}", c[k]));
                    }
                }
                let s = symdec::emeq::EmeqState::from_coefficients(&c);
                let (mc, aux) = (s.mass_components(), s.aux_vectors());
                report["coefficients"] = json!(c.as_array());
                report["emeq"] = json!({
                    "energy": s.energy,
                    "momentum": [s.momentum.x, s.momentum.y, s.momentum.z],
                    "electric": [s.electric.x, s.electric.y, s.electric.z],
                    "magnetic": [s.magnetic.x, s.magnetic.y, s.magnetic.z],
                    "mass": {"m_r": mc.m_r, "m_g": mc.m_g, "m_b": mc.m_b},
                    "r": [aux.r.x, aux.r.y, aux.r.z],
                    "g": [aux.g.x, aux.g.y, aux.g.z],
                    "b": [aux.b.x, aux.b.y, aux.b.z],
                });
                report["spectrum"] = spectral_json(&f);
            }
            report["invariants"] = json!({"lax": lax_invariants_n(m)});
        }
        Kind::Transfer => {
            let limit = a.symplectic_tol * m.norm_squared().max(1.0);
            let residual = symplectic_residual_n(m).map_err(bare)?;
            report["tolerances"] = json!({"symplectic": a.symplectic_tol});
            report["residuals"] = json!({"symplectic": residual});
            report["determinant"] = json!(m.determinant());
            if residual > limit {
                violations.push(format!("M gamma0 M^T - gamma0 has norm {residual:.3e} > {limit:.3e}"));
            }
        }
    }
    let valid = violations.is_empty();
    report["valid"] = json!(valid);
    report["violations"] = json!(violations);
    Ok(Outcome {
        report,
        code: if valid { 0 } else { 2 },
    })
}

fn block_frequencies(m: &DMatrix<f64>, normal: bool) -> Vec<Value> {
    (0..m.nrows() / 2)
        .map(|k| {
            let o = 2 * k;
            if normal {
                return json!({"value": m[(o, o + 1)], "nature": "imaginary"});
            }
            let det = m[(o, o)] * m[(o + 1, o + 1)] - m[(o, o + 1)] * m[(o + 1, o)];
            if det >= 0.0 {
                json!({"value": det.sqrt(), "nature": "imaginary"})
            } else {
                json!({"value": (-det).sqrt(), "nature": "real"})
            }
        })
        .collect()
}

fn cmd_decouple(a: &DecoupleArgs) -> CmdResult {
    let file = input::read(&a.path).map_err(bare)?;
    if file.kind == Some(Kind::Transfer) {
        return Err(bare(Failure::Validation(
            "decouple expects a force matrix; use `tunes` for transfer matrices".into(),
        )));
    }
    let cfg = a.tolerances.decouple();
    let m = &file.matrix;
    let dim = m.nrows();
    let start = Instant::now();
    let mut report = json!({
        "schema": SCHEMA,
        "command": "decouple",
        "input": input_json(&file, Kind::Force),
        "tolerances": a.tolerances.json(),
        "requested_form": match a.form {
            FormArg::Block => "block-diagonal",
            FormArg::Hamiltonian => "hamiltonian",
            FormArg::Normal => "normal",
        },
    });

    let (transform, decoupled): (SymplecticTransform, DMatrix<f64>) = if file.n == 2 {
        let f = Symplex4::with_tolerance(to_fixed(m), cfg.symplex_tol).map_err(bare)?;
        let context = json!({"spectrum": spectral_json(f.matrix())});
        let target = match a.form {
            FormArg::Block => Form::BlockDiagonal,
            FormArg::Hamiltonian => Form::HamiltonianForm,
            FormArg::Normal => Form::NormalForm,
        };
        let r: DecoupleResult = decouple(&f, target, &cfg).map_err(|e| (e.into(), Some(context.clone())))?;
        report["classification"] = json!(r.invariants.classification.as_str());
        report["form"] = json!(r.form.as_str());
        report["pipeline"] = pipeline_json(&r.steps);
        report["frequencies"] = json!(r.frequencies.iter().map(frequency_json).collect::<Vec<_>>());
        report["complex_radius"] = json!(r.complex_radius);
        report["cross_check"] = match &r.cross_check {
            Some(x) => json!({
                "closed_form": x.closed_form,
                "pipeline": x.pipeline,
                "max_deviation": x.max_deviation,
                "passed": x.passed,
            }),
            None => Value::Null,
        };
        report["jacobi"] = Value::Null;
        (r.transform.clone(), to_dyn(r.decoupled.matrix()))
    } else {
        let f = SymplexN::with_tolerance(m.clone(), cfg.symplex_tol).map_err(bare)?;
        let jcfg = JacobiConfig {
            tol: a.tolerances.tol,
            hamiltonian: a.form != FormArg::Block,
            decouple: cfg,
            ..JacobiConfig::default()
        };
        let mut r = jacobi_decouple(&f, &jcfg).map_err(bare)?;
        let mut form = if jcfg.hamiltonian { "hamiltonian" } else { "block-diagonal" };
        if a.form == FormArg::Normal {
            r = scale_to_normal_form(&r, &cfg).map_err(bare)?;
            form = "normal";
        }
        let out = r.decoupled.matrix().clone();
        report["classification"] = Value::Null;
        report["form"] = json!(form);
        report["pipeline"] = json!([]);
        report["frequencies"] = json!(block_frequencies(&out, a.form == FormArg::Normal));
        report["complex_radius"] = Value::Null;
        report["cross_check"] = Value::Null;
        report["jacobi"] = json!({
            "block_steps": r.stats.block_steps,
            "hamiltonian_steps": r.stats.hamiltonian_steps,
            "pivots": r.stats.pivots.iter().map(|p| json!([p.i, p.j, p.amplitude])).collect::<Vec<_>>(),
            "residual_history": r.stats.residual_history,
            "final_residual": r.stats.final_residual,
        });
        (r.transform, out)
    };
    let elapsed = start.elapsed().as_secs_f64();

    let replayed = SymplecticTransform::replay(transform.log(), dim)
        .and_then(|t| t.apply(m))
        .map_err(bare)?;
    report["transform_log"] = json!(transform.log().iter().map(step_json).collect::<Vec<_>>());
    report["transform"] = matrix_json(transform.matrix());
    report["final_matrix"] = matrix_json(&decoupled);
    report["residuals"] = json!({
        "off_block": jacobi::off_block_residual(&decoupled),
        "off_hamiltonian": jacobi::off_hamiltonian_residual(&decoupled),
        "symplectic": transform.symplectic_residual(),
        "inverse": transform.inverse_residual(),
        "replay": (replayed - &decoupled).amax(),
    });
    report["invariants_before"] = invariants_json(m);
    report["invariants_after"] = invariants_json(&decoupled);
    report["timing_seconds"] = json!(elapsed);
    Ok(Outcome { report, code: 0 })
}

fn cmd_tunes(a: &TunesArgs) -> CmdResult {
    let file = input::read(&a.path).map_err(bare)?;
    let kind = file.kind.unwrap_or(Kind::Transfer);
    let tau = a.tau.or(file.tau);
    if let Some(t) = tau {
        if !(t.is_finite() && t > 0.0) {
            return Err(bare(Failure::Validation(format!("tau must be positive, got {t}"))));
        }
    }
    let start = Instant::now();
    let tm = match kind {
        Kind::Transfer => TransferMatrix::new(file.matrix.clone(), tau.unwrap_or(1.0)),
        Kind::Force => match tau {
            Some(t) => TransferMatrix::from_force(&file.matrix, t),
            None => {
                return Err(bare(Failure::Validation(
                    "a force matrix needs --tau to form exp(F tau)".into(),
                )))
            }
        },
    }
    .map_err(bare)?;
    let cfg = a.tolerances.decouple();
    let rep = analyze_one_turn_with(&tm, &cfg).map_err(|e| {
        let context = (tm.n() == 2).then(|| {
            let (ms, _) = symdec::dirac::split_n(tm.matrix()).expect("even square matrix");
            json!({"symplex_part": spectral_json(&to_fixed(&ms))})
        });
        (Failure::from(e), context)
    })?;

    let mut report = json!({
        "schema": SCHEMA,
        "command": "tunes",
        "input": input_json(&file, kind),
        "tolerances": a.tolerances.json(),
        "period": tm.period(),
        "transfer_matrix": matrix_json(tm.matrix()),
        "tunes": rep.tunes.iter().zip(&rep.frequencies).map(|(t, w)| json!({
            "cos": t.cos,
            "sin": t.sin,
            "phase": t.phase,
            "tune": t.tune,
            "frequency": w,
            "branch_ambiguous": t.branch_ambiguous,
        })).collect::<Vec<_>>(),
        "transform_log": rep.transform.log().iter().map(step_json).collect::<Vec<_>>(),
        "decoupled_transfer": matrix_json(&rep.decoupled_transfer),
        "decoupled_symplex": matrix_json(&rep.decoupled_symplex),
        "residuals": {
            "symplectic": rep.symplectic_residual,
            "transfer_off_block": rep.transfer_off_block,
            "cosymplex_off_block": rep.cosymplex_off_block,
            "transform_symplectic": rep.transform.symplectic_residual(),
        },
    });
    let mut code = 0;
    if let Some(eps) = &a.emittances {
        report["matched"] = match matched_sigma_from(&rep, eps) {
            Ok(s) => {
                let (m, sig) = (tm.matrix(), s.matrix());
                let sm = s.s_matrix();
                json!({
                    "emittances": eps,
                    "sigma": matrix_json(sig),
                    "fixed_point_residual": (m * sig * m.transpose() - sig).amax(),
                    "commutation_residual": (m * &sm - &sm * m).amax(),
                    "positive_definite": s.is_positive_definite(),
                })
            }
            Err(e) => {
                code = Failure::from(e.clone()).code();
                json!({"emittances": eps, "error": e.to_string()})
            }
        };
    }
    report["effective_force"] = match effective_force(&tm) {
        Ok(e) => json!({
            "matrix": matrix_json(&e.force),
            "reconstruction_residual": e.reconstruction_residual,
            "branch_ambiguous": e.branch_ambiguous,
        }),
        Err(e) => json!({"error": e.to_string()}),
    };
    report["jacobi"] = match &rep.jacobi {
        Some(s) => json!({"block_steps": s.block_steps, "hamiltonian_steps": s.hamiltonian_steps}),
        None => Value::Null,
    };
    report["timing_seconds"] = json!(start.elapsed().as_secs_f64());
    Ok(Outcome { report, code })
}

fn cmd_bench(a: &BenchArgs) -> ExitCode {
    if !(2 <= a.n_min && a.n_min <= a.n_max && a.n_max <= 16) {
        eprintln!("error: need 2 <= n-min <= n-max <= 16");
        return ExitCode::from(2);
    }
    if a.seeds == 0 {
        eprintln!("error: need at least one seed");
        return ExitCode::from(2);
    }
    let cfg = JacobiConfig {
        tol: a.tol,
        ..JacobiConfig::default()
    };
    let mut rows: Vec<BenchRow> = Vec::new();
    for n in a.n_min..=a.n_max {
        match benchmark_size(n, a.seeds, &cfg) {
            Ok(r) => rows.push(r),
            Err(e) => {
                let f = Failure::from(e);
                eprintln!("error: n = {n}: {}", f.message());
                return ExitCode::from(f.code());
            }
        }
    }
    let out = std::io::stdout().lock();
    let written = if a.csv { write_csv(out, &rows) } else { write_table(out, &rows) };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(4)
        }
    }
}

#[derive(serde::Serialize)]
struct CsvRow {
    n: usize,
    seeds: usize,
    mean_steps: f64,
    min: usize,
    max: usize,
    reference: f64,
    mean_seconds: f64,
    max_seconds: f64,
}

fn write_csv<W: Write>(out: W, rows: &[BenchRow]) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in rows {
        w.serialize(CsvRow {
            n: r.n,
            seeds: r.seeds,
            mean_steps: r.mean_steps,
            min: r.min_steps,
            max: r.max_steps,
            reference: r.reference,
            mean_seconds: r.mean_seconds,
            max_seconds: r.max_seconds,
        })?;
    }
    w.flush()
}

fn write_table<W: Write>(mut out: W, rows: &[BenchRow]) -> std::io::Result<()> {
    writeln!(
        out,
        "{:>3} {:>6} {:>10} {:>6} {:>6} {:>10} {:>12} {:>12}",
        "n", "seeds", "mean", "min", "max", "5n(n-2)/2", "mean [s]", "max [s]"
    )?;
    for r in rows {
        writeln!(
            out,
            "{:>3} {:>6} {:>10.2} {:>6} {:>6} {:>10.1} {:>12.3e} {:>12.3e}",
            r.n, r.seeds, r.mean_steps, r.min_steps, r.max_steps, r.reference, r.mean_seconds, r.max_seconds
        )?;
    }
    Ok(())
}
