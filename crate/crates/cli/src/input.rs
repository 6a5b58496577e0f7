//! Matrix files: a JSON document or a whitespace-separated text table.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    Force,
    Transfer,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Force => "force",
            Kind::Transfer => "transfer",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MatrixFile {
    pub path: String,
    /// `None` for text files, which carry no metadata.
    pub kind: Option<Kind>,
    pub n: usize,
    pub tau: Option<f64>,
    pub label: Option<String>,
    pub matrix: DMatrix<f64>,
    pub digest: String,
}

#[derive(Debug)]
pub enum InputError {
    Io(String, std::io::Error),
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    Invalid(String, String),
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Io(path, e) => write!(f, "{path}: {e}"),
            InputError::Parse {
                path,
                line,
                column,
                message,
            } => write!(f, "{path}:{line}:{column}: {message}"),
            InputError::Invalid(path, message) => write!(f, "{path}: {message}"),
        }
    }
}

impl std::error::Error for InputError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonFile {
    kind: Kind,
    n: usize,
    #[serde(default)]
    tau: Option<f64>,
    #[serde(default)]
    label: Option<String>,
    matrix: Vec<Vec<f64>>,
}

impl<'de> Deserialize<'de> for Kind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "force" => Ok(Kind::Force),
            "transfer" => Ok(Kind::Transfer),
            other => Err(serde::de::Error::unknown_variant(other, &["force", "transfer"])),
        }
    }
}

pub fn read(path: &Path) -> Result<MatrixFile, InputError> {
    let name = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| InputError::Io(name.clone(), e))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| InputError::Parse {
        path: name.clone(),
        line: 1,
        column: 1,
        message: format!("not UTF-8: {e}"),
    })?;
    let digest = format!("sha256:{:x}", Sha256::digest(&bytes));
    let mut file = if text.trim_start().starts_with('{') {
        parse_json(&name, &text)?
    } else {
        parse_text(&name, &text)?
    };
    file.digest = digest;
    Ok(file)
}

fn parse_json(path: &str, text: &str) -> Result<MatrixFile, InputError> {
    let doc: JsonFile = serde_json::from_str(text).map_err(|e| InputError::Parse {
        path: path.into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let dim = doc.matrix.len();
    if dim != 2 * doc.n {
        return Err(InputError::Invalid(
            path.into(),
            format!("n = {} but the matrix has {dim} rows", doc.n),
        ));
    }
    if let Some((i, row)) = doc.matrix.iter().enumerate().find(|(_, r)| r.len() != dim) {
        return Err(InputError::Invalid(
            path.into(),
            format!("row {} has {} entries, expected {dim}", i + 1, row.len()),
        ));
    }
    if let Some(tau) = doc.tau {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(InputError::Invalid(path.into(), format!("tau must be positive, got {tau}")));
        }
    }
    let matrix = DMatrix::from_fn(dim, dim, |i, j| doc.matrix[i][j]);
    finish(path, Some(doc.kind), doc.tau, doc.label, matrix)
}

fn parse_text(path: &str, text: &str) -> Result<MatrixFile, InputError> {
    let err = |line: usize, column: usize, message: String| InputError::Parse {
        path: path.into(),
        line,
        column,
        message,
    };
    // (line, column, token) for every token, skipping blank lines
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| {
            let toks: Vec<(usize, &str)> = l
                .split_whitespace()
                .map(|t| (t.as_ptr() as usize - l.as_ptr() as usize + 1, t))
                .collect();
            (k + 1, toks)
        })
        .filter(|(_, toks)| !toks.is_empty());

    let (line, head) = lines.next().ok_or_else(|| err(1, 1, "empty file".into()))?;
    if head.len() != 1 {
        return Err(err(line, head[1].0, "first line must hold only the dimension 2n".into()));
    }
    let (col, tok) = head[0];
    let dim: usize = tok
        .parse()
        .map_err(|_| err(line, col, format!("expected the dimension 2n, found `{tok}`")))?;
    if dim == 0 || dim % 2 != 0 {
        return Err(err(line, col, format!("dimension must be even and positive, got {dim}")));
    }

    let mut matrix = DMatrix::zeros(dim, dim);
    let mut last = line;
    for i in 0..dim {
        let (line, toks) = lines
            .next()
            .ok_or_else(|| err(last + 1, 1, format!("expected {dim} rows, found {i}")))?;
        last = line;
        if toks.len() != dim {
            let col = toks.get(dim).map_or(1, |t| t.0);
            return Err(err(line, col, format!("row {} has {} entries, expected {dim}", i + 1, toks.len())));
        }
        for (j, (col, tok)) in toks.into_iter().enumerate() {
            let v: f64 = tok
                .parse()
                .map_err(|_| err(line, col, format!("`{tok}` is not a number")))?;
            if !v.is_finite() {
                return Err(err(line, col, format!("`{tok}` is not finite")));
            }
            matrix[(i, j)] = v;
        }
    }
    if let Some((line, toks)) = lines.next() {
        return Err(err(line, toks[0].0, "trailing content after the matrix".into()));
    }
    finish(path, None, None, None, matrix)
}

fn finish(
    path: &str,
    kind: Option<Kind>,
    tau: Option<f64>,
    label: Option<String>,
    matrix: DMatrix<f64>,
) -> Result<MatrixFile, InputError> {
    if matrix.iter().any(|x| !x.is_finite()) {
        return Err(InputError::Invalid(path.into(), "matrix entries must be finite".into()));
    }
    Ok(MatrixFile {
        path: path.into(),
        kind,
        n: matrix.nrows() / 2,
        tau,
        label,
        matrix,
        digest: String::new(),
    })
}
