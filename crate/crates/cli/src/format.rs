//! JSON files for models, operators and states.
//!
//! A complex matrix is an array of rows and every entry is a `[re, im]`
//! pair. Files written here are canonical: one matrix row per line and
//! floats in shortest round-trip form, so reading and rewriting a canonical
//! file reproduces it byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use qmarkov::{ComplexMatrix64, DensityMatrix64, HermitianOperator64, ModelSpec64, C64};
use serde::Deserialize;
use thiserror::Error;

pub type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        source: serde_json::Error,
    },

    #[error("{context}: {message}")]
    Shape { context: String, message: String },

    #[error("{context}: {source}")]
    Invalid {
        context: String,
        source: qmarkov::Error,
    },
}

type Result<T> = std::result::Result<T, FormatError>;

fn shape(context: &str, message: impl Into<String>) -> FormatError {
    FormatError::Shape {
        context: context.to_string(),
        message: message.into(),
    }
}

fn invalid(context: &str) -> impl FnOnce(qmarkov::Error) -> FormatError + '_ {
    move |source| FormatError::Invalid {
        context: context.to_string(),
        source,
    }
}

/// Model document: `{"dim", "hamiltonian", "couplings", "labels"?}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    pub hamiltonian: MatrixRows,
    pub couplings: Vec<MatrixRows>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

impl ModelFile {
    pub fn parse(text: &str, context: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| FormatError::Json {
            context: context.to_string(),
            source,
        })
    }

    pub fn from_model(model: &ModelSpec64) -> Self {
        ModelFile {
            dim: model.dim(),
            hamiltonian: rows_of(model.hamiltonian().matrix()),
            couplings: model.couplings().iter().map(rows_of).collect(),
            labels: model.labels().map(<[String]>::to_vec),
        }
    }

    pub fn to_model(&self, context: &str) -> Result<ModelSpec64> {
        let h = matrix_from_rows(&self.hamiltonian, Some(self.dim), &format!("{context}: hamiltonian"))?;
        let h = HermitianOperator64::new(h).map_err(invalid(context))?;
        let couplings = self
            .couplings
            .iter()
            .enumerate()
            .map(|(k, rows)| matrix_from_rows(rows, Some(self.dim), &format!("{context}: coupling {k}")))
            .collect::<Result<Vec<_>>>()?;
        let model = ModelSpec64::new(h, couplings).map_err(invalid(context))?;
        match &self.labels {
            Some(labels) => model.with_labels(labels.clone()).map_err(invalid(context)),
            None => Ok(model),
        }
    }

    pub fn to_canonical_string(&self) -> String {
        let mut out = String::from("{\n");
        out.push_str(&format!("  \"dim\": {},\n", self.dim));
        out.push_str("  \"hamiltonian\": ");
        write_rows(&mut out, &self.hamiltonian, 2);
        out.push_str(",\n  \"couplings\": [");
        for (k, l) in self.couplings.iter().enumerate() {
            out.push_str(if k == 0 { "\n    " } else { ",\n    " });
            write_rows(&mut out, l, 4);
        }
        if !self.couplings.is_empty() {
            out.push_str("\n  ");
        }
        out.push(']');
        if let Some(labels) = &self.labels {
            let quoted: Vec<String> = labels.iter().map(|s| json_string(s)).collect();
            out.push_str(&format!(",\n  \"labels\": [{}]", quoted.join(", ")));
        }
        out.push_str("\n}\n");
        out
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    serde_json::to_string(&x).expect("finite floats always serialize")
}

fn write_rows(out: &mut String, rows: &MatrixRows, indent: usize) {
    let pad = " ".repeat(indent);
    out.push('[');
    for (i, row) in rows.iter().enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        out.push_str(&pad);
        out.push_str("  [");
        let cells: Vec<String> = row
            .iter()
            .map(|[re, im]| format!("[{}, {}]", fmt_f64(*re), fmt_f64(*im)))
            .collect();
        out.push_str(&cells.join(", "));
        out.push(']');
    }
    out.push('\n');
    out.push_str(&pad);
    out.push(']');
}

pub fn rows_of(m: &ComplexMatrix64) -> MatrixRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Square matrix from rows, optionally of a required dimension.
pub fn matrix_from_rows(rows: &MatrixRows, dim: Option<usize>, context: &str) -> Result<ComplexMatrix64> {
    let n = rows.len();
    if n == 0 {
        return Err(shape(context, "matrix has no rows"));
    }
    if let Some(d) = dim {
        if n != d {
            return Err(shape(context, format!("expected {d} rows, found {n}")));
        }
    }
    let mut m = ComplexMatrix64::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(shape(context, format!("row {i} has {} entries, expected {n}", row.len())));
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(shape(context, format!("entry ({i}, {j}) is not finite")));
            }
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| FormatError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<ModelSpec64> {
    let context = path.display().to_string();
    ModelFile::parse(&read(path)?, &context)?.to_model(&context)
}

pub fn parse_matrix(text: &str, context: &str) -> Result<ComplexMatrix64> {
    let rows: MatrixRows = serde_json::from_str(text).map_err(|source| FormatError::Json {
        context: context.to_string(),
        source,
    })?;
    matrix_from_rows(&rows, None, context)
}

pub fn load_matrix(path: &Path) -> Result<ComplexMatrix64> {
    parse_matrix(&read(path)?, &path.display().to_string())
}

pub fn load_operator(path: &Path) -> Result<HermitianOperator64> {
    let context = path.display().to_string();
    HermitianOperator64::new(load_matrix(path)?).map_err(invalid(&context))
}

pub fn load_state(path: &Path, tol: f64) -> Result<DensityMatrix64> {
    let context = path.display().to_string();
    DensityMatrix64::new(load_matrix(path)?, tol).map_err(invalid(&context))
}

/// Canonical text of a bare matrix file.
pub fn matrix_to_string(m: &ComplexMatrix64) -> String {
    let mut out = String::new();
    write_rows(&mut out, &rows_of(m), 0);
    out.push('\n');
    out
}
