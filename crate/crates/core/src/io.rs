//! File formats: matrices (JSON, text, CSV) and certificate documents.
//!
//! * JSON: `{"dim": n, "entries": [[re, im], ...]}`, row-major.
//! * Text: one row per line, whitespace-separated `re+imj` tokens.
//! * CSV: header `row,col,re,im`, one entry per line, row-major.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::certify::CertificateDocument;
use crate::error::{Error, Result};
use crate::tensor::{min_eigval, DenseOperator, C64};
use crate::witness::{bell_diagonal_coeffs, choi_witness, ChoiParams};
use crate::ChoiType;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixFormat {
    Json,
    Csv,
    TextMatrix,
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Model(#[from] Error),
}

pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:e}{sign}{:e}j", z.re, z.im.abs())
}

/// Parses `re+imj`, `re-imj`, `re` or `imj`.
pub fn parse_complex(token: &str) -> std::result::Result<C64, IoError> {
    let bad = || IoError::Parse(format!("bad complex token {token:?}"));
    let t = token.trim();
    let Some(body) = t.strip_suffix('j') else {
        return t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            let im = body[i..].parse::<f64>().map_err(|_| bad())?;
            Ok(C64::new(re, im))
        }
        None => body.parse::<f64>().map(|im| C64::new(0.0, im)).map_err(|_| bad()),
    }
}

pub fn to_text_matrix(m: &DenseOperator) -> String {
    let n = m.dim();
    let mut out = String::new();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format_complex(m.get(i, j))).collect();
        writeln!(out, "{}", row.join(" ")).expect("writing to a String");
    }
    out
}

pub fn from_text_matrix(text: &str) -> std::result::Result<DenseOperator, IoError> {
    let rows: Vec<Vec<C64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(parse_complex).collect())
        .collect::<std::result::Result<_, _>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(IoError::Parse(format!("matrix is not square ({n} rows)")));
    }
    Ok(DenseOperator::from_entries(n, rows.into_iter().flatten().collect())?)
}

#[derive(Serialize, Deserialize)]
struct CsvEntry {
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

pub fn write_csv_matrix<W: Write>(m: &DenseOperator, out: W) -> std::result::Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    let n = m.dim();
    for row in 0..n {
        for col in 0..n {
            let z = m.get(row, col);
            w.serialize(CsvEntry {
                row,
                col,
                re: z.re,
                im: z.im,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv_matrix<R: Read>(input: R) -> std::result::Result<DenseOperator, IoError> {
    let mut entries = Vec::new();
    for rec in csv::Reader::from_reader(input).deserialize() {
        let e: CsvEntry = rec?;
        entries.push(e);
    }
    let n = (entries.len() as f64).sqrt().round() as usize;
    if n * n != entries.len() {
        return Err(IoError::Parse(format!("{} entries is not a square count", entries.len())));
    }
    let mut m = DenseOperator::zeros(n);
    for e in entries {
        if e.row >= n || e.col >= n {
            return Err(IoError::Parse(format!("entry ({}, {}) out of range", e.row, e.col)));
        }
        m.set(e.row, e.col, C64::new(e.re, e.im));
    }
    Ok(m)
}

/// Witness written by `qw build --format json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessDocument {
    pub metadata: WitnessMetadata,
    pub matrix: DenseOperator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessMetadata {
    pub d: usize,
    pub a: Vec<f64>,
    #[serde(rename = "type")]
    pub kind: ChoiType,
    pub normalized: bool,
    pub min_eig: f64,
    /// `bell_coeffs[k][m] = ⟨ψ_{km}|W|ψ_{km}⟩`.
    pub bell_coeffs: Vec<Vec<f64>>,
}

pub fn witness_document(params: &ChoiParams) -> Result<WitnessDocument> {
    let matrix = choi_witness(params)?;
    Ok(WitnessDocument {
        metadata: WitnessMetadata {
            d: params.d,
            a: params.a.clone(),
            kind: params.kind,
            normalized: params.normalized,
            min_eig: min_eigval(&matrix)?,
            bell_coeffs: bell_diagonal_coeffs(&matrix, params.d)?,
        },
        matrix,
    })
}

pub fn write_witness<W: Write>(
    params: &ChoiParams,
    format: MatrixFormat,
    mut out: W,
) -> std::result::Result<(), IoError> {
    match format {
        MatrixFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &witness_document(params)?)?;
            writeln!(out)?;
        }
        MatrixFormat::TextMatrix => out.write_all(to_text_matrix(&choi_witness(params)?).as_bytes())?,
        MatrixFormat::Csv => write_csv_matrix(&choi_witness(params)?, out)?,
    }
    Ok(())
}

pub fn certificate_to_json(doc: &CertificateDocument) -> std::result::Result<String, IoError> {
    Ok(serde_json::to_string_pretty(doc)?)
}

pub fn certificate_from_json(text: &str) -> std::result::Result<CertificateDocument, IoError> {
    Ok(serde_json::from_str(text)?)
}
