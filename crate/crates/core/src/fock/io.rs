//! Operator container (JSON) and CSV exports for vectors and spectra.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{basis_indexer, FockOperator, FockParams, FockVector};
use crate::error::{QhaError, Result};

pub const OPERATOR_FORMAT: &str = "qha-fock-operator";
pub const OPERATOR_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Container {
    format: String,
    version: u32,
    params: FockParams,
    basis: Vec<Vec<usize>>,
    /// Row-major entries as `[re, im]` pairs.
    entries: Vec<[f64; 2]>,
    /// Free-form provenance, ignored when reading.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<serde_json::Value>,
}

pub fn write_operator<W: Write>(op: &FockOperator, writer: W) -> Result<()> {
    write_operator_with_metadata(op, None, writer)
}

/// Container with an extra `metadata` object, e.g. the run configuration.
pub fn write_operator_with_metadata<W: Write>(
    op: &FockOperator,
    metadata: Option<serde_json::Value>,
    writer: W,
) -> Result<()> {
    let dim = op.dim();
    let mut entries = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let v = op.matrix[(i, j)];
            entries.push([v.re, v.im]);
        }
    }
    let container = Container {
        format: OPERATOR_FORMAT.to_string(),
        version: OPERATOR_FORMAT_VERSION,
        params: op.params,
        basis: basis_indexer(&op.params).into_iter().map(|a| a.0).collect(),
        entries,
        metadata,
    };
    serde_json::to_writer(writer, &container)?;
    Ok(())
}

pub fn read_operator<R: Read>(reader: R) -> Result<FockOperator> {
    let c: Container = serde_json::from_reader(reader)?;
    if c.format != OPERATOR_FORMAT {
        return Err(QhaError::Format(format!("unknown format tag {:?}", c.format)));
    }
    if c.version != OPERATOR_FORMAT_VERSION {
        return Err(QhaError::Format(format!("unsupported version {}", c.version)));
    }
    c.params.validate()?;
    let expected: Vec<Vec<usize>> = basis_indexer(&c.params).into_iter().map(|a| a.0).collect();
    if c.basis != expected {
        return Err(QhaError::Format("basis list does not match the graded order".into()));
    }
    let dim = expected.len();
    if c.entries.len() != dim * dim {
        return Err(QhaError::Format(format!(
            "expected {} entries, found {}",
            dim * dim,
            c.entries.len()
        )));
    }
    let matrix = DMatrix::from_row_iterator(dim, dim, c.entries.iter().map(|[re, im]| Complex64::new(*re, *im)));
    FockOperator::new(c.params, matrix)
}

pub fn save_operator(op: &FockOperator, path: &Path) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_operator(op, file)
}

pub fn load_operator(path: &Path) -> Result<FockOperator> {
    read_operator(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// CSV with columns `index,alpha,re,im`; `alpha` is dot-separated.
pub fn write_vector_csv<W: Write>(v: &FockVector, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["index", "alpha", "re", "im"])?;
    for (i, (alpha, c)) in basis_indexer(&v.params).iter().zip(v.coeffs.iter()).enumerate() {
        let label: Vec<String> = alpha.0.iter().map(|k| k.to_string()).collect();
        w.write_record([i.to_string(), label.join("."), c.re.to_string(), c.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// CSV with columns `index,singular_value`.
pub fn write_singular_values_csv<W: Write>(values: &[f64], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["index", "singular_value"])?;
    for (i, s) in values.iter().enumerate() {
        w.write_record([i.to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
