//! Plain-text matrix and vector files.
//!
//! A matrix file starts with a line `m n` followed by `m` rows of `n`
//! whitespace-separated numbers. A vector file is whitespace-separated
//! numbers.

use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

fn parse_numbers(text: &str, path: &Path) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                message: format!("'{tok}' is not a number"),
            })
        })
        .collect()
}

pub fn parse_matrix(text: &str, path: &Path) -> Result<DenseMatrix> {
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| parse_err("empty matrix file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(format!("bad header '{header}'"))))
        .collect::<Result<_>>()?;
    let [m, n] = dims[..] else {
        return Err(parse_err(format!("header must be 'm n', got '{header}'")));
    };
    let mut rows = Vec::with_capacity(m);
    for line in lines {
        let row = parse_numbers(line, path)?;
        if row.len() != n {
            return Err(parse_err(format!(
                "row {} has {} entries, expected {n}",
                rows.len(),
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.len() != m {
        return Err(parse_err(format!("found {} rows, expected {m}", rows.len())));
    }
    DenseMatrix::from_rows(&rows)
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, path)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_numbers(&text, path)
}
