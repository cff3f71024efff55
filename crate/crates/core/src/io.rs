//! Plain-text formats for kernels and permutations.
//!
//! A matrix file is CSV with one row of `n` decimal entries per state and no
//! header. A permutation file is a single line of `n` whitespace-separated,
//! 0-based images.

use std::fs;
use std::path::Path;

use crate::chain::{validate, Permutation, TransitionMatrix, ValidationReport};
use crate::error::{Error, Result};

pub fn parse_matrix_csv(text: &str) -> Result<TransitionMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().map_err(|_| {
                    Error::Parse(format!(
                        "row {}, column {}: {field:?} is not a number",
                        line + 1,
                        col + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    TransitionMatrix::from_rows(rows)
}

/// Loads a matrix file and runs [`validate`] on it.
pub fn load_matrix(path: &Path) -> Result<(TransitionMatrix, ValidationReport)> {
    let text = fs::read_to_string(path)?;
    let p = parse_matrix_csv(&text)?;
    let report = validate(&p);
    Ok((p, report))
}

pub fn matrix_to_csv(p: &TransitionMatrix) -> String {
    let mut out = String::new();
    for row in p.rows() {
        let fields: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_permutation(text: &str) -> Result<Permutation> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let line = lines
        .next()
        .ok_or_else(|| Error::Parse("empty permutation file".into()))?;
    if lines.next().is_some() {
        return Err(Error::Parse("permutation file must hold a single line".into()));
    }
    let forward = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::Parse(format!("{tok:?} is not a nonnegative integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    Permutation::new(forward)
}

pub fn load_permutation(path: &Path) -> Result<Permutation> {
    parse_permutation(&fs::read_to_string(path)?)
}

pub fn permutation_to_line(f: &Permutation) -> String {
    let parts: Vec<String> = f.forward().iter().map(usize::to_string).collect();
    parts.join(" ") + "\n"
}
