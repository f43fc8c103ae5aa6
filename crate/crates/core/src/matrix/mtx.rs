//! Matrix Market coordinate format.
//!
//! Reads `real`, `integer` and `pattern` fields with `general` or `symmetric`
//! symmetry. Symmetric files are expanded to full storage by mirroring
//! off-diagonal entries, pattern entries take the value `1.0`, and the result
//! is canonicalized (duplicates summed, zeros dropped). The writer always emits
//! `coordinate real general` with 17 significant digits.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use thiserror::Error;

use super::{CooMatrix, MatrixError, MAX_INDEX};

#[derive(Debug, Error)]
pub enum MtxError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: malformed header: {reason}")]
    Header { line: usize, reason: String },
    #[error("line {line}: unsupported matrix market type `{what}`")]
    Unsupported { line: usize, what: String },
    #[error("line {line}: malformed size line")]
    SizeLine { line: usize },
    #[error("line {line}: malformed entry: {reason}")]
    Entry { line: usize, reason: String },
    #[error("line {line}: entry ({row}, {col}) outside declared {n_rows}x{n_cols} bounds")]
    OutOfBounds {
        line: usize,
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("line {line}: declared {declared} entries but found {found}")]
    CountMismatch {
        line: usize,
        declared: usize,
        found: usize,
    },
    #[error("line {line}: {source}")]
    Matrix {
        line: usize,
        #[source]
        source: MatrixError,
    },
}

impl MtxError {
    /// Line number (1-based) the error refers to, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            MtxError::Io(_) => None,
            MtxError::Header { line, .. }
            | MtxError::Unsupported { line, .. }
            | MtxError::SizeLine { line }
            | MtxError::Entry { line, .. }
            | MtxError::OutOfBounds { line, .. }
            | MtxError::CountMismatch { line, .. }
            | MtxError::Matrix { line, .. } => Some(*line),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_header(line: &str, line_no: usize) -> Result<(Field, Symmetry), MtxError> {
    let header_err = |reason: &str| MtxError::Header {
        line: line_no,
        reason: reason.to_string(),
    };
    let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(header_err("expected `%%MatrixMarket` banner"));
    }
    if tokens.len() != 5 {
        return Err(header_err("expected `%%MatrixMarket matrix coordinate <field> <symmetry>`"));
    }
    if tokens[1] != "matrix" {
        return Err(MtxError::Unsupported {
            line: line_no,
            what: tokens[1].clone(),
        });
    }
    if tokens[2] != "coordinate" {
        return Err(MtxError::Unsupported {
            line: line_no,
            what: tokens[2].clone(),
        });
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => {
            return Err(MtxError::Unsupported {
                line: line_no,
                what: other.to_string(),
            })
        }
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => {
            return Err(MtxError::Unsupported {
                line: line_no,
                what: other.to_string(),
            })
        }
    };
    Ok((field, symmetry))
}

fn parse_size(line: &str, line_no: usize) -> Result<(usize, usize, usize), MtxError> {
    let parts: Vec<usize> = line
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| MtxError::SizeLine { line: line_no })?;
    match parts.as_slice() {
        &[rows, cols, nnz] => {
            for (what, value) in [("n_rows", rows), ("n_cols", cols), ("nnz", nnz)] {
                if value > MAX_INDEX {
                    return Err(MtxError::Matrix {
                        line: line_no,
                        source: MatrixError::TooLarge { what, value },
                    });
                }
            }
            Ok((rows, cols, nnz))
        }
        _ => Err(MtxError::SizeLine { line: line_no }),
    }
}

/// Reads a Matrix Market coordinate matrix into canonical COO form.
pub fn read_matrix_market<R: BufRead>(source: R) -> Result<CooMatrix, MtxError> {
    let mut lines = source.lines();
    let mut line_no = 0usize;

    let header = match lines.next() {
        Some(line) => {
            line_no += 1;
            line?
        }
        None => {
            return Err(MtxError::Header {
                line: 1,
                reason: "empty input".into(),
            })
        }
    };
    let (field, symmetry) = parse_header(&header, line_no)?;

    let mut size = None;
    for line in lines.by_ref() {
        line_no += 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size = Some(parse_size(trimmed, line_no)?);
        break;
    }
    let (n_rows, n_cols, declared) = size.ok_or(MtxError::SizeLine { line: line_no.max(1) })?;

    let expected_tokens = if field == Field::Pattern { 2 } else { 3 };
    let mut triplets = Vec::with_capacity(match symmetry {
        Symmetry::General => declared,
        Symmetry::Symmetric => declared.saturating_mul(2),
    });
    let mut found = 0usize;
    for line in lines {
        line_no += 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        found += 1;
        if found > declared {
            return Err(MtxError::CountMismatch {
                line: line_no,
                declared,
                found,
            });
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != expected_tokens {
            return Err(MtxError::Entry {
                line: line_no,
                reason: format!("expected {expected_tokens} fields, found {}", tokens.len()),
            });
        }
        let index = |s: &str| {
            s.parse::<usize>().map_err(|_| MtxError::Entry {
                line: line_no,
                reason: format!("invalid index `{s}`"),
            })
        };
        let r = index(tokens[0])?;
        let c = index(tokens[1])?;
        if r == 0 || c == 0 || r > n_rows || c > n_cols {
            return Err(MtxError::OutOfBounds {
                line: line_no,
                row: r,
                col: c,
                n_rows,
                n_cols,
            });
        }
        let v = match field {
            Field::Pattern => 1.0,
            Field::Integer => tokens[2].parse::<i64>().map(|v| v as f64).map_err(|_| MtxError::Entry {
                line: line_no,
                reason: format!("invalid integer `{}`", tokens[2]),
            })?,
            Field::Real => tokens[2].parse::<f64>().map_err(|_| MtxError::Entry {
                line: line_no,
                reason: format!("invalid real `{}`", tokens[2]),
            })?,
        };
        let (r, c) = (r - 1, c - 1);
        triplets.push((r, c, v));
        if symmetry == Symmetry::Symmetric && r != c {
            if c >= n_rows || r >= n_cols {
                return Err(MtxError::OutOfBounds {
                    line: line_no,
                    row: c + 1,
                    col: r + 1,
                    n_rows,
                    n_cols,
                });
            }
            triplets.push((c, r, v));
        }
    }
    if found != declared {
        return Err(MtxError::CountMismatch {
            line: line_no,
            declared,
            found,
        });
    }
    CooMatrix::from_triplets(n_rows, n_cols, triplets).map_err(|source| MtxError::Matrix {
        line: line_no,
        source,
    })
}

/// Opens and parses a `.mtx` file.
pub fn read_matrix_market_file(path: impl AsRef<Path>) -> Result<CooMatrix, MtxError> {
    let file = File::open(path)?;
    read_matrix_market(BufReader::new(file))
}

/// Writes `a` as `coordinate real general` with 1-based indices.
pub fn write_matrix_market<W: Write>(a: &CooMatrix, mut out: W) -> io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz())?;
    for (r, c, v) in a.iter() {
        writeln!(out, "{} {} {:.16e}", r + 1, c + 1, v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::example_matrix;

    fn parse(text: &str) -> Result<CooMatrix, MtxError> {
        read_matrix_market(text.as_bytes())
    }

    const FIG1: &str = "%%MatrixMarket matrix coordinate real general
% example
4 4 8
1 2 6
1 3 1
2 1 2
2 3 8
2 4 3
3 3 4
4 2 7
4 3 5
";

    #[test]
    fn reads_example() {
        let a = parse(FIG1).unwrap();
        assert_eq!(a.rows(), &[0, 0, 1, 1, 1, 2, 3, 3]);
        assert_eq!(a.cols(), &[1, 2, 0, 2, 3, 2, 1, 2]);
        assert_eq!(a.data(), &[6.0, 1.0, 2.0, 8.0, 3.0, 4.0, 7.0, 5.0]);
    }

    #[test]
    fn reads_empty() {
        let a = parse("%%MatrixMarket matrix coordinate real general\n3 3 0\n").unwrap();
        assert_eq!((a.n_rows(), a.n_cols(), a.nnz()), (3, 3, 0));
    }

    #[test]
    fn expands_symmetric() {
        let a = parse("%%MatrixMarket matrix coordinate real symmetric\n3 3 2\n2 1 5\n3 3 7\n").unwrap();
        assert_eq!(
            a.iter().collect::<Vec<_>>(),
            vec![(0, 1, 5.0), (1, 0, 5.0), (2, 2, 7.0)]
        );
    }

    #[test]
    fn pattern_and_integer_fields() {
        let a = parse("%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 1\n2 2\n").unwrap();
        assert_eq!(a.data(), &[1.0, 1.0]);
        let b = parse("%%MatrixMarket matrix coordinate integer general\n2 2 1\n1 2 -3\n").unwrap();
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![(0, 1, -3.0)]);
    }

    #[test]
    fn duplicates_summed_and_zeros_dropped() {
        let a = parse("%%MatrixMarket matrix coordinate real general\n2 2 4\n1 1 1\n1 1 2\n2 2 1\n2 2 -1\n").unwrap();
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![(0, 0, 3.0)]);
    }

    #[test]
    fn errors_name_lines() {
        let bad_header = parse("%%MatrixMarket matrix array real general\n2 2\n").unwrap_err();
        assert!(matches!(bad_header, MtxError::Unsupported { line: 1, .. }));

        let garbage = parse("hello\n").unwrap_err();
        assert!(matches!(garbage, MtxError::Header { line: 1, .. }));

        let complex = parse("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n").unwrap_err();
        assert!(matches!(complex, MtxError::Unsupported { line: 1, ref what } if what == "complex"));

        let oob = parse("%%MatrixMarket matrix coordinate real general\n% c\n2 2 1\n3 1 1.0\n").unwrap_err();
        assert!(matches!(oob, MtxError::OutOfBounds { line: 4, row: 3, .. }));

        let few = parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n").unwrap_err();
        assert!(matches!(few, MtxError::CountMismatch { declared: 2, found: 1, .. }));

        let many = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1.0\n2 2 1.0\n").unwrap_err();
        assert!(matches!(many, MtxError::CountMismatch { line: 4, .. }));

        let size = parse("%%MatrixMarket matrix coordinate real general\n2 x 1\n").unwrap_err();
        assert!(matches!(size, MtxError::SizeLine { line: 2 }));

        let entry = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n").unwrap_err();
        assert!(matches!(entry, MtxError::Entry { line: 3, .. }));
        assert_eq!(entry.line(), Some(3));
    }

    #[test]
    fn writer_round_trip() {
        let a = example_matrix();
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n4 4 8\n"));
        assert_eq!(parse(&text).unwrap(), a);
    }
}
