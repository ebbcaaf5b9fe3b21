//! Matrix Market ingest and export (`coordinate real general` and
//! `array real general` only). File indices are 1-based.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::ForwardOperator;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Row};

const COORDINATE_HEADER: &str = "%%MatrixMarket matrix coordinate real general";
const ARRAY_HEADER: &str = "%%MatrixMarket matrix array real general";

#[derive(Clone, Copy, PartialEq)]
enum Layout {
    Coordinate,
    Array,
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<ForwardOperator> {
    let path = path.as_ref();
    let matrix = read_matrix_market(BufReader::new(File::open(path)?))?;
    let label = path
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty())
        .unwrap_or("matrix-market")
        .to_string();
    ForwardOperator::new(matrix, label, None)
}

pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<Matrix> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    let layout = match tokens.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["%%matrixmarket", "matrix", "coordinate", "real", "general"] => Layout::Coordinate,
        ["%%matrixmarket", "matrix", "array", "real", "general"] => Layout::Array,
        ["%%matrixmarket", ..] => return Err(Error::UnsupportedFormat(header.trim().to_string())),
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "missing %%MatrixMarket header".into(),
            })
        }
    };

    let mut data = lines.filter_map(|(no, l)| match l {
        Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('%') => None,
        Ok(s) => Some(Ok((no, s))),
        Err(e) => Some(Err(e)),
    });

    let (size_line, size) = data.next().transpose()?.ok_or(Error::Parse {
        line: 2,
        msg: "missing size line".into(),
    })?;
    let dims: Vec<usize> = parse_fields(&size, size_line)?;
    match layout {
        Layout::Coordinate => {
            let [nrows, ncols, nnz] = dims[..] else {
                return Err(Error::Parse {
                    line: size_line,
                    msg: "coordinate size line needs rows, columns and entries".into(),
                });
            };
            let mut triplets = Vec::with_capacity(nnz);
            let mut seen = std::collections::HashSet::with_capacity(nnz);
            for item in data {
                let (no, line) = item?;
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != 3 {
                    return Err(Error::Parse {
                        line: no,
                        msg: format!("expected `row col value`, got {} fields", fields.len()),
                    });
                }
                let r: usize = parse_one(fields[0], no)?;
                let c: usize = parse_one(fields[1], no)?;
                let v: f64 = parse_one(fields[2], no)?;
                if r == 0 || c == 0 || r > nrows || c > ncols {
                    return Err(Error::DimensionMismatch(format!(
                        "line {no}: entry ({r}, {c}) outside {nrows}×{ncols}"
                    )));
                }
                if !seen.insert((r, c)) {
                    return Err(Error::DuplicateEntry {
                        row: r,
                        col: c,
                        line: no,
                    });
                }
                triplets.push((r - 1, c - 1, v));
            }
            if triplets.len() != nnz {
                return Err(Error::DimensionMismatch(format!(
                    "header declares {nnz} entries, file has {}",
                    triplets.len()
                )));
            }
            Matrix::from_triplets(nrows, ncols, triplets)
        }
        Layout::Array => {
            let [nrows, ncols] = dims[..] else {
                return Err(Error::Parse {
                    line: size_line,
                    msg: "array size line needs rows and columns".into(),
                });
            };
            let mut col_major = Vec::with_capacity(nrows * ncols);
            for item in data {
                let (no, line) = item?;
                for tok in line.split_whitespace() {
                    col_major.push(parse_one::<f64>(tok, no)?);
                }
            }
            if col_major.len() != nrows * ncols {
                return Err(Error::DimensionMismatch(format!(
                    "array declares {} values, file has {}",
                    nrows * ncols,
                    col_major.len()
                )));
            }
            let mut row_major = vec![0.0; nrows * ncols];
            for (k, v) in col_major.into_iter().enumerate() {
                row_major[(k % nrows) * ncols + k / nrows] = v;
            }
            Matrix::dense(nrows, ncols, row_major)
        }
    }
}

/// Sparse matrices are written in coordinate format, dense in array format.
/// Values use the shortest representation that reads back bit-exactly.
pub fn write_matrix_market<W: Write>(matrix: &Matrix, mut out: W) -> Result<()> {
    let (n, d) = (matrix.nrows(), matrix.ncols());
    if matrix.is_sparse() {
        writeln!(out, "{COORDINATE_HEADER}")?;
        writeln!(out, "{n} {d} {}", matrix.nnz())?;
        for (i, row) in matrix.rows().enumerate() {
            if let Row::Sparse { cols, vals } = row {
                for (&c, &v) in cols.iter().zip(vals) {
                    writeln!(out, "{} {} {v:e}", i + 1, c + 1)?;
                }
            }
        }
    } else {
        writeln!(out, "{ARRAY_HEADER}")?;
        writeln!(out, "{n} {d}")?;
        for j in 0..d {
            for i in 0..n {
                writeln!(out, "{:e}", matrix.get(i, j))?;
            }
        }
    }
    Ok(())
}

/// A vector as an `n × 1` array.
pub fn write_vector<W: Write>(v: &[f64], mut out: W) -> Result<()> {
    writeln!(out, "{ARRAY_HEADER}")?;
    writeln!(out, "{} 1", v.len())?;
    for x in v {
        writeln!(out, "{x:e}")?;
    }
    Ok(())
}

pub fn read_vector<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let m = read_matrix_market(reader)?;
    if m.ncols() != 1 {
        return Err(Error::dims(format!("expected a single column, got {}", m.ncols())));
    }
    Ok((0..m.nrows()).map(|i| m.get(i, 0)).collect())
}

fn parse_one<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse `{tok}`"),
    })
}

fn parse_fields<T: std::str::FromStr>(s: &str, line: usize) -> Result<Vec<T>> {
    s.split_whitespace().map(|t| parse_one(t, line)).collect()
}
