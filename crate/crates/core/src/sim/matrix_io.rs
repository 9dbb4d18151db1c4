//! Matrix Market coordinate files for sparse inputs, headerless CSV for
//! small dense ones, and plain-text vectors.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Coordinate-format matrix with 0-based `(row, col, value)` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut entries = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != 0.0 {
                    entries.push((r, c, m[(r, c)]));
                }
            }
        }
        SparseMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

/// Reads `%%MatrixMarket matrix coordinate {real|integer|pattern}
/// {general|symmetric}`.
pub fn read_matrix_market<R: Read>(reader: R) -> Result<SparseMatrix> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?.to_ascii_lowercase();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(1, "missing %%MatrixMarket matrix header"));
    }
    if fields[2] != "coordinate" {
        return Err(parse_err(1, "only coordinate format is supported"));
    }
    let pattern = match fields[3] {
        "real" | "integer" | "double" => false,
        "pattern" => true,
        f => return Err(parse_err(1, format!("unsupported field type {f}"))),
    };
    let symmetric = match fields[4] {
        "general" => false,
        "symmetric" => true,
        s => return Err(parse_err(1, format!("unsupported symmetry {s}"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    for (no, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        let num = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .ok_or_else(|| parse_err(no + 1, "too few fields"))?
                .parse()
                .map_err(|e| parse_err(no + 1, e))
        };
        let Some((rows, cols, _)) = size else {
            size = Some((num(0)?, num(1)?, num(2)?));
            continue;
        };
        let (r, c) = (num(0)?, num(1)?);
        if r == 0 || c == 0 || r > rows || c > cols {
            return Err(parse_err(no + 1, format!("entry ({r}, {c}) out of range")));
        }
        let v = if pattern {
            1.0
        } else {
            parts
                .get(2)
                .ok_or_else(|| parse_err(no + 1, "missing value"))?
                .parse::<f64>()
                .map_err(|e| parse_err(no + 1, e))?
        };
        entries.push((r - 1, c - 1, v));
        if symmetric && r != c {
            entries.push((c - 1, r - 1, v));
        }
    }
    let (rows, cols, nnz) = size.ok_or_else(|| parse_err(0, "missing size line"))?;
    let stored = if symmetric {
        entries.iter().filter(|(r, c, _)| r >= c).count()
    } else {
        entries.len()
    };
    if stored != nnz {
        return Err(Error::Parse(format!(
            "size line promises {nnz} entries, found {stored}"
        )));
    }
    Ok(SparseMatrix {
        rows,
        cols,
        entries,
    })
}

pub fn write_matrix_market<W: Write>(m: &SparseMatrix, mut w: W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.rows, m.cols, m.entries.len())?;
    for &(r, c, v) in &m.entries {
        writeln!(w, "{} {} {v:e}", r + 1, c + 1)?;
    }
    Ok(())
}

/// Headerless comma-separated rows.
pub fn read_dense_csv<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec?;
        if cols.is_some_and(|c| c != rec.len()) {
            return Err(Error::Parse(format!(
                "row {} has {} columns",
                rows + 1,
                rec.len()
            )));
        }
        cols = Some(rec.len());
        for f in rec.iter() {
            data.push(
                f.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", rows + 1)))?,
            );
        }
        rows += 1;
    }
    Ok(DMatrix::from_row_slice(rows, cols.unwrap_or(0), &data))
}

/// Whitespace- or comma-separated numbers.
pub fn read_vector<R: Read>(mut reader: R) -> Result<DVector<f64>> {
    let mut s = String::new();
    reader.read_to_string(&mut s)?;
    let vals = s
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| Error::Parse(format!("{t:?}: {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DVector::from_vec(vals))
}

/// One value per line, in shortest round-trip form.
pub fn write_vector<W: Write>(v: &DVector<f64>, mut w: W) -> Result<()> {
    for x in v.iter() {
        writeln!(w, "{x:?}")?;
    }
    Ok(())
}

/// Loads `.mtx` as Matrix Market, anything else as dense CSV.
pub fn load_matrix(path: &Path) -> Result<SparseMatrix> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("mtx"))
    {
        read_matrix_market(f)
    } else {
        Ok(SparseMatrix::from_dense(&read_dense_csv(f)?))
    }
}
