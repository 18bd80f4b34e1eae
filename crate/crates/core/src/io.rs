//! Matrix Market and plain vector files.
//!
//! Matrices are written as `coordinate real general` with 1-based indices and
//! every stored entry (including explicit zeros) so a re-import reproduces the
//! pattern. Vectors use one header line `<length> <comment>` followed by one
//! value per line.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

pub fn write_matrix_market<W: Write>(out: &mut W, a: &SparseMatrix, comment: &str) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    for line in comment.lines() {
        writeln!(out, "% {line}")?;
    }
    writeln!(out, "{} {} {}", a.rank(), a.rank(), a.nnz())?;
    for (r, c, v) in a.entries() {
        writeln!(out, "{} {} {:.17e}", r + 1, c + 1, v)?;
    }
    Ok(())
}

pub fn read_matrix_market<R: Read>(input: R) -> Result<SparseMatrix> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty Matrix Market file".into()))??;
    let lower = header.to_ascii_lowercase();
    let tokens: Vec<&str> = lower.split_whitespace().collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::Parse(format!("bad Matrix Market banner: {header}")));
    }
    if tokens[2] != "coordinate" {
        return Err(Error::Parse("only coordinate format is supported".into()));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(Error::Parse(format!("unsupported field type {}", tokens[3])));
    }
    let symmetric = match tokens[4] {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::Parse(format!("unsupported symmetry {other}"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut trip = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if f.len() != 3 {
                    return Err(Error::Parse(format!("bad size line: {t}")));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("{s}: {e}")));
                size = Some((p(f[0])?, p(f[1])?, p(f[2])?));
                trip.reserve(size.unwrap().2);
            }
            Some((nr, nc, _)) => {
                if f.len() != 3 {
                    return Err(Error::Parse(format!("bad entry line: {t}")));
                }
                let r: usize = f[0].parse().map_err(|e| Error::Parse(format!("{}: {e}", f[0])))?;
                let c: usize = f[1].parse().map_err(|e| Error::Parse(format!("{}: {e}", f[1])))?;
                let v: f64 = f[2].parse().map_err(|e| Error::Parse(format!("{}: {e}", f[2])))?;
                if r == 0 || c == 0 || r > nr || c > nc {
                    return Err(Error::Parse(format!("entry ({r},{c}) out of range")));
                }
                trip.push((r - 1, c - 1, v));
                if symmetric && r != c {
                    trip.push((c - 1, r - 1, v));
                }
            }
        }
    }
    let (nr, nc, nnz) = size.ok_or_else(|| Error::Parse("missing size line".into()))?;
    if nr != nc {
        return Err(Error::Parse(format!("matrix is {nr}x{nc}, expected square")));
    }
    let expected = if symmetric { trip.len() } else { nnz };
    if trip.len() != expected {
        return Err(Error::Parse(format!("expected {nnz} entries, found {}", trip.len())));
    }
    SparseMatrix::from_triplets(nr, &trip)
}

pub fn write_vector<W: Write>(out: &mut W, x: &[f64], comment: &str) -> Result<()> {
    writeln!(out, "{} {}", x.len(), comment.replace('\n', " "))?;
    for v in x {
        writeln!(out, "{v:.17e}")?;
    }
    Ok(())
}

pub fn read_vector<R: Read>(input: R) -> Result<Vec<f64>> {
    let mut text = String::new();
    BufReader::new(input).read_to_string(&mut text)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty vector file".into()))?;
    let len: usize = header
        .split_whitespace()
        .next()
        .ok_or_else(|| Error::Parse("missing vector length".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("vector length: {e}")))?;
    let values = lines
        .flat_map(str::split_whitespace)
        .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != len {
        return Err(Error::Parse(format!(
            "header says {len} values, found {}",
            values.len()
        )));
    }
    Ok(values)
}

pub fn save_matrix(path: &Path, a: &SparseMatrix, comment: &str) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    write_matrix_market(&mut f, a, comment)?;
    f.flush()?;
    Ok(())
}

pub fn load_matrix(path: &Path) -> Result<SparseMatrix> {
    read_matrix_market(fs::File::open(path)?)
}

pub fn save_vector(path: &Path, x: &[f64], comment: &str) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    write_vector(&mut f, x, comment)?;
    f.flush()?;
    Ok(())
}

pub fn load_vector(path: &Path) -> Result<Vec<f64>> {
    read_vector(fs::File::open(path)?)
}
