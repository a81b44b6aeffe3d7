//! Matrix Market array I/O for dense complex square matrices.
//!
//! Files use the `matrix array complex general` banner, column-major entries,
//! and 17 significant digits so every f64 round-trips bit-identically.

use crate::matcore::CMatrix;
use crate::{Complex64, Error, Result};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

const BANNER: &str = "%%MatrixMarket matrix array complex general";

/// Write `a` in Matrix Market array format.
pub fn write_matrix<W: Write>(mut out: W, a: &CMatrix) -> Result<()> {
    let n = a.n();
    writeln!(out, "{BANNER}")?;
    writeln!(out, "{n} {n}")?;
    for col in 0..n {
        for row in 0..n {
            let v = a.get(row, col);
            writeln!(out, "{:.16e} {:.16e}", v.re, v.im)?;
        }
    }
    Ok(())
}

/// Parse a Matrix Market array file holding one square complex matrix.
pub fn read_matrix<R: BufRead>(input: R) -> Result<CMatrix> {
    let mut lines = input.lines();
    let banner = loop {
        match lines.next() {
            Some(line) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Err(Error::MatrixMarket("empty file".into())),
        }
    };
    let tokens: Vec<String> = banner.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(Error::MatrixMarket(format!("malformed banner: {banner:?}")));
    }
    if tokens[1] != "matrix" || tokens[2] != "array" || tokens[4] != "general" {
        return Err(Error::MatrixMarket(format!(
            "unsupported layout {} {} {} (need matrix array ... general)",
            tokens[1], tokens[2], tokens[4]
        )));
    }
    if tokens[3] != "complex" {
        return Err(Error::MatrixMarket(format!(
            "field type {:?} where complex is required",
            tokens[3]
        )));
    }

    let mut data_lines = lines.filter_map(|l| match l {
        Ok(s) => {
            let t = s.trim().to_string();
            if t.is_empty() || t.starts_with('%') {
                None
            } else {
                Some(Ok(t))
            }
        }
        Err(e) => Some(Err(e)),
    });

    let size_line = data_lines
        .next()
        .ok_or_else(|| Error::MatrixMarket("missing size line".into()))??;
    let dims: Vec<&str> = size_line.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::MatrixMarket(format!(
            "size line must hold two integers: {size_line:?}"
        )));
    }
    let rows: usize = dims[0]
        .parse()
        .map_err(|_| Error::MatrixMarket(format!("bad row count {:?}", dims[0])))?;
    let cols: usize = dims[1]
        .parse()
        .map_err(|_| Error::MatrixMarket(format!("bad column count {:?}", dims[1])))?;
    if rows != cols {
        return Err(Error::MatrixMarket(format!(
            "matrix is {rows}x{cols}; only square matrices are supported"
        )));
    }

    let n = rows;
    let mut entries = Vec::with_capacity(n * n);
    for line in data_lines.by_ref() {
        let line = line?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(Error::MatrixMarket(format!(
                "entry line must hold two reals: {line:?}"
            )));
        }
        let re: f64 = parts[0]
            .parse()
            .map_err(|_| Error::MatrixMarket(format!("bad real part {:?}", parts[0])))?;
        let im: f64 = parts[1]
            .parse()
            .map_err(|_| Error::MatrixMarket(format!("bad imaginary part {:?}", parts[1])))?;
        entries.push(Complex64::new(re, im));
        if entries.len() == n * n {
            break;
        }
    }
    if entries.len() != n * n {
        return Err(Error::MatrixMarket(format!(
            "expected {} entries, found {}",
            n * n,
            entries.len()
        )));
    }
    if data_lines.next().transpose()?.is_some() {
        return Err(Error::MatrixMarket("trailing data after final entry".into()));
    }
    // stored column-major in the file
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for col in 0..n {
        for row in 0..n {
            data[row * n + col] = entries[col * n + row];
        }
    }
    CMatrix::new(n, data)
}

/// Write a matrix to `path`, creating or truncating the file.
pub fn mm_write<P: AsRef<Path>>(path: P, a: &CMatrix) -> Result<()> {
    let file = File::create(path)?;
    write_matrix(BufWriter::new(file), a)
}

/// Read a matrix from `path`.
pub fn mm_read<P: AsRef<Path>>(path: P) -> Result<CMatrix> {
    let file = File::open(path)?;
    read_matrix(BufReader::new(file))
}
