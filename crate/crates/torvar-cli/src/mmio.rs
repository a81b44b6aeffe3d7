//! Matrix Market files on disk, plus in-memory blobs for embedding matrices
//! in JSON reports. Write-then-read is bit-exact: values are printed with 17
//! significant digits.

use anyhow::{Context, Result};
use std::fs::File;
use std::io::{BufReader, BufWriter, Cursor};
use std::path::{Path, PathBuf};
use torvar::{CMatrix, MatrixTuple};

pub fn mm_read(path: &Path) -> Result<CMatrix> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    torvar::mm::read_matrix(BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))
}

pub fn mm_write(path: &Path, a: &CMatrix) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    torvar::mm::write_matrix(BufWriter::new(file), a)
        .with_context(|| format!("writing {}", path.display()))
}

pub fn matrix_to_string(a: &CMatrix) -> String {
    let mut buf = Vec::new();
    torvar::mm::write_matrix(&mut buf, a).expect("in-memory write cannot fail");
    String::from_utf8(buf).expect("matrix market output is ASCII")
}

pub fn matrix_from_str(text: &str) -> Result<CMatrix> {
    torvar::mm::read_matrix(Cursor::new(text.as_bytes())).context("parsing embedded matrix")
}

pub fn tuple_to_strings(t: &MatrixTuple) -> Vec<String> {
    t.iter().map(matrix_to_string).collect()
}

pub fn tuple_from_strings(blobs: &[String]) -> Result<MatrixTuple> {
    let mats = blobs
        .iter()
        .map(|b| matrix_from_str(b))
        .collect::<Result<Vec<_>>>()?;
    MatrixTuple::new(mats).context("assembling tuple from embedded matrices")
}

/// Write one `<stem>_<j>.mm` file per component; returns the paths.
pub fn write_tuple(dir: &Path, stem: &str, t: &MatrixTuple) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::with_capacity(t.m());
    for (j, a) in t.iter().enumerate() {
        let path = dir.join(format!("{stem}_{j}.mm"));
        mm_write(&path, a)?;
        paths.push(path);
    }
    Ok(paths)
}
