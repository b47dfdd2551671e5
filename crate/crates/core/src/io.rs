//! Reading and writing matrices and vectors.
//!
//! Two formats are supported: plain CSV (one row per sample) and a binary
//! format consisting of the 8-byte magic `SDMATRIX`, the row and column
//! counts as little-endian `u64`, and the entries as little-endian `f64`
//! in column-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ShapeBuilder};
use serde::ser::{SerializeSeq, Serializer};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SDMATRIX";

/// Serializes a vector as a plain JSON array.
pub fn ser_array<S: Serializer>(a: &Array1<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(a.len()))?;
    for v in a.iter() {
        seq.serialize_element(v)?;
    }
    seq.end()
}

/// Serializes an optional vector as a JSON array or null.
pub fn ser_opt_array<S: Serializer>(a: &Option<Array1<f64>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match a {
        Some(a) => ser_array(a, s),
        None => s.serialize_none(),
    }
}

fn is_binary(path: &Path) -> Result<bool> {
    let mut f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut head = [0u8; 8];
    let got = f.read(&mut head)?;
    Ok(got == 8 && &head == MAGIC)
}

/// Reads a matrix from CSV or the binary format (detected by its magic).
pub fn read_matrix(path: &Path, header: bool) -> Result<Array2<f64>> {
    if is_binary(path)? {
        read_matrix_binary(path)
    } else {
        read_matrix_csv(path, header)
    }
}

/// Reads a CSV matrix with one row per sample.
pub fn read_matrix_csv(path: &Path, header: bool) -> Result<Array2<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut data = Vec::new();
    let mut ncols = None;
    let mut nrows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        match ncols {
            None => ncols = Some(rec.len()),
            Some(c) if c != rec.len() => {
                return Err(Error::DimMismatch(format!(
                    "{}: row {} has {} fields, expected {c}",
                    path.display(),
                    i + 1,
                    rec.len()
                )))
            }
            _ => {}
        }
        for field in rec.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Io(format!("{}: cannot parse '{field}' as a number", path.display())))?;
            data.push(v);
        }
        nrows += 1;
    }
    let ncols = ncols.ok_or_else(|| Error::Io(format!("{}: no data", path.display())))?;
    Array2::from_shape_vec((nrows, ncols), data).map_err(|e| Error::Io(e.to_string()))
}

/// Reads the binary column-major format.
pub fn read_matrix_binary(path: &Path) -> Result<Array2<f64>> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut r = BufReader::new(f);
    let mut head = [0u8; 8];
    r.read_exact(&mut head)?;
    if &head != MAGIC {
        return Err(Error::Io(format!("{}: bad magic", path.display())));
    }
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    let nrows = u64::from_le_bytes(buf) as usize;
    r.read_exact(&mut buf)?;
    let ncols = u64::from_le_bytes(buf) as usize;
    let len = nrows
        .checked_mul(ncols)
        .ok_or_else(|| Error::Io(format!("{}: dimensions overflow", path.display())))?;
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        r.read_exact(&mut buf)
            .map_err(|_| Error::Io(format!("{}: truncated data", path.display())))?;
        data.push(f64::from_le_bytes(buf));
    }
    Array2::from_shape_vec((nrows, ncols).f(), data)
        .map(|a| a.as_standard_layout().into_owned())
        .map_err(|e| Error::Io(e.to_string()))
}

/// Writes the binary column-major format.
pub fn write_matrix_binary(path: &Path, x: ArrayView2<f64>) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(f);
    w.write_all(MAGIC)?;
    w.write_all(&(x.nrows() as u64).to_le_bytes())?;
    w.write_all(&(x.ncols() as u64).to_le_bytes())?;
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            w.write_all(&x[[i, j]].to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes a CSV matrix with one row per line.
pub fn write_matrix_csv(path: &Path, x: ArrayView2<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    for row in x.rows() {
        w.write_record(row.iter().map(|v| format!("{v:e}")))
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a vector stored as a single CSV column or row, or as an `n×1` /
/// `1×n` binary matrix.
pub fn read_vector(path: &Path, header: bool) -> Result<Array1<f64>> {
    let m = read_matrix(path, header)?;
    let (r, c) = m.dim();
    if r == 1 || c == 1 {
        Ok(Array1::from_iter(m.iter().copied()))
    } else {
        Err(Error::DimMismatch(format!("{}: expected a vector, found a {r}x{c} matrix", path.display())))
    }
}

/// Writes a vector as a single CSV column.
pub fn write_vector_csv(path: &Path, v: ArrayView1<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?);
    for x in v.iter() {
        writeln!(w, "{x:e}")?;
    }
    w.flush()?;
    Ok(())
}
