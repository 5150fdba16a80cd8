//! Matrix export: row-major CSV with 17 significant digits, and a compact
//! little-endian binary layout.
//!
//! Binary layout: 8-byte magic, `m` and `n` as `u64` LE, then the entries
//! row-major as `f64` LE. Complex matrices store each entry as `(re, im)`.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measurement::ComplexSensingMatrix;

pub const REAL_MAGIC: &[u8; 8] = b"POCSRMAT";
pub const COMPLEX_MAGIC: &[u8; 8] = b"POCSCMAT";

/// Shortest text with 17 significant digits, round-trips every `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_real_csv<W: Write>(mut w: W, a: &DMatrix<f64>) -> Result<()> {
    for row in a.row_iter() {
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Each CSV row holds `re_0, im_0, re_1, im_1, …`.
pub fn write_complex_csv<W: Write>(mut w: W, phi: &ComplexSensingMatrix) -> Result<()> {
    for i in 0..phi.rows() {
        let line: Vec<String> = phi
            .row(i)
            .iter()
            .flat_map(|c| [fmt_f64(c.re), fmt_f64(c.im)])
            .collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

fn parse_csv_rows<R: Read>(r: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::invalid(format!("bad number `{f}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_real_csv<R: Read>(r: R) -> Result<DMatrix<f64>> {
    let rows = parse_csv_rows(r)?;
    let n = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("ragged CSV matrix"));
    }
    Ok(DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]))
}

pub fn read_complex_csv<R: Read>(r: R) -> Result<ComplexSensingMatrix> {
    let rows = parse_csv_rows(r)?;
    let width = rows.first().map_or(0, Vec::len);
    if width % 2 != 0 || rows.iter().any(|r| r.len() != width) {
        return Err(Error::invalid("complex CSV rows must hold an even, equal number of fields"));
    }
    let data = rows
        .iter()
        .flat_map(|r| r.chunks(2).map(|p| Complex64::new(p[0], p[1])))
        .collect();
    ComplexSensingMatrix::from_entries(rows.len(), width / 2, data)
}

fn write_header<W: Write>(w: &mut W, magic: &[u8; 8], m: usize, n: usize) -> Result<()> {
    w.write_all(magic)?;
    w.write_all(&(m as u64).to_le_bytes())?;
    w.write_all(&(n as u64).to_le_bytes())?;
    Ok(())
}

fn read_header<R: Read>(r: &mut R, magic: &[u8; 8]) -> Result<(usize, usize)> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    if &buf != magic {
        return Err(Error::invalid("bad magic in binary matrix"));
    }
    r.read_exact(&mut buf)?;
    let m = u64::from_le_bytes(buf) as usize;
    r.read_exact(&mut buf)?;
    let n = u64::from_le_bytes(buf) as usize;
    Ok((m, n))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn write_real_binary<W: Write>(mut w: W, a: &DMatrix<f64>) -> Result<()> {
    write_header(&mut w, REAL_MAGIC, a.nrows(), a.ncols())?;
    for row in a.row_iter() {
        for v in row.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_real_binary<R: Read>(mut r: R) -> Result<DMatrix<f64>> {
    let (m, n) = read_header(&mut r, REAL_MAGIC)?;
    let vals = (0..m * n).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_row_slice(m, n, &vals))
}

pub fn write_complex_binary<W: Write>(mut w: W, phi: &ComplexSensingMatrix) -> Result<()> {
    write_header(&mut w, COMPLEX_MAGIC, phi.rows(), phi.cols())?;
    for c in phi.entries() {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_complex_binary<R: Read>(mut r: R) -> Result<ComplexSensingMatrix> {
    let (m, n) = read_header(&mut r, COMPLEX_MAGIC)?;
    let data = (0..m * n)
        .map(|_| Ok(Complex64::new(read_f64(&mut r)?, read_f64(&mut r)?)))
        .collect::<Result<Vec<_>>>()?;
    ComplexSensingMatrix::from_entries(m, n, data)
}
