//! File formats.
//!
//! * coefficients: CSV `n,re,im` with `n = 1..=N`, one line per coefficient;
//! * field dumps: CSV `t_index,x_index,re,im`, or the binary form of the
//!   same records (little-endian `u64, u64, f64, f64`) after an 8-byte magic;
//! * weights: CSV `x_cell,t_cell,mass`.
//!
//! A header line is written and tolerated (skipped) on read.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::expsum::{CoefficientVector, TorusField};

pub const FIELD_MAGIC: &[u8; 8] = b"WEYLFLD1";

#[derive(Debug, Serialize, Deserialize)]
struct CoeffRecord {
    n: usize,
    re: f64,
    im: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldRecord {
    t_index: usize,
    x_index: usize,
    re: f64,
    im: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WeightRecord {
    pub x_cell: u32,
    pub t_cell: u32,
    pub mass: f64,
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r)
}

pub fn write_coefficients<W: Write>(coeffs: &CoefficientVector, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (n, a) in coeffs.iter() {
        out.serialize(CoeffRecord { n, re: a.re, im: a.im })?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a coefficient file. Indices must be exactly `1..=N`, in any order.
pub fn read_coefficients<R: Read>(r: R) -> Result<CoefficientVector> {
    let mut rows: Vec<CoeffRecord> = Vec::new();
    for rec in reader(r).deserialize() {
        rows.push(rec?);
    }
    if rows.is_empty() {
        return invalid("coefficient file has no rows");
    }
    let n_max = rows.len();
    let mut values = vec![None; n_max];
    for (line, rec) in rows.iter().enumerate() {
        if rec.n == 0 || rec.n > n_max || values[rec.n - 1].is_some() {
            return Err(Error::Parse {
                line: line + 2,
                msg: format!("index {} is not a fresh value in 1..={n_max}", rec.n),
            });
        }
        values[rec.n - 1] = Some(Complex64::new(rec.re, rec.im));
    }
    CoefficientVector::new(values.into_iter().map(Option::unwrap).collect())
}

/// Streams the whole field as CSV records in row order.
pub fn write_field_csv<W: Write>(field: &TorusField, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut err = None;
    field.for_each_row(|k, row| {
        if err.is_some() {
            return;
        }
        for (j, v) in row.iter().enumerate() {
            let rec = FieldRecord {
                t_index: k,
                x_index: j,
                re: v.re,
                im: v.im,
            };
            if let Err(e) = out.serialize(rec) {
                err = Some(e);
                return;
            }
        }
    });
    if let Some(e) = err {
        return Err(e.into());
    }
    out.flush()?;
    Ok(())
}

pub fn write_field_binary<W: Write>(field: &TorusField, mut w: W) -> Result<()> {
    w.write_all(FIELD_MAGIC)?;
    let mut err = None;
    field.for_each_row(|k, row| {
        if err.is_some() {
            return;
        }
        let mut buf = Vec::with_capacity(row.len() * 32);
        for (j, v) in row.iter().enumerate() {
            buf.extend_from_slice(&(k as u64).to_le_bytes());
            buf.extend_from_slice(&(j as u64).to_le_bytes());
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        if let Err(e) = w.write_all(&buf) {
            err = Some(e);
        }
    });
    if let Some(e) = err {
        return Err(e.into());
    }
    w.flush()?;
    Ok(())
}

/// Reads back a binary field dump as `(t_index, x_index, value)` records.
pub fn read_field_binary<R: Read>(mut r: R) -> Result<Vec<(usize, usize, Complex64)>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != FIELD_MAGIC {
        return invalid("not a field dump");
    }
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 32 != 0 {
        return invalid("truncated field dump");
    }
    let word = |c: &[u8], i: usize| -> [u8; 8] { c[8 * i..8 * i + 8].try_into().unwrap() };
    Ok(bytes
        .chunks_exact(32)
        .map(|c| {
            (
                u64::from_le_bytes(word(c, 0)) as usize,
                u64::from_le_bytes(word(c, 1)) as usize,
                Complex64::new(f64::from_le_bytes(word(c, 2)), f64::from_le_bytes(word(c, 3))),
            )
        })
        .collect())
}

pub fn read_weight_records<R: Read>(r: R) -> Result<Vec<WeightRecord>> {
    let mut out = Vec::new();
    for rec in reader(r).deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

pub fn write_weight_records<W: Write>(
    records: impl IntoIterator<Item = WeightRecord>,
    w: W,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for rec in records {
        out.serialize(rec)?;
    }
    out.flush()?;
    Ok(())
}
