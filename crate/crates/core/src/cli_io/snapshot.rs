//! Binary field snapshots.
//!
//! Layout: `SQGD1`, endianness tag `L`, `n` as `u64`, box length, `alpha`,
//! time (all little endian), then `n²` pairs `(re, im)` of `f64` in row-major
//! coefficient order.

use std::io::{Read, Write};

use ndarray::Array2;
use num_complex::Complex64;

use crate::spectral::{GridSpec, SpectralField};
use crate::{Result, SqgError};

pub const MAGIC: &[u8; 5] = b"SQGD1";
const HEADER_LEN: usize = 5 + 1 + 8 * 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotHeader {
    pub n: usize,
    pub box_length: f64,
    pub alpha: f64,
    pub time: f64,
}

pub fn write_snapshot(
    mut out: impl Write,
    field: &SpectralField,
    alpha: f64,
    time: f64,
) -> Result<()> {
    let grid = field.grid();
    let mut buf = Vec::with_capacity(HEADER_LEN + 16 * grid.n() * grid.n());
    buf.extend_from_slice(MAGIC);
    buf.push(b'L');
    buf.extend_from_slice(&(grid.n() as u64).to_le_bytes());
    for v in [grid.box_length(), alpha, time] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for c in field.coeffs().iter() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

pub fn read_snapshot(mut input: impl Read) -> Result<(SnapshotHeader, SpectralField)> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN || &bytes[..5] != MAGIC {
        return Err(SqgError::invalid("not an SQGD1 snapshot"));
    }
    if bytes[5] != b'L' {
        return Err(SqgError::invalid("unsupported endianness tag"));
    }
    let n = u64::from_le_bytes(bytes[6..14].try_into().expect("8 bytes")) as usize;
    let header = SnapshotHeader {
        n,
        box_length: f64_at(&bytes, 14),
        alpha: f64_at(&bytes, 22),
        time: f64_at(&bytes, 30),
    };
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != 16 * n * n {
        return Err(SqgError::invalid(format!(
            "payload holds {} bytes, expected {}",
            payload.len(),
            16 * n * n
        )));
    }
    let grid = GridSpec::new(n, header.box_length)?;
    let coeffs = Array2::from_shape_fn((n, n), |(r, c)| {
        let at = 16 * (r * n + c);
        Complex64::new(f64_at(payload, at), f64_at(payload, at + 8))
    });
    Ok((header, SpectralField::from_coeffs(grid, coeffs)?))
}
