//! Vector files: CSV (one vector per line) and the FJLP binary layout.
//!
//! FJLP: magic `b"FJLP"`, `u16` version 1, `u8` dtype 0 (f64), `u8`
//! reserved 0, `u64` count, `u64` dim, then `count·dim` values. All
//! integers and values are little-endian.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"FJLP";
pub const VERSION: u16 = 1;
pub const DTYPE_F64: u8 = 0;
const HEADER_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorFormat {
    Csv,
    Binary,
}

impl VectorFormat {
    /// Binary iff the first bytes are the FJLP magic.
    pub fn detect(bytes: &[u8]) -> Self {
        if bytes.starts_with(MAGIC) {
            VectorFormat::Binary
        } else {
            VectorFormat::Csv
        }
    }
}

fn check_rectangular(vectors: &[Vec<f64>]) -> Result<usize> {
    let dim = vectors.first().map_or(0, Vec::len);
    for v in vectors {
        if v.len() != dim {
            return Err(Error::Format(format!("ragged vectors: lengths {dim} and {}", v.len())));
        }
    }
    Ok(dim)
}

/// Shortest round-trip decimal formatting, so parsing restores every bit.
pub fn write_csv<W: Write>(mut out: W, vectors: &[Vec<f64>]) -> Result<()> {
    check_rectangular(vectors)?;
    let mut line = String::new();
    for v in vectors {
        line.clear();
        for (i, x) in v.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{x:?}"));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Blank lines and lines starting with `#` are skipped.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (n, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("line {}: {e}: {f:?}", n + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(v);
    }
    check_rectangular(&out)?;
    Ok(out)
}

pub fn write_binary<W: Write>(mut out: W, vectors: &[Vec<f64>]) -> Result<()> {
    let dim = check_rectangular(vectors)?;
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * vectors.len() * dim);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(DTYPE_F64);
    buf.push(0);
    buf.extend_from_slice(&(vectors.len() as u64).to_le_bytes());
    buf.extend_from_slice(&(dim as u64).to_le_bytes());
    for x in vectors.iter().flatten() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn parse_binary(bytes: &[u8]) -> Result<Vec<Vec<f64>>> {
    if bytes.len() < HEADER_LEN || !bytes.starts_with(MAGIC) {
        return Err(Error::Format("missing FJLP header".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    if bytes[6] != DTYPE_F64 {
        return Err(Error::Format(format!("unsupported dtype {}", bytes[6])));
    }
    if bytes[7] != 0 {
        return Err(Error::Format("reserved byte must be zero".into()));
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
    let (count, dim) = (word(8), word(16));
    let expected = count
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(HEADER_LEN as u64))
        .ok_or_else(|| Error::Format("header sizes overflow".into()))?;
    if expected != bytes.len() as u64 {
        return Err(Error::Format(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let body = &bytes[HEADER_LEN..];
    if dim == 0 {
        return Ok(vec![Vec::new(); count as usize]);
    }
    Ok(body
        .chunks_exact(8 * dim as usize)
        .map(|row| {
            row.chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect()
        })
        .collect())
}

/// Parses either format, detected from the content.
pub fn parse_vectors(bytes: &[u8]) -> Result<(Vec<Vec<f64>>, VectorFormat)> {
    let format = VectorFormat::detect(bytes);
    let vectors = match format {
        VectorFormat::Binary => parse_binary(bytes)?,
        VectorFormat::Csv => read_csv(bytes)?,
    };
    Ok((vectors, format))
}

pub fn read_vectors(path: &Path) -> Result<(Vec<Vec<f64>>, VectorFormat)> {
    parse_vectors(&fs::read(path)?)
}

pub fn encode_vectors(vectors: &[Vec<f64>], format: VectorFormat) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        VectorFormat::Csv => write_csv(&mut buf, vectors)?,
        VectorFormat::Binary => write_binary(&mut buf, vectors)?,
    }
    Ok(buf)
}

pub fn write_vectors(path: &Path, vectors: &[Vec<f64>], format: VectorFormat) -> Result<()> {
    fs::write(path, encode_vectors(vectors, format)?)?;
    Ok(())
}
