//! Binary field snapshots.
//!
//! Layout: magic "RIPL", version u16 (LE), n1 u32, n2 u32, then n1*n2
//! little-endian f64 physical samples, row-major with x1 fastest.

use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::field::SpectralField;
use super::grid::TorusGrid;
use crate::error::{Result, RippleError};

const MAGIC: &[u8; 4] = b"RIPL";
const VERSION: u16 = 1;

pub fn encode(field: &SpectralField) -> Vec<u8> {
    let grid = field.grid();
    let samples = field.to_physical();
    let mut out = Vec::with_capacity(14 + 8 * samples.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.n1() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.n2() as u32).to_le_bytes());
    for v in samples {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<SpectralField> {
    if bytes.len() < 14 {
        return Err(RippleError::Snapshot("truncated header".into()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(RippleError::Snapshot("bad magic, expected RIPL".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(RippleError::Snapshot(format!(
            "unsupported version {version}"
        )));
    }
    let n1 = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let n2 = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
    let grid = TorusGrid::new(n1, n2)?;
    let expect = 14 + 8 * grid.len();
    if bytes.len() != expect {
        return Err(RippleError::Snapshot(format!(
            "payload has {} bytes, expected {expect}",
            bytes.len()
        )));
    }
    let samples: Vec<f64> = bytes[14..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    SpectralField::from_physical(grid, &samples)
}

pub fn write_snapshot(field: &SpectralField, path: &Path) -> Result<String> {
    let bytes = encode(field);
    let hash = content_hash(&bytes);
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(hash)
}

pub fn read_snapshot(path: &Path) -> Result<SpectralField> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

/// Hex SHA-256 of the snapshot bytes; used to reference fields from reports.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
