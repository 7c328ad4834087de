//! Binary wavefunction checkpoints.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 8    | `N` (u64)                      |
//! | 8      | 8    | `L` (f64)                      |
//! | 16     | 8    | `alpha` (f64)                  |
//! | 24     | 8    | time (f64)                     |
//! | 32     | 8    | mode flags (u64)               |
//! | 40     | 16·N | `re, im` pairs (f64, f64)      |
//!
//! Flag bit 0 marks an imaginary-time state, bit 1 a state propagated with the mask.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::model::FractionalOrder;
use crate::prop::WaveFunction;

pub const HEADER_LEN: usize = 40;
pub const FLAG_IMAGINARY_TIME: u64 = 1;
pub const FLAG_MASKED: u64 = 1 << 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointHeader {
    pub n: u64,
    pub half_width: f64,
    pub alpha: f64,
    pub time: f64,
    pub flags: u64,
}

pub fn encode(psi: &WaveFunction, alpha: FractionalOrder, time: f64, flags: u64) -> Vec<u8> {
    let grid = psi.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * grid.len());
    out.extend_from_slice(&(grid.len() as u64).to_le_bytes());
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    out.extend_from_slice(&alpha.value().to_le_bytes());
    out.extend_from_slice(&time.to_le_bytes());
    out.extend_from_slice(&flags.to_le_bytes());
    for c in psi.amplitudes() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

fn word(bytes: &[u8], at: usize) -> [u8; 8] {
    bytes[at..at + 8].try_into().expect("8-byte slice")
}

pub fn decode(bytes: &[u8]) -> Result<(CheckpointHeader, WaveFunction)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Checkpoint(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let header = CheckpointHeader {
        n: u64::from_le_bytes(word(bytes, 0)),
        half_width: f64::from_le_bytes(word(bytes, 8)),
        alpha: f64::from_le_bytes(word(bytes, 16)),
        time: f64::from_le_bytes(word(bytes, 24)),
        flags: u64::from_le_bytes(word(bytes, 32)),
    };
    let n = usize::try_from(header.n).map_err(|_| Error::Checkpoint("N does not fit in memory".into()))?;
    let expected = n
        .checked_mul(16)
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Checkpoint("N overflows the payload size".into()))?;
    if bytes.len() != expected {
        return Err(Error::Checkpoint(format!(
            "expected {expected} bytes for N = {n}, found {}",
            bytes.len()
        )));
    }
    let grid = Arc::new(SpatialGrid::with_any_even(header.half_width, n)?);
    let amps = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| Complex64::new(f64::from_le_bytes(word(c, 0)), f64::from_le_bytes(word(c, 8))))
        .collect();
    Ok((header, WaveFunction::new(grid, amps)?))
}

pub fn write(path: &Path, psi: &WaveFunction, alpha: FractionalOrder, time: f64, flags: u64) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode(psi, alpha, time, flags))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<(CheckpointHeader, WaveFunction)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}
