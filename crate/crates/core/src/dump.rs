//! Binary field dumps.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 16    | magic `SNSFIELD` padded with zero bytes |
//! | 4     | format version (`u32`, currently 1) |
//! | 4     | `N` (`u32`) |
//! | 8     | `L` (`f64`) |
//! | 4     | component count (`u32`: 1, 3 or 9) |
//! | ...   | `(re, im)` `f64` pairs |
//!
//! Coefficients are stored component by component. Within a component the
//! order is row-major with the first wavenumber slowest, and each axis runs
//! in FFT index order (`0, 1, …, N/2-1, -N/2, …, -1`).

use num_complex::Complex64;
use thiserror::Error;

use crate::lattice::FourierLattice;
use crate::spectral::SpectralField;

pub const MAGIC: [u8; 16] = *b"SNSFIELD\0\0\0\0\0\0\0\0";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 16 + 4 + 4 + 8 + 4;
/// Largest `N` accepted by the decoder.
pub const MAX_N: u32 = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DumpError {
    #[error("input shorter than the {HEADER_LEN}-byte header")]
    Truncated,
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u32),
    #[error("invalid grid size {0}")]
    InvalidN(u32),
    #[error("invalid box length {0}")]
    InvalidBoxLength(f64),
    #[error("invalid component count {0}")]
    InvalidComponents(u32),
    #[error("payload has {found} bytes, expected {expected}")]
    PayloadLength { expected: usize, found: usize },
    #[error("non-finite coefficient at position {0}")]
    NonFinite(usize),
}

pub fn encode(field: &SpectralField) -> Vec<u8> {
    let lat = field.lattice();
    let nc = field.n_components();
    let mut out = Vec::with_capacity(HEADER_LEN + nc * lat.len() * 16);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(lat.n() as u32).to_le_bytes());
    out.extend_from_slice(&lat.box_length().to_le_bytes());
    out.extend_from_slice(&(nc as u32).to_le_bytes());
    for comp in field.components() {
        for z in comp {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<SpectralField, DumpError> {
    if bytes.len() < HEADER_LEN {
        return Err(DumpError::Truncated);
    }
    if bytes[..16] != MAGIC {
        return Err(DumpError::BadMagic);
    }
    let version = u32_at(bytes, 16);
    if version != VERSION {
        return Err(DumpError::UnsupportedVersion(version));
    }
    let n = u32_at(bytes, 20);
    if n < 2 || n % 2 != 0 || n > MAX_N {
        return Err(DumpError::InvalidN(n));
    }
    let l = f64_at(bytes, 24);
    if !(l.is_finite() && l > 0.0) {
        return Err(DumpError::InvalidBoxLength(l));
    }
    let nc = u32_at(bytes, 32);
    if !matches!(nc, 1 | 3 | 9) {
        return Err(DumpError::InvalidComponents(nc));
    }
    let lat = FourierLattice::new(n as usize, l).map_err(|_| DumpError::InvalidN(n))?;
    let per = lat.len();
    let expected = nc as usize * per * 16;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(DumpError::PayloadLength {
            expected,
            found: payload.len(),
        });
    }
    let mut comps = Vec::with_capacity(nc as usize);
    for c in 0..nc as usize {
        let mut v = Vec::with_capacity(per);
        for i in 0..per {
            let at = (c * per + i) * 16;
            let re = f64_at(payload, at);
            let im = f64_at(payload, at + 8);
            if !(re.is_finite() && im.is_finite()) {
                return Err(DumpError::NonFinite(c * per + i));
            }
            v.push(Complex64::new(re, im));
        }
        comps.push(v);
    }
    Ok(SpectralField::from_components(lat, comps).expect("lengths checked"))
}
