//! Binary cache for precomputed dual frames.
//!
//! Layout, all little-endian:
//!
//! | field            | type      |
//! |------------------|-----------|
//! | magic `FDEC`     | 4 bytes   |
//! | version          | u32       |
//! | dim              | u64       |
//! | element count K  | u64       |
//! | B1, B2           | f64, f64  |
//! | method           | u32 (0 exact, 1 Neumann) |
//! | Neumann N        | u64       |
//! | certified error  | f64       |
//! | SHA-256 of payload | 32 bytes |
//!
//! The payload follows as `(re, im)` f64 pairs, element by element.

use std::path::Path;

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::frame::{DualFrame, DualMethod, Frame};
use crate::hilbert::C64;

pub const MAGIC: &[u8; 4] = b"FDEC";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 8 + 8 + 4 + 8 + 8 + 32;
const BOUND_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CacheHeader {
    pub version: u32,
    pub dim: u64,
    pub len: u64,
    pub bounds: (f64, f64),
    pub method: DualMethod,
    pub certified_error: f64,
    pub checksum: [u8; 32],
}

impl CacheHeader {
    pub fn checksum_hex(&self) -> String {
        self.checksum.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn payload(m: &DMatrix<C64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(m.len() * 16);
    for col in m.column_iter() {
        for v in col.iter() {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    out
}

pub fn encode(dual: &DualFrame) -> Vec<u8> {
    let m = dual.matrix();
    let body = payload(&m);
    let checksum: [u8; 32] = Sha256::digest(&body).into();
    let (method, n) = match dual.method() {
        DualMethod::ExactSolve => (0u32, 0u64),
        DualMethod::Neumann { iterations } => (1, iterations as u64),
    };
    let (b1, b2) = dual.base_bounds();
    let mut out = Vec::with_capacity(HEADER_LEN + body.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    out.extend_from_slice(&b1.to_le_bytes());
    out.extend_from_slice(&b2.to_le_bytes());
    out.extend_from_slice(&method.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&dual.certified_error().to_le_bytes());
    out.extend_from_slice(&checksum);
    out.extend_from_slice(&body);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let s = self.bytes.get(self.pos..end).ok_or_else(|| Error::Cache("truncated header".into()))?;
        self.pos = end;
        Ok(s.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

/// Parses and checksums a cache file image.
pub fn decode(bytes: &[u8]) -> Result<(CacheHeader, DMatrix<C64>)> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Cache(format!("unsupported format version {version}")));
    }
    let dim = r.u64()?;
    let len = r.u64()?;
    let bounds = (r.f64()?, r.f64()?);
    let method = match (r.u32()?, r.u64()?) {
        (0, _) => DualMethod::ExactSolve,
        (1, n) => DualMethod::Neumann { iterations: n as usize },
        (m, _) => return Err(Error::Cache(format!("unknown dual method {m}"))),
    };
    let certified_error = r.f64()?;
    let checksum = r.take::<32>()?;
    let body = &bytes[HEADER_LEN..];
    let expected = (dim as usize)
        .checked_mul(len as usize)
        .and_then(|n| n.checked_mul(16))
        .ok_or_else(|| Error::Cache("header sizes overflow".into()))?;
    if body.len() != expected {
        return Err(Error::Cache(format!("payload has {} bytes, header implies {expected}", body.len())));
    }
    let digest: [u8; 32] = Sha256::digest(body).into();
    if digest != checksum {
        return Err(Error::Cache("checksum mismatch".into()));
    }
    let values: Vec<C64> = body
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    let m = DMatrix::from_vec(dim as usize, len as usize, values);
    let header = CacheHeader { version, dim, len, bounds, method, certified_error, checksum };
    Ok((header, m))
}

pub fn write(path: &Path, dual: &DualFrame) -> Result<CacheHeader> {
    let bytes = encode(dual);
    std::fs::write(path, &bytes)?;
    Ok(decode(&bytes)?.0)
}

/// Reads a cached dual of `frame`; dimensions must agree and the stored
/// bounds must match the frame's certified bounds to `1e-8` relative.
pub fn load(path: &Path, frame: &Frame) -> Result<(CacheHeader, DualFrame)> {
    let bytes = std::fs::read(path)?;
    let (header, m) = decode(&bytes)?;
    if header.dim as usize != frame.space().dim() || header.len as usize != frame.len() {
        return Err(Error::Cache(format!(
            "cached dual is {}x{}, frame is {}x{}",
            header.dim,
            header.len,
            frame.space().dim(),
            frame.len()
        )));
    }
    let (b1, b2) = frame.bounds();
    let scale = b2.abs().max(1.0);
    if (header.bounds.0 - b1).abs() > BOUND_TOLERANCE * scale || (header.bounds.1 - b2).abs() > BOUND_TOLERANCE * scale {
        return Err(Error::Cache(format!(
            "cached bounds ({}, {}) disagree with recomputed ({b1}, {b2})",
            header.bounds.0, header.bounds.1
        )));
    }
    let dual = DualFrame::from_parts(frame.space().clone(), (b1, b2), m, header.method, header.certified_error)?;
    Ok((header, dual))
}

/// Content key of a frame and dual method, used as the cache file stem.
pub fn cache_key(frame: &Frame, method: DualMethod) -> String {
    let mut h = Sha256::new();
    for w in frame.space().weights() {
        h.update(w.to_le_bytes());
    }
    h.update(payload(&frame.matrix()));
    match method {
        DualMethod::ExactSolve => h.update([0u8]),
        DualMethod::Neumann { iterations } => {
            h.update([1u8]);
            h.update((iterations as u64).to_le_bytes());
        }
    }
    h.finalize().iter().take(12).map(|b| format!("{b:02x}")).collect()
}
