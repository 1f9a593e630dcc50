//! Binary checkpoint format for [`NetParams`].
//!
//! ```text
//! "SYMN"            4 bytes magic
//! version           u8 (= 1)
//! n, r, K           u32 little-endian each
//! lambda            f64 little-endian
//! K blocks          n*r f64 little-endian, row-major
//! ```

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::linalg::DenseMatrix;

use super::NetParams;

pub const MAGIC: &[u8; 4] = b"SYMN";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 3 * 4 + 8;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint I/O: {0}")]
    Io(#[from] io::Error),
    #[error("not a checkpoint (bad magic bytes)")]
    BadMagic,
    #[error("unsupported checkpoint version {found} (expected {VERSION})")]
    Version { found: u8 },
    #[error("truncated checkpoint: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("checkpoint shape mismatch: {0}")]
    Shape(String),
}

pub fn encode(params: &NetParams) -> Vec<u8> {
    let (n, r) = params.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + params.depth() * n * r * 8);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    for d in [n, r, params.depth()] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&params.lambda.to_le_bytes());
    for b in &params.blocks {
        for v in b.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> usize {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
}

pub fn decode(bytes: &[u8]) -> Result<NetParams, CheckpointError> {
    let truncated = |needed| CheckpointError::Truncated {
        needed,
        available: bytes.len(),
    };
    if bytes.len() < 5 {
        if bytes.len() >= 4 && &bytes[..4] != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        return Err(truncated(HEADER_LEN));
    }
    if &bytes[..4] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    if bytes[4] != VERSION {
        return Err(CheckpointError::Version { found: bytes[4] });
    }
    if bytes.len() < HEADER_LEN {
        return Err(truncated(HEADER_LEN));
    }
    let (n, r, k) = (u32_at(bytes, 5), u32_at(bytes, 9), u32_at(bytes, 13));
    let lambda = f64_at(bytes, 17);
    if n == 0 || r == 0 || k == 0 {
        return Err(CheckpointError::Shape(format!(
            "degenerate dimensions n={n} r={r} K={k}"
        )));
    }
    let needed = HEADER_LEN + k * n * r * 8;
    if bytes.len() < needed {
        return Err(truncated(needed));
    }
    if bytes.len() > needed {
        return Err(CheckpointError::Shape(format!(
            "{} trailing bytes after {k} blocks of {n}x{r}",
            bytes.len() - needed
        )));
    }
    let mut blocks = Vec::with_capacity(k);
    let mut at = HEADER_LEN;
    for _ in 0..k {
        let data: Vec<f64> = (0..n * r).map(|i| f64_at(bytes, at + 8 * i)).collect();
        at += 8 * n * r;
        blocks.push(
            DenseMatrix::from_vec(n, r, data).map_err(|e| CheckpointError::Shape(e.to_string()))?,
        );
    }
    NetParams::new(blocks, lambda).map_err(|e| CheckpointError::Shape(e.to_string()))
}

pub fn save_checkpoint(params: &NetParams, path: impl AsRef<Path>) -> Result<(), CheckpointError> {
    fs::write(path, encode(params))?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<NetParams, CheckpointError> {
    decode(&fs::read(path)?)
}

/// Loads a checkpoint and checks it fits an `n × r` problem.
pub fn load_checkpoint_for(
    path: impl AsRef<Path>,
    n: usize,
    r: usize,
) -> Result<NetParams, CheckpointError> {
    let params = load_checkpoint(path)?;
    if params.dims() != (n, r) {
        return Err(CheckpointError::Shape(format!(
            "checkpoint blocks are {:?}, problem needs ({n}, {r})",
            params.dims()
        )));
    }
    Ok(params)
}
