//! The `TWC1` binary graph format.
//!
//! Little-endian throughout:
//!
//! | bytes | field                                         |
//! |-------|-----------------------------------------------|
//! | 4     | magic `TWC1`                                  |
//! | 1     | version, currently 1                          |
//! | 1     | policy code (0 independent, 1 duplicube, 2 identity) |
//! | 1     | dimension `n`                                 |
//! | 8     | master seed                                   |
//!
//! followed, for each level `k = 2..=n` and each stored copy in ascending
//! order, by the `2^(k-1)` forward-table entries as `u32`. Inverse tables are
//! rebuilt on load and the identity policy stores no tables.

use std::fs;
use std::path::Path;

use crate::cube::{check_dimension, MatchingLevel, TwistedCube};
use crate::error::{Error, FormatError, Result};
use crate::policy::CouplingPolicy;

pub const MAGIC: [u8; 4] = *b"TWC1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 15;

/// Decoded file header.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub n: u32,
    pub policy: CouplingPolicy,
    pub seed: u64,
}

pub fn serialized_len(n: u32, policy: CouplingPolicy) -> u64 {
    let tables: u64 = (2..=n)
        .map(|k| policy.stored_copies(n, k) * (1u64 << (k - 1)))
        .sum();
    HEADER_LEN as u64 + 4 * tables
}

pub fn serialize(g: &TwistedCube) -> Vec<u8> {
    let mut out = Vec::with_capacity(serialized_len(g.n(), g.policy()) as usize);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(g.policy().code());
    out.push(g.n() as u8);
    out.extend_from_slice(&g.seed().to_le_bytes());
    for lvl in g.levels() {
        for &entry in lvl.forward_all() {
            out.extend_from_slice(&entry.to_le_bytes());
        }
    }
    out
}

pub fn read_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::Truncated {
            expected: HEADER_LEN as u64,
            actual: bytes.len() as u64,
        }
        .into());
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic).into());
    }
    if bytes[4] != VERSION {
        return Err(FormatError::UnsupportedVersion(bytes[4]).into());
    }
    let policy = CouplingPolicy::from_code(bytes[5]).ok_or(FormatError::UnknownPolicy(bytes[5]))?;
    let n = u32::from(bytes[6]);
    check_dimension(n)?;
    let seed = u64::from_le_bytes(bytes[7..15].try_into().unwrap());
    Ok(Header { n, policy, seed })
}

/// Parses and validates a stream; every forward table must be a bijection.
pub fn deserialize(bytes: &[u8]) -> Result<TwistedCube> {
    let header = read_header(bytes)?;
    let expected = serialized_len(header.n, header.policy);
    let actual = bytes.len() as u64;
    if actual < expected {
        return Err(FormatError::Truncated { expected, actual }.into());
    }
    if actual > expected {
        return Err(FormatError::TrailingBytes(actual - expected).into());
    }
    let mut body = &bytes[HEADER_LEN..];
    let mut levels = Vec::new();
    if header.policy != CouplingPolicy::IdentityMatching {
        for k in 2..=header.n {
            let entries = (header.policy.stored_copies(header.n, k) << (k - 1)) as usize;
            let (chunk, rest) = body.split_at(entries * 4);
            body = rest;
            let forward = chunk
                .chunks_exact(4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
                .collect();
            levels.push(MatchingLevel::from_forward(k, forward)?);
        }
    }
    Ok(TwistedCube::from_parts(header.n, header.policy, header.seed, levels))
}

pub fn write_file(g: &TwistedCube, path: &Path) -> Result<u64> {
    let bytes = serialize(g);
    fs::write(path, &bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(bytes.len() as u64)
}

pub fn read_file(path: &Path) -> Result<TwistedCube> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    deserialize(&bytes)
}
