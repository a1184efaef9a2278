//! On-disk cover format.
//!
//! | bytes | field |
//! |---|---|
//! | 4 | magic `DRC1` |
//! | 1 | version, `0x01` |
//! | 8 | reference length, little endian |
//! | 8 | FNV-1a 64 of the reference, little endian |
//! | 8 | block count, little endian |
//! | … | per block: `start - 1` and length as LEB128 |

use std::hash::Hasher;
use std::io::{Cursor, Read};

use fnv::FnvHasher;
use thiserror::Error;

use crate::block::Block;

pub const MAGIC: &[u8; 4] = b"DRC1";
pub const VERSION: u8 = 0x01;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverFileError {
    #[error("malformed cover file: {0}")]
    Malformed(String),
    #[error("reference does not match the cover file (length {file_len} vs {ref_len}, checksum {file_sum:#018x} vs {ref_sum:#018x})")]
    ChecksumMismatch {
        file_len: u64,
        ref_len: u64,
        file_sum: u64,
        ref_sum: u64,
    },
}

pub fn checksum(reference: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(reference);
    h.finish()
}

pub fn encode(reference: &[u8], blocks: &[Block]) -> Vec<u8> {
    let mut out = Vec::with_capacity(29 + 4 * blocks.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(reference.len() as u64).to_le_bytes());
    out.extend_from_slice(&checksum(reference).to_le_bytes());
    out.extend_from_slice(&(blocks.len() as u64).to_le_bytes());
    for b in blocks {
        leb128::write::unsigned(&mut out, (b.start - 1) as u64).expect("vec write");
        leb128::write::unsigned(&mut out, b.len() as u64).expect("vec write");
    }
    out
}

fn malformed(what: impl Into<String>) -> CoverFileError {
    CoverFileError::Malformed(what.into())
}

fn read_u64(cur: &mut Cursor<&[u8]>, what: &str) -> Result<u64, CoverFileError> {
    let mut buf = [0u8; 8];
    cur.read_exact(&mut buf)
        .map_err(|_| malformed(format!("truncated {what}")))?;
    Ok(u64::from_le_bytes(buf))
}

/// Decodes a cover file written against `reference`.
pub fn decode(reference: &[u8], data: &[u8]) -> Result<Vec<Block>, CoverFileError> {
    let mut cur = Cursor::new(data);
    let mut head = [0u8; 5];
    cur.read_exact(&mut head).map_err(|_| malformed("truncated header"))?;
    if &head[..4] != MAGIC {
        return Err(malformed("bad magic"));
    }
    if head[4] != VERSION {
        return Err(malformed(format!("unsupported version {}", head[4])));
    }
    let file_len = read_u64(&mut cur, "reference length")?;
    let file_sum = read_u64(&mut cur, "checksum")?;
    let count = read_u64(&mut cur, "block count")?;
    let (ref_len, ref_sum) = (reference.len() as u64, checksum(reference));
    if file_len != ref_len || file_sum != ref_sum {
        return Err(CoverFileError::ChecksumMismatch {
            file_len,
            ref_len,
            file_sum,
            ref_sum,
        });
    }
    // Every block takes at least two bytes.
    let remaining = (data.len() as u64).saturating_sub(cur.position());
    if count > remaining / 2 {
        return Err(malformed(format!("{count} blocks cannot fit in {remaining} bytes")));
    }
    let mut blocks = Vec::with_capacity(count as usize);
    for k in 0..count {
        let mut field = |what: &str| {
            leb128::read::unsigned(&mut cur).map_err(|_| malformed(format!("bad {what} of block {}", k + 1)))
        };
        let start = field("start")?;
        let len = field("length")?;
        if len == 0 || start.checked_add(len).map_or(true, |e| e > ref_len) {
            return Err(malformed(format!(
                "block {} ({start}+{len}) outside the reference",
                k + 1
            )));
        }
        blocks.push(Block::with_len(start as usize + 1, len as usize));
    }
    if cur.position() != data.len() as u64 {
        return Err(malformed("trailing bytes"));
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(checksum(b""), 0xcbf29ce484222325);
        assert_eq!(checksum(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn round_trip_and_rejections() {
        let r = vec![7u8; 300];
        let blocks = vec![Block::new(1, 300), Block::new(200, 200), Block::new(129, 256)];
        let data = encode(&r, &blocks);
        assert_eq!(decode(&r, &data), Ok(blocks));
        assert!(matches!(decode(&r[1..], &data), Err(CoverFileError::ChecksumMismatch { .. })));
        let mut other = r.clone();
        other[5] = 8;
        assert!(matches!(decode(&other, &data), Err(CoverFileError::ChecksumMismatch { .. })));
        for cut in 0..data.len() {
            assert!(matches!(decode(&r, &data[..cut]), Err(CoverFileError::Malformed(_))), "{cut}");
        }
        let mut extra = data.clone();
        extra.push(0);
        assert!(matches!(decode(&r, &extra), Err(CoverFileError::Malformed(_))));
        let bad = encode(&r, &[Block { start: 250, end: 301 }]);
        assert!(matches!(decode(&r, &bad), Err(CoverFileError::Malformed(_))));
        assert_eq!(decode(&r, &encode(&r, &[])), Ok(vec![]));
    }
}
