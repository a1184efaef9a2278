//! Brute-force reference implementations.
//!
//! Everything here is a direct transcription of an operation's definition,
//! with linear or quadratic scans. The efficient structures are tested
//! against these.

use crate::block::Block;
use crate::packed::PsError;
use crate::script::EditOp;

/// A plain array with the seven partial-sums operations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NaivePartialSums {
    pub z: Vec<u64>,
    delta_bits: u32,
}

impl NaivePartialSums {
    pub fn new(values: &[u64], delta_bits: u32) -> Self {
        NaivePartialSums {
            z: values.to_vec(),
            delta_bits,
        }
    }

    fn limit(&self) -> u64 {
        1 << self.delta_bits
    }

    fn check(&self, i: usize) -> Result<usize, PsError> {
        if i == 0 || i > self.z.len() {
            Err(PsError::IndexOutOfRange {
                index: i,
                len: self.z.len(),
            })
        } else {
            Ok(i - 1)
        }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.z.iter().sum()
    }

    pub fn sum(&self, i: usize) -> Result<u64, PsError> {
        let x = self.check(i)?;
        Ok(self.z[..=x].iter().sum())
    }

    pub fn search(&self, t: u64) -> Result<usize, PsError> {
        let total = self.total();
        if t == 0 || t > total {
            return Err(PsError::OutOfBounds { target: t, total });
        }
        let mut acc = 0;
        for (x, &v) in self.z.iter().enumerate() {
            acc += v;
            if acc >= t {
                return Ok(x + 1);
            }
        }
        unreachable!("t is at most the total")
    }

    pub fn update(&mut self, i: usize, delta: i64) -> Result<(), PsError> {
        let x = self.check(i)?;
        if delta.unsigned_abs() >= self.limit() {
            return Err(PsError::DeltaTooLarge {
                delta,
                bits: self.delta_bits,
            });
        }
        let v = self.z[x] as i128 + delta as i128;
        if v < 0 {
            return Err(PsError::NegativeEntry { index: i });
        }
        self.z[x] = v as u64;
        Ok(())
    }

    pub fn divide(&mut self, i: usize, t: u64) -> Result<(), PsError> {
        let x = self.check(i)?;
        let v = self.z[x];
        if t > v {
            return Err(PsError::BadSplit { value: v, at: t });
        }
        self.z[x] = t;
        self.z.insert(x + 1, v - t);
        Ok(())
    }

    pub fn merge(&mut self, i: usize) -> Result<(), PsError> {
        if i == 0 || i >= self.z.len() {
            return Err(PsError::IndexOutOfRange {
                index: i,
                len: self.z.len(),
            });
        }
        let right = self.z.remove(i);
        self.z[i - 1] += right;
        Ok(())
    }

    pub fn insert(&mut self, i: usize, delta: u64) -> Result<(), PsError> {
        if i == 0 || i > self.z.len() + 1 {
            return Err(PsError::IndexOutOfRange {
                index: i,
                len: self.z.len(),
            });
        }
        if delta >= self.limit() {
            return Err(PsError::DeltaTooLarge {
                delta: delta as i64,
                bits: self.delta_bits,
            });
        }
        self.z.insert(i - 1, delta);
        Ok(())
    }

    pub fn delete(&mut self, i: usize) -> Result<(), PsError> {
        let x = self.check(i)?;
        if self.z[x] >= self.limit() {
            return Err(PsError::DeleteTooLarge {
                value: self.z[x],
                bits: self.delta_bits,
            });
        }
        self.z.remove(x);
        Ok(())
    }
}

/// First occurrence of `R[x]·R[y]` in `R` (1-based), or `None`.
pub fn naive_substring_concat(reference: &[u8], x: Block, y: Block) -> Option<usize> {
    let mut pattern = x.slice(reference).to_vec();
    pattern.extend_from_slice(y.slice(reference));
    find(reference, &pattern)
}

/// First 1-based occurrence of `pattern` in `text`.
pub fn find(text: &[u8], pattern: &[u8]) -> Option<usize> {
    if pattern.is_empty() {
        return Some(1);
    }
    text.windows(pattern.len())
        .position(|w| w == pattern)
        .map(|p| p + 1)
}

/// Longest prefix of `text[from..]` occurring in `R`, with a witness start.
/// `from` is 1-based; the witness is 0 when the length is 0.
pub fn naive_longest_match(reference: &[u8], text: &[u8], from: usize) -> (usize, usize) {
    let rest = &text[from - 1..];
    let mut best = (0, 0);
    for start in 0..reference.len() {
        let l = reference[start..]
            .iter()
            .zip(rest)
            .take_while(|(a, b)| a == b)
            .count();
        if l > best.0 {
            best = (l, start + 1);
        }
    }
    best
}

/// Greedy left-to-right cover of `S`; fails with the 1-based position of the
/// first byte absent from `R`.
pub fn naive_greedy_cover(reference: &[u8], source: &[u8]) -> Result<Vec<Block>, usize> {
    let mut cover = Vec::new();
    let mut pos = 1;
    while pos <= source.len() {
        let (len, start) = naive_longest_match(reference, source, pos);
        if len == 0 {
            return Err(pos);
        }
        cover.push(Block::with_len(start, len));
        pos += len;
    }
    Ok(cover)
}

/// Whether no two adjacent blocks concatenate to a substring of `R`.
pub fn naive_maximality_check(reference: &[u8], cover: &[Block]) -> bool {
    cover
        .windows(2)
        .all(|pair| naive_substring_concat(reference, pair[0], pair[1]).is_none())
}

/// Concatenation of the blocks' strings.
pub fn decompress(reference: &[u8], cover: &[Block]) -> Vec<u8> {
    cover.iter().flat_map(|b| b.slice(reference)).copied().collect()
}

/// Outcome of replaying one edit on a plain string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplayOutput {
    Byte(u8),
    Bytes(Vec<u8>),
    Done,
}

/// Applies `ops` to a plain string. Stops at the first op whose position is
/// out of range and reports its index in `ops`.
pub fn naive_edit_replay(
    source: &[u8],
    ops: &[EditOp],
) -> Result<(Vec<u8>, Vec<ReplayOutput>), usize> {
    let mut s = source.to_vec();
    let mut out = Vec::new();
    for (k, op) in ops.iter().enumerate() {
        let n = s.len();
        let result = match *op {
            EditOp::Access(i) if (1..=n).contains(&i) => ReplayOutput::Byte(s[i - 1]),
            EditOp::Extract(i, len) if i >= 1 && len >= 1 && i + len - 1 <= n => {
                ReplayOutput::Bytes(s[i - 1..i - 1 + len].to_vec())
            }
            EditOp::Replace(i, c) if (1..=n).contains(&i) => {
                s[i - 1] = c;
                ReplayOutput::Done
            }
            EditOp::Insert(i, c) if (1..=n + 1).contains(&i) => {
                s.insert(i - 1, c);
                ReplayOutput::Done
            }
            EditOp::Delete(i) if (1..=n).contains(&i) => {
                s.remove(i - 1);
                ReplayOutput::Done
            }
            _ => return Err(k),
        };
        out.push(result);
    }
    Ok((s, out))
}
