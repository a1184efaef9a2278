//! A string kept as a maximal cover of reference substrings.
//!
//! Blocks sit in a doubly linked list; a [`SumTree`] over the block lengths,
//! whose leaves point at the list cells, maps string positions to blocks.
//! An edit splits the block it touches and then merges the few blocks around
//! the edit back together wherever their concatenation still occurs in the
//! reference.

use thiserror::Error;

use crate::block::Block;
use crate::packed::{PsConfig, PsError};
use crate::ref_index::RefIndex;
use crate::sum_tree::SumTree;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("position {index} outside 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("byte {byte:#04x} at position {position} does not occur in the reference")]
    CharNotInReference { position: usize, byte: u8 },
    #[error("block {block} does not fit a reference of length {len}")]
    InvalidBlock { block: Block, len: usize },
}

type CellId = u32;
const NIL: CellId = CellId::MAX;

#[derive(Debug, Clone, Copy)]
struct Cell {
    block: Block,
    prev: CellId,
    next: CellId,
}

/// Work done by one mutation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpStats {
    pub concat_calls: usize,
    pub tree_ops: usize,
}

#[derive(Debug, Clone)]
pub struct CompressedString<'a> {
    index: &'a RefIndex,
    cells: Vec<Cell>,
    free: Vec<CellId>,
    head: CellId,
    lengths: SumTree<CellId>,
    stats: OpStats,
}

fn config() -> PsConfig {
    PsConfig::default()
}

fn tree(r: Result<(), PsError>) {
    r.expect("sum tree op on a checked position");
}

/// Cover built by repeatedly taking the longest prefix of the rest of
/// `source` that occurs in the reference. The result is maximal.
pub fn greedy_cover(index: &RefIndex, source: &[u8]) -> Result<Vec<Block>, CoverError> {
    let mut blocks = Vec::new();
    let mut pos = 1;
    while pos <= source.len() {
        let (len, start) = index.longest_match(source, pos);
        if len == 0 {
            return Err(CoverError::CharNotInReference {
                position: pos,
                byte: source[pos - 1],
            });
        }
        blocks.push(Block::with_len(start, len));
        pos += len;
    }
    Ok(blocks)
}

impl<'a> CompressedString<'a> {
    /// Greedy left-to-right cover of `source`.
    pub fn compress(index: &'a RefIndex, source: &[u8]) -> Result<Self, CoverError> {
        Ok(Self::build(index, &greedy_cover(index, source)?))
    }

    /// Takes `blocks` as they are; maximality is not enforced.
    pub fn from_blocks(index: &'a RefIndex, blocks: &[Block]) -> Result<Self, CoverError> {
        if let Some(&block) = blocks.iter().find(|b| !b.fits(index.len())) {
            return Err(CoverError::InvalidBlock {
                block,
                len: index.len(),
            });
        }
        Ok(Self::build(index, blocks))
    }

    fn build(index: &'a RefIndex, blocks: &[Block]) -> Self {
        let n = blocks.len() as CellId;
        let cells = blocks
            .iter()
            .enumerate()
            .map(|(k, &block)| {
                let k = k as CellId;
                Cell {
                    block,
                    prev: if k == 0 { NIL } else { k - 1 },
                    next: if k + 1 == n { NIL } else { k + 1 },
                }
            })
            .collect();
        let lengths = SumTree::from_entries(
            config(),
            blocks.iter().enumerate().map(|(k, b)| (b.len() as u64, k as CellId)),
        )
        .expect("default config is valid");
        CompressedString {
            index,
            cells,
            free: Vec::new(),
            head: if n == 0 { NIL } else { 0 },
            lengths,
            stats: OpStats::default(),
        }
    }

    pub fn index(&self) -> &'a RefIndex {
        self.index
    }

    /// Length `N` of the string.
    pub fn len(&self) -> usize {
        self.lengths.total() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_blocks(&self) -> usize {
        self.lengths.len()
    }

    pub fn blocks(&self) -> Vec<Block> {
        let mut out = Vec::with_capacity(self.num_blocks());
        let mut c = self.head;
        while c != NIL {
            out.push(self.cells[c as usize].block);
            c = self.cells[c as usize].next;
        }
        out
    }

    /// Counters for the most recent mutation.
    pub fn last_op_stats(&self) -> OpStats {
        self.stats
    }

    fn check(&self, i: usize, len: usize) -> Result<(), CoverError> {
        if i == 0 || i > len {
            Err(CoverError::IndexOutOfRange { index: i, len })
        } else {
            Ok(())
        }
    }

    /// Block holding position `i`: returns its index, cell and the local
    /// offset of `i` inside it (1-based).
    fn find(&self, i: usize) -> (usize, CellId, usize) {
        let found = self.lengths.locate(i as u64).expect("position checked");
        (found.index, *found.payload, i - found.before as usize)
    }

    pub fn access(&self, i: usize) -> Result<u8, CoverError> {
        self.check(i, self.len())?;
        let (_, cell, off) = self.find(i);
        let block = self.cells[cell as usize].block;
        Ok(self.index.reference()[block.start + off - 2])
    }

    /// `S[i..i + len]`, with `len >= 1`.
    pub fn extract(&self, i: usize, len: usize) -> Result<Vec<u8>, CoverError> {
        let n = self.len();
        self.check(i, n)?;
        if len == 0 || i + len - 1 > n {
            return Err(CoverError::IndexOutOfRange {
                index: i + len.saturating_sub(1),
                len: n,
            });
        }
        let reference = self.index.reference();
        let (_, mut cell, off) = self.find(i);
        let mut out = Vec::with_capacity(len);
        let mut from = off - 1;
        while out.len() < len {
            let bytes = self.cells[cell as usize].block.slice(reference);
            let take = (bytes.len() - from).min(len - out.len());
            out.extend_from_slice(&bytes[from..from + take]);
            from = 0;
            cell = self.cells[cell as usize].next;
        }
        Ok(out)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let reference = self.index.reference();
        let mut out = Vec::with_capacity(self.len());
        let mut c = self.head;
        while c != NIL {
            out.extend_from_slice(self.cells[c as usize].block.slice(reference));
            c = self.cells[c as usize].next;
        }
        out
    }

    fn occurrence(&self, position: usize, byte: u8) -> Result<Block, CoverError> {
        self.index
            .occurrence(byte)
            .map(|p| Block::new(p, p))
            .ok_or(CoverError::CharNotInReference { position, byte })
    }

    /// `S[i] = byte`.
    pub fn replace(&mut self, i: usize, byte: u8) -> Result<(), CoverError> {
        self.check(i, self.len())?;
        let single = self.occurrence(i, byte)?;
        self.stats = OpStats::default();
        let (l, cell, off) = self.find(i);
        let Block { start, end } = self.cells[cell as usize].block;
        let len = end + 1 - start;
        let mut mid = cell;
        if off > 1 {
            self.cells[cell as usize].block = Block::new(start, start + off - 2);
            mid = self.split_after(l, off as u64 - 1, cell, single);
        } else {
            self.cells[cell as usize].block = single;
        }
        let mut last = l + usize::from(off > 1);
        if off < len {
            let rest = Block::new(start + off, end);
            self.split_after(last, 1, mid, rest);
            last += 1;
        }
        self.restore(l, last);
        Ok(())
    }

    /// Inserts `byte` before position `i`; `i = N + 1` appends.
    pub fn insert(&mut self, i: usize, byte: u8) -> Result<(), CoverError> {
        let n = self.len();
        self.check(i, n + 1)?;
        let single = self.occurrence(i, byte)?;
        self.stats = OpStats::default();
        if i == n + 1 {
            let tail = self.tail();
            let l = self.num_blocks() + 1;
            let cell = self.alloc(single, tail, NIL);
            let done = self.lengths.insert_with(l, 1, cell);
            self.count_tree(done);
            self.restore(l, l);
            return Ok(());
        }
        let (l, cell, off) = self.find(i);
        if off == 1 {
            let prev = self.cells[cell as usize].prev;
            let new = self.alloc(single, prev, cell);
            let done = self.lengths.insert_with(l, 1, new);
            self.count_tree(done);
            self.restore(l, l);
        } else {
            let Block { start, end } = self.cells[cell as usize].block;
            self.cells[cell as usize].block = Block::new(start, start + off - 2);
            let rest = self.split_after(l, off as u64 - 1, cell, Block::new(start + off - 1, end));
            let prev = self.cells[rest as usize].prev;
            let new = self.alloc(single, prev, rest);
            let done = self.lengths.insert_with(l + 1, 1, new);
            self.count_tree(done);
            self.restore(l, l + 2);
        }
        Ok(())
    }

    /// Removes `S[i]`.
    pub fn delete(&mut self, i: usize) -> Result<(), CoverError> {
        self.check(i, self.len())?;
        self.stats = OpStats::default();
        let (l, cell, off) = self.find(i);
        let Block { start, end } = self.cells[cell as usize].block;
        let len = end + 1 - start;
        if len == 1 {
            let removed = self.lengths.delete(l);
            self.stats.tree_ops += 1;
            removed.expect("unit block is deletable");
            self.unlink(cell);
            if self.num_blocks() > 0 {
                let lo = l.saturating_sub(1).max(1);
                self.restore_window(lo, l.min(self.num_blocks()));
            }
            return Ok(());
        }
        if off == 1 || off == len {
            self.cells[cell as usize].block = if off == 1 {
                Block::new(start + 1, end)
            } else {
                Block::new(start, end - 1)
            };
            let done = self.lengths.update(l, -1);
            self.count_tree(done);
            self.restore(l, l);
        } else {
            self.cells[cell as usize].block = Block::new(start, start + off - 2);
            self.split_after(l, off as u64 - 1, cell, Block::new(start + off, end));
            let done = self.lengths.update(l + 1, -1);
            self.count_tree(done);
            self.restore(l, l + 1);
        }
        Ok(())
    }

    /// Divides entry `l` after `t` characters; the new right entry gets a
    /// fresh cell holding `block`, linked after `cell`.
    fn split_after(&mut self, l: usize, t: u64, cell: CellId, block: Block) -> CellId {
        let next = self.cells[cell as usize].next;
        let new = self.alloc(block, cell, next);
        let done = self.lengths.divide_with(l, t, new);
        self.count_tree(done);
        new
    }

    fn count_tree(&mut self, r: Result<(), PsError>) {
        self.stats.tree_ops += 1;
        tree(r);
    }

    fn tail(&self) -> CellId {
        if self.num_blocks() == 0 {
            NIL
        } else {
            *self.lengths.payload(self.num_blocks()).expect("non-empty")
        }
    }

    fn alloc(&mut self, block: Block, prev: CellId, next: CellId) -> CellId {
        let cell = Cell { block, prev, next };
        let id = match self.free.pop() {
            Some(id) => {
                self.cells[id as usize] = cell;
                id
            }
            None => {
                self.cells.push(cell);
                (self.cells.len() - 1) as CellId
            }
        };
        if prev == NIL {
            self.head = id;
        } else {
            self.cells[prev as usize].next = id;
        }
        if next != NIL {
            self.cells[next as usize].prev = id;
        }
        id
    }

    fn unlink(&mut self, id: CellId) {
        let Cell { prev, next, .. } = self.cells[id as usize];
        if prev == NIL {
            self.head = next;
        } else {
            self.cells[prev as usize].next = next;
        }
        if next != NIL {
            self.cells[next as usize].prev = prev;
        }
        self.free.push(id);
    }

    /// Restores maximality after blocks `lo..=hi` changed, looking one block
    /// further on either side.
    fn restore(&mut self, lo: usize, hi: usize) {
        let lo = lo.saturating_sub(1).max(1);
        let hi = (hi + 1).min(self.num_blocks());
        self.restore_window(lo, hi);
    }

    /// Merges adjacent blocks of entries `lo..=hi` until no pair concatenates
    /// to a substring of the reference.
    ///
    /// A merge only lengthens the left block of the pair at its right end, so
    /// the pair to its left, already rejected, stays rejected: if `a·b` is not
    /// a substring then neither is `a·b·c`. The first pass therefore reaches
    /// the fixpoint and the next one only confirms it.
    fn restore_window(&mut self, lo: usize, mut hi: usize) {
        loop {
            let mut merged = false;
            let mut k = lo;
            let mut cell = *self.lengths.payload(lo).expect("window inside the cover");
            while k < hi {
                let next = self.cells[cell as usize].next;
                let (a, b) = (self.cells[cell as usize].block, self.cells[next as usize].block);
                self.stats.concat_calls += 1;
                let hit = self.index.substring_concat(a, b).expect("stored blocks fit");
                match hit {
                    Some(p) => {
                        self.cells[cell as usize].block = Block::with_len(p, a.len() + b.len());
                        self.stats.tree_ops += 1;
                        self.lengths.merge(k).expect("adjacent entries");
                        self.unlink(next);
                        hi -= 1;
                        merged = true;
                    }
                    None => {
                        k += 1;
                        cell = next;
                    }
                }
            }
            if !merged {
                return;
            }
        }
    }

    /// Checks list/tree agreement, block bounds and maximality through the
    /// index.
    pub fn validate(&self) -> Result<(), String> {
        self.lengths.validate()?;
        let blocks = self.blocks();
        if blocks.len() != self.lengths.len() {
            return Err("list and tree disagree on the block count".into());
        }
        let mut c = self.head;
        let mut prev = NIL;
        for (k, (value, &payload)) in self.lengths.iter().enumerate() {
            if payload != c {
                return Err(format!("leaf {} points at the wrong cell", k + 1));
            }
            let cell = self.cells[c as usize];
            if cell.prev != prev {
                return Err(format!("broken back link at block {}", k + 1));
            }
            if !cell.block.fits(self.index.len()) || cell.block.len() as u64 != value {
                return Err(format!("block {} is {} with stored length {value}", k + 1, cell.block));
            }
            prev = c;
            c = cell.next;
        }
        for (k, pair) in blocks.windows(2).enumerate() {
            if self.index.substring_concat(pair[0], pair[1]).expect("fits").is_some() {
                return Err(format!("blocks {} and {} can merge", k + 1, k + 2));
            }
        }
        Ok(())
    }
}
