//! Covers of many strings over one reference, with split and concatenate.
//!
//! Each string is a leaf-oriented AVL tree over its blocks in which every
//! internal node stores the total length below it. Edits cut out the few
//! blocks around the position, rebuild them, and join the pieces back.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::block::Block;
use crate::cover::{greedy_cover, CoverError};
use crate::ref_index::RefIndex;

/// Opaque identifier of a string in a [`CoverForest`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Handle(u64);

impl fmt::Display for Handle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForestError {
    #[error("unknown string {0}")]
    UnknownHandle(Handle),
    #[error("cannot concatenate {0} with itself")]
    SameHandle(Handle),
    #[error("position {index} outside 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("byte {byte:#04x} at position {position} does not occur in the reference")]
    CharNotInReference { position: usize, byte: u8 },
}

impl From<CoverError> for ForestError {
    fn from(e: CoverError) -> Self {
        match e {
            CoverError::IndexOutOfRange { index, len } => ForestError::IndexOutOfRange { index, len },
            CoverError::CharNotInReference { position, byte } => {
                ForestError::CharNotInReference { position, byte }
            }
            CoverError::InvalidBlock { .. } => unreachable!("forest blocks come from the index"),
        }
    }
}

#[derive(Debug, Clone)]
enum Tree {
    Leaf(Block),
    Node(Box<Inner>),
}

#[derive(Debug, Clone)]
struct Inner {
    left: Tree,
    right: Tree,
    len: usize,
    leaves: usize,
    height: u32,
}

impl Tree {
    fn len(&self) -> usize {
        match self {
            Tree::Leaf(b) => b.len(),
            Tree::Node(n) => n.len,
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Node(n) => n.leaves,
        }
    }

    fn height(&self) -> u32 {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node(n) => n.height,
        }
    }

    fn node(left: Tree, right: Tree) -> Tree {
        Tree::Node(Box::new(Inner {
            len: left.len() + right.len(),
            leaves: left.leaves() + right.leaves(),
            height: 1 + left.height().max(right.height()),
            left,
            right,
        }))
    }

    fn into_children(self) -> (Tree, Tree) {
        match self {
            Tree::Node(n) => (n.left, n.right),
            Tree::Leaf(_) => unreachable!("taller subtree is internal"),
        }
    }

    /// Joins two subtrees whose heights differ by at most two.
    fn balanced(left: Tree, right: Tree) -> Tree {
        let (hl, hr) = (left.height(), right.height());
        if hl > hr + 1 {
            let (ll, lr) = left.into_children();
            if ll.height() >= lr.height() {
                Tree::node(ll, Tree::node(lr, right))
            } else {
                let (lrl, lrr) = lr.into_children();
                Tree::node(Tree::node(ll, lrl), Tree::node(lrr, right))
            }
        } else if hr > hl + 1 {
            let (rl, rr) = right.into_children();
            if rr.height() >= rl.height() {
                Tree::node(Tree::node(left, rl), rr)
            } else {
                let (rll, rlr) = rl.into_children();
                Tree::node(Tree::node(left, rll), Tree::node(rlr, rr))
            }
        } else {
            Tree::node(left, right)
        }
    }

    /// AVL join: all leaves of `a` before all leaves of `b`.
    fn join(a: Tree, b: Tree) -> Tree {
        let (ha, hb) = (a.height(), b.height());
        if ha > hb + 1 {
            let (l, r) = a.into_children();
            Tree::balanced(l, Tree::join(r, b))
        } else if hb > ha + 1 {
            let (l, r) = b.into_children();
            Tree::balanced(Tree::join(a, l), r)
        } else {
            Tree::node(a, b)
        }
    }

    /// Splits after the first `k` leaves.
    fn split(self, k: usize) -> (Option<Tree>, Option<Tree>) {
        if k == 0 {
            return (None, Some(self));
        }
        if k >= self.leaves() {
            return (Some(self), None);
        }
        let (l, r) = self.into_children();
        let nl = l.leaves();
        if k < nl {
            let (a, b) = l.split(k);
            (a, join(b, Some(r)))
        } else if k == nl {
            (Some(l), Some(r))
        } else {
            let (a, b) = r.split(k - nl);
            (join(Some(l), a), b)
        }
    }

    /// Leaf holding position `i`: its 0-based leaf index, block and 1-based
    /// offset inside the block.
    fn locate(&self, mut i: usize) -> (usize, Block, usize) {
        let mut t = self;
        let mut index = 0;
        loop {
            match t {
                Tree::Leaf(b) => return (index, *b, i),
                Tree::Node(n) => {
                    if i <= n.left.len() {
                        t = &n.left;
                    } else {
                        i -= n.left.len();
                        index += n.left.leaves();
                        t = &n.right;
                    }
                }
            }
        }
    }

    fn collect(&self, out: &mut Vec<Block>) {
        match self {
            Tree::Leaf(b) => out.push(*b),
            Tree::Node(n) => {
                n.left.collect(out);
                n.right.collect(out);
            }
        }
    }

    fn first(&self) -> Block {
        match self {
            Tree::Leaf(b) => *b,
            Tree::Node(n) => n.left.first(),
        }
    }

    fn last(&self) -> Block {
        match self {
            Tree::Leaf(b) => *b,
            Tree::Node(n) => n.right.last(),
        }
    }

    fn check(&self) -> Result<(), String> {
        if let Tree::Node(n) = self {
            n.left.check()?;
            n.right.check()?;
            let (hl, hr) = (n.left.height(), n.right.height());
            if hl.abs_diff(hr) > 1 {
                return Err(format!("unbalanced node: heights {hl} and {hr}"));
            }
            if n.height != 1 + hl.max(hr)
                || n.len != n.left.len() + n.right.len()
                || n.leaves != n.left.leaves() + n.right.leaves()
            {
                return Err("stale node summary".into());
            }
        }
        Ok(())
    }
}

fn join(a: Option<Tree>, b: Option<Tree>) -> Option<Tree> {
    match (a, b) {
        (Some(a), Some(b)) => Some(Tree::join(a, b)),
        (a, None) => a,
        (None, b) => b,
    }
}

fn build(blocks: &[Block]) -> Option<Tree> {
    match blocks.len() {
        0 => None,
        1 => Some(Tree::Leaf(blocks[0])),
        n => {
            let (l, r) = blocks.split_at(n / 2);
            Some(Tree::node(build(l)?, build(r)?))
        }
    }
}

/// Merges adjacent blocks until no pair concatenates to a reference substring.
fn restore(index: &RefIndex, blocks: &mut Vec<Block>) {
    loop {
        let mut merged = false;
        let mut k = 0;
        while k + 1 < blocks.len() {
            let (a, b) = (blocks[k], blocks[k + 1]);
            match index.substring_concat(a, b).expect("blocks fit") {
                Some(p) => {
                    blocks[k] = Block::with_len(p, a.len() + b.len());
                    blocks.remove(k + 1);
                    merged = true;
                }
                None => k += 1,
            }
        }
        if !merged {
            return;
        }
    }
}

/// A set of strings, each a maximal cover relative to one reference.
#[derive(Debug, Clone)]
pub struct CoverForest<'a> {
    index: &'a RefIndex,
    trees: HashMap<Handle, Option<Tree>>,
    next: u64,
}

impl<'a> CoverForest<'a> {
    pub fn new(index: &'a RefIndex) -> Self {
        CoverForest {
            index,
            trees: HashMap::new(),
            next: 0,
        }
    }

    fn register(&mut self, tree: Option<Tree>) -> Handle {
        let h = Handle(self.next);
        self.next += 1;
        self.trees.insert(h, tree);
        h
    }

    fn tree(&self, h: Handle) -> Result<&Option<Tree>, ForestError> {
        self.trees.get(&h).ok_or(ForestError::UnknownHandle(h))
    }

    fn take(&mut self, h: Handle) -> Result<Option<Tree>, ForestError> {
        self.trees.remove(&h).ok_or(ForestError::UnknownHandle(h))
    }

    /// Adds `source`, compressed greedily.
    pub fn add(&mut self, source: &[u8]) -> Result<Handle, ForestError> {
        let blocks = greedy_cover(self.index, source)?;
        Ok(self.register(build(&blocks)))
    }

    /// Drops a string and returns its contents.
    pub fn remove(&mut self, h: Handle) -> Result<Vec<u8>, ForestError> {
        let bytes = self.decompress(h)?;
        self.trees.remove(&h);
        Ok(bytes)
    }

    pub fn handles(&self) -> Vec<Handle> {
        let mut hs: Vec<Handle> = self.trees.keys().copied().collect();
        hs.sort();
        hs
    }

    pub fn len(&self, h: Handle) -> Result<usize, ForestError> {
        Ok(self.tree(h)?.as_ref().map_or(0, Tree::len))
    }

    pub fn blocks(&self, h: Handle) -> Result<Vec<Block>, ForestError> {
        let mut out = Vec::new();
        if let Some(t) = self.tree(h)? {
            t.collect(&mut out);
        }
        Ok(out)
    }

    /// AVL height of the string's tree; a single leaf has height 0.
    pub fn height(&self, h: Handle) -> Result<u32, ForestError> {
        Ok(self.tree(h)?.as_ref().map_or(0, Tree::height))
    }

    pub fn decompress(&self, h: Handle) -> Result<Vec<u8>, ForestError> {
        let reference = self.index.reference();
        Ok(self
            .blocks(h)?
            .iter()
            .flat_map(|b| b.slice(reference))
            .copied()
            .collect())
    }

    pub fn access(&self, h: Handle, j: usize) -> Result<u8, ForestError> {
        let n = self.len(h)?;
        if j == 0 || j > n {
            return Err(ForestError::IndexOutOfRange { index: j, len: n });
        }
        let tree = self.tree(h)?.as_ref().expect("non-empty string");
        let (_, block, off) = tree.locate(j);
        Ok(self.index.reference()[block.start + off - 2])
    }

    fn single(&self, position: usize, byte: u8) -> Result<Block, ForestError> {
        self.index
            .occurrence(byte)
            .map(|p| Block::new(p, p))
            .ok_or(ForestError::CharNotInReference { position, byte })
    }

    /// Cuts out the block holding position `j` with its neighbours, lets
    /// `edit` replace that block by new pieces, restores maximality over the
    /// window and joins everything back.
    fn edit_at<F>(&mut self, h: Handle, j: usize, edit: F) -> Result<(), ForestError>
    where
        F: FnOnce(Block, usize) -> Vec<Block>,
    {
        let tree = self.take(h)?.expect("caller checked the position");
        let n = tree.leaves();
        let (l, block, off) = tree.locate(j);
        let lo = l.saturating_sub(1);
        let hi = (l + 1).min(n - 1);
        let (before, rest) = tree.split(lo);
        let (window, after) = rest.expect("window is non-empty").split(hi - lo + 1);
        let mut blocks = Vec::with_capacity(5);
        window.expect("window is non-empty").collect(&mut blocks);
        blocks.splice(l - lo..l - lo + 1, edit(block, off));
        restore(self.index, &mut blocks);
        self.trees.insert(h, join(join(before, build(&blocks)), after));
        Ok(())
    }

    pub fn replace(&mut self, h: Handle, j: usize, byte: u8) -> Result<(), ForestError> {
        let n = self.len(h)?;
        if j == 0 || j > n {
            return Err(ForestError::IndexOutOfRange { index: j, len: n });
        }
        let single = self.single(j, byte)?;
        self.edit_at(h, j, |b, off| {
            let mut pieces = Vec::with_capacity(3);
            if off > 1 {
                pieces.push(Block::new(b.start, b.start + off - 2));
            }
            pieces.push(single);
            if off < b.len() {
                pieces.push(Block::new(b.start + off, b.end));
            }
            pieces
        })
    }

    /// Inserts `byte` before position `j`; `j = N + 1` appends.
    pub fn insert(&mut self, h: Handle, j: usize, byte: u8) -> Result<(), ForestError> {
        let n = self.len(h)?;
        if j == 0 || j > n + 1 {
            return Err(ForestError::IndexOutOfRange { index: j, len: n + 1 });
        }
        let single = self.single(j, byte)?;
        if n == 0 {
            self.trees.insert(h, Some(Tree::Leaf(single)));
            return Ok(());
        }
        if j == n + 1 {
            return self.edit_at(h, n, |b, _| vec![b, single]);
        }
        self.edit_at(h, j, |b, off| {
            if off == 1 {
                vec![single, b]
            } else {
                vec![
                    Block::new(b.start, b.start + off - 2),
                    single,
                    Block::new(b.start + off - 1, b.end),
                ]
            }
        })
    }

    pub fn delete(&mut self, h: Handle, j: usize) -> Result<(), ForestError> {
        let n = self.len(h)?;
        if j == 0 || j > n {
            return Err(ForestError::IndexOutOfRange { index: j, len: n });
        }
        self.edit_at(h, j, |b, off| {
            let mut pieces = Vec::with_capacity(2);
            if off > 1 {
                pieces.push(Block::new(b.start, b.start + off - 2));
            }
            if off < b.len() {
                pieces.push(Block::new(b.start + off, b.end));
            }
            pieces
        })
    }

    /// Replaces `a` and `b` by the single string `S_a · S_b`.
    pub fn concat(&mut self, a: Handle, b: Handle) -> Result<Handle, ForestError> {
        if a == b {
            return Err(ForestError::SameHandle(a));
        }
        self.tree(a)?;
        self.tree(b)?;
        let ta = self.take(a)?;
        let tb = self.take(b)?;
        let joined = match (ta, tb) {
            (Some(ta), Some(tb)) => {
                let (head, x) = {
                    let k = ta.leaves() - 1;
                    ta.split(k)
                };
                let (y, tail) = tb.split(1);
                let mut pair = vec![
                    x.expect("last block").first(),
                    y.expect("first block").first(),
                ];
                restore(self.index, &mut pair);
                join(join(head, build(&pair)), tail)
            }
            (ta, tb) => join(ta, tb),
        };
        Ok(self.register(joined))
    }

    /// Replaces `h` by `S[1..j-1]` and `S[j..]`, in that order.
    pub fn split(&mut self, h: Handle, j: usize) -> Result<(Handle, Handle), ForestError> {
        let n = self.len(h)?;
        if j == 0 || j > n {
            return Err(ForestError::IndexOutOfRange { index: j, len: n });
        }
        let tree = self.take(h)?.expect("non-empty string");
        if j == 1 {
            let left = self.register(None);
            let right = self.register(Some(tree));
            return Ok((left, right));
        }
        let (l, block, off) = tree.locate(j - 1);
        let (left, right) = if off == block.len() {
            tree.split(l + 1)
        } else {
            let (before, rest) = tree.split(l);
            let (_, after) = rest.expect("block present").split(1);
            let head = Block::new(block.start, block.start + off - 1);
            let tail = Block::new(block.start + off, block.end);
            (
                self.seal_right(before, head),
                self.seal_left(tail, after),
            )
        };
        Ok((self.register(left), self.register(right)))
    }

    /// `tree · [block]`, with the new boundary pair checked.
    fn seal_right(&self, tree: Option<Tree>, block: Block) -> Option<Tree> {
        let Some(tree) = tree else {
            return Some(Tree::Leaf(block));
        };
        let k = tree.leaves() - 1;
        let (head, last) = tree.split(k);
        let mut pair = vec![last.expect("last block").first(), block];
        restore(self.index, &mut pair);
        join(head, build(&pair))
    }

    /// `[block] · tree`, with the new boundary pair checked.
    fn seal_left(&self, block: Block, tree: Option<Tree>) -> Option<Tree> {
        let Some(tree) = tree else {
            return Some(Tree::Leaf(block));
        };
        let (first, tail) = tree.split(1);
        let mut pair = vec![block, first.expect("first block").first()];
        restore(self.index, &mut pair);
        join(build(&pair), tail)
    }

    /// Balance, stored sums, the AVL height bound and maximality of one string.
    pub fn validate(&self, h: Handle) -> Result<(), String> {
        let Some(tree) = self.tree(h).map_err(|e| e.to_string())? else {
            return Ok(());
        };
        tree.check()?;
        let leaves = tree.leaves() as f64;
        let bound = 1.4405 * (leaves + 1.0).log2();
        if f64::from(tree.height()) > bound {
            return Err(format!("height {} exceeds {bound:.2}", tree.height()));
        }
        let blocks = self.blocks(h).map_err(|e| e.to_string())?;
        if tree.first() != blocks[0] || tree.last() != blocks[blocks.len() - 1] {
            return Err("end blocks disagree with the in-order walk".into());
        }
        for pair in blocks.windows(2) {
            if self.index.substring_concat(pair[0], pair[1]).expect("fits").is_some() {
                return Err(format!("blocks {} and {} can merge", pair[0], pair[1]));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concat_merges_boundary() {
        let idx = RefIndex::new(b"banana").unwrap();
        let mut f = CoverForest::new(&idx);
        let a = f.add(b"ban").unwrap();
        let b = f.add(b"ana").unwrap();
        let c = f.concat(a, b).unwrap();
        assert_eq!(f.decompress(c).unwrap(), b"banana");
        assert_eq!(f.blocks(c).unwrap().len(), 1);
        assert_eq!(f.decompress(a), Err(ForestError::UnknownHandle(a)));
        assert_eq!(f.concat(c, c), Err(ForestError::SameHandle(c)));
        let e = f.add(b"").unwrap();
        let d = f.concat(e, c).unwrap();
        assert_eq!(f.decompress(d).unwrap(), b"banana");
    }

    #[test]
    fn split_banana() {
        let idx = RefIndex::new(b"banana").unwrap();
        let mut f = CoverForest::new(&idx);
        let h = f.add(b"banana").unwrap();
        let (l, r) = f.split(h, 4).unwrap();
        assert_eq!(f.decompress(l).unwrap(), b"ban");
        assert_eq!(f.decompress(r).unwrap(), b"ana");
        let back = f.concat(l, r).unwrap();
        assert_eq!(f.decompress(back).unwrap(), b"banana");
        let (empty, whole) = f.split(back, 1).unwrap();
        assert_eq!(f.len(empty), Ok(0));
        assert_eq!(f.decompress(whole).unwrap(), b"banana");
        assert_eq!(f.access(whole, 3), Ok(b'n'));
    }

    #[test]
    fn edits_keep_balance_and_maximality() {
        let idx = RefIndex::new(b"abracadabra").unwrap();
        let mut f = CoverForest::new(&idx);
        let h = f.add(b"").unwrap();
        let mut oracle = Vec::new();
        for k in 0..300usize {
            let b = b"abrcd"[k % 5];
            let n = oracle.len();
            match k % 3 {
                0 | 1 => {
                    let j = 1 + (k * 7) % (n + 1);
                    f.insert(h, j, b).unwrap();
                    oracle.insert(j - 1, b);
                }
                _ => {
                    let j = 1 + (k * 13) % n;
                    f.replace(h, j, b).unwrap();
                    oracle[j - 1] = b;
                }
            }
            f.validate(h).unwrap();
            assert_eq!(f.decompress(h).unwrap(), oracle);
        }
        while !oracle.is_empty() {
            let j = 1 + oracle.len() / 3;
            f.delete(h, j).unwrap();
            oracle.remove(j - 1);
            f.validate(h).unwrap();
            assert_eq!(f.decompress(h).unwrap(), oracle);
        }
        assert!(f.insert(h, 2, b'a').is_err());
        assert!(f.insert(h, 1, b'z').is_err());
    }
}
