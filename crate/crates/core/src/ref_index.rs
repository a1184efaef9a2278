//! Static index over the reference string.
//!
//! Holds the suffix array, its inverse and the LCP array with range-minimum
//! support, plus the suffix tree given by the LCP intervals. The tree is cut
//! into heavy paths; every path top `u` stores the sorted ranks of the
//! suffixes that follow its string, which turns a concatenation query into a
//! range-emptiness test.
//!
//! Public positions are 1-based.

use std::collections::HashMap;

use thiserror::Error;

use crate::block::Block;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("reference is empty")]
    EmptyReference,
    #[error("reference of {0} bytes is too long")]
    TooLong(usize),
    #[error("position {index} outside 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("block {block} does not fit a reference of length {len}")]
    InvalidBlock { block: Block, len: usize },
}

const NONE: u32 = u32::MAX;

/// Suffix array by prefix doubling with counting sorts.
fn suffix_array(text: &[u8]) -> Vec<u32> {
    let n = text.len();
    let mut sa: Vec<u32> = (0..n as u32).collect();
    sa.sort_by_key(|&i| text[i as usize]);
    let mut rank = vec![0u32; n];
    for k in 1..n {
        let (a, b) = (sa[k - 1] as usize, sa[k] as usize);
        rank[b] = rank[a] + u32::from(text[a] != text[b]);
    }
    let mut tmp = vec![0u32; n];
    let mut count = vec![0usize; n + 1];
    let mut step = 1;
    while n > 0 && (rank[sa[n - 1] as usize] as usize) < n - 1 {
        // Order by the second key: suffixes without one come first.
        let mut order = Vec::with_capacity(n);
        order.extend((n.saturating_sub(step)..n).map(|i| i as u32));
        order.extend(sa.iter().filter(|&&i| i as usize >= step).map(|&i| i - step as u32));
        // Stable counting sort by the first key.
        count.iter_mut().for_each(|c| *c = 0);
        for &i in &order {
            count[rank[i as usize] as usize + 1] += 1;
        }
        for k in 1..=n {
            count[k] += count[k - 1];
        }
        for &i in &order {
            let slot = &mut count[rank[i as usize] as usize];
            sa[*slot] = i;
            *slot += 1;
        }
        let key = |i: usize| (rank[i], rank.get(i + step).map_or(-1, |&r| r as i64));
        tmp[sa[0] as usize] = 0;
        for k in 1..n {
            let (a, b) = (sa[k - 1] as usize, sa[k] as usize);
            tmp[b] = tmp[a] + u32::from(key(a) != key(b));
        }
        std::mem::swap(&mut rank, &mut tmp);
        step *= 2;
    }
    sa
}

/// Kasai's algorithm: `lcp[k]` is the common prefix of the suffixes ranked
/// `k - 1` and `k`; `lcp[0] = 0`.
fn lcp_array(text: &[u8], sa: &[u32], isa: &[u32]) -> Vec<u32> {
    let n = text.len();
    let mut lcp = vec![0u32; n];
    let mut h = 0usize;
    for i in 0..n {
        let r = isa[i] as usize;
        if r == 0 {
            h = 0;
            continue;
        }
        let j = sa[r - 1] as usize;
        while i + h < n && j + h < n && text[i + h] == text[j + h] {
            h += 1;
        }
        lcp[r] = h as u32;
        h = h.saturating_sub(1);
    }
    lcp
}

const RMQ_BLOCK: usize = 32;

/// Range minimum over a fixed array: a sparse table over block minima, with
/// scans inside the partial blocks at either end.
#[derive(Debug, Clone)]
struct Rmq {
    table: Vec<Vec<u32>>,
}

impl Rmq {
    fn new(values: &[u32]) -> Self {
        let base: Vec<u32> = values
            .chunks(RMQ_BLOCK)
            .map(|c| *c.iter().min().expect("non-empty chunk"))
            .collect();
        let mut table = vec![base];
        let mut width = 1;
        while 2 * width <= table[0].len() {
            let prev = table.last().expect("level");
            let next = (0..prev.len() - width)
                .map(|i| prev[i].min(prev[i + width]))
                .collect();
            table.push(next);
            width *= 2;
        }
        Rmq { table }
    }

    /// Minimum of `values[a..=b]`.
    fn min(&self, values: &[u32], a: usize, b: usize) -> u32 {
        let (ba, bb) = (a / RMQ_BLOCK, b / RMQ_BLOCK);
        if bb <= ba + 1 {
            return *values[a..=b].iter().min().expect("non-empty range");
        }
        let head = *values[a..(ba + 1) * RMQ_BLOCK].iter().min().expect("head");
        let tail = *values[bb * RMQ_BLOCK..=b].iter().min().expect("tail");
        let (lo, hi) = (ba + 1, bb - 1);
        let level = (usize::BITS - 1 - (hi - lo + 1).leading_zeros()) as usize;
        let row = &self.table[level];
        head.min(tail).min(row[lo]).min(row[hi + 1 - (1 << level)])
    }
}

/// An internal suffix-tree node, i.e. an LCP interval.
#[derive(Debug, Clone)]
struct Inner {
    lb: u32,
    rb: u32,
    depth: u32,
    /// Rank of the leaf that ends this node's heavy path.
    heavy_leaf: u32,
    children: (u32, u32),
    /// Range in `du`; empty unless the node tops a heavy path.
    du: (u32, u32),
}

/// Node ids below `n` are leaves, identified by suffix rank; ids from `n` on
/// are internal nodes.
type NodeId = u32;

#[derive(Debug, Clone)]
pub struct RefIndex {
    text: Vec<u8>,
    sa: Vec<u32>,
    isa: Vec<u32>,
    lcp: Vec<u32>,
    rmq: Rmq,
    inner: Vec<Inner>,
    children: Vec<NodeId>,
    du: Vec<u32>,
    intervals: HashMap<u64, NodeId>,
    root: NodeId,
    first_occurrence: [u32; 256],
}

fn interval_key(lb: u32, rb: u32) -> u64 {
    (u64::from(lb) << 32) | u64::from(rb)
}

impl RefIndex {
    pub fn new(reference: &[u8]) -> Result<Self, IndexError> {
        let n = reference.len();
        if n == 0 {
            return Err(IndexError::EmptyReference);
        }
        if n >= (NONE / 2) as usize {
            return Err(IndexError::TooLong(n));
        }
        let text = reference.to_vec();
        let sa = suffix_array(&text);
        let mut isa = vec![0u32; n];
        for (k, &i) in sa.iter().enumerate() {
            isa[i as usize] = k as u32;
        }
        let lcp = lcp_array(&text, &sa, &isa);
        let rmq = Rmq::new(&lcp);
        let mut first_occurrence = [NONE; 256];
        for (i, &b) in text.iter().enumerate().rev() {
            first_occurrence[b as usize] = i as u32;
        }
        let mut index = RefIndex {
            text,
            sa,
            isa,
            lcp,
            rmq,
            inner: Vec::new(),
            children: Vec::new(),
            du: Vec::new(),
            intervals: HashMap::new(),
            root: 0,
            first_occurrence,
        };
        index.build_tree();
        index.build_heavy_paths();
        Ok(index)
    }

    fn n(&self) -> usize {
        self.text.len()
    }

    /// Bottom-up traversal of the LCP intervals.
    fn build_tree(&mut self) {
        let n = self.n();
        struct Open {
            depth: u32,
            lb: u32,
            children: Vec<NodeId>,
        }
        let mut stack = vec![Open {
            depth: 0,
            lb: 0,
            children: Vec::new(),
        }];
        for j in 1..=n {
            let l = if j < n { self.lcp[j] } else { 0 };
            let mut last: NodeId = (j - 1) as NodeId;
            let mut last_lb = (j - 1) as u32;
            while l < stack.last().expect("root stays").depth {
                let mut open = stack.pop().expect("non-root");
                open.children.push(last);
                last = self.close(open.lb, (j - 1) as u32, open.depth, open.children);
                last_lb = open.lb;
            }
            let top = stack.last_mut().expect("root stays");
            if l == top.depth {
                top.children.push(last);
            } else {
                stack.push(Open {
                    depth: l,
                    lb: last_lb,
                    children: vec![last],
                });
            }
        }
        let root = stack.pop().expect("root");
        self.root = self.close(0, (n - 1) as u32, 0, root.children);
    }

    fn close(&mut self, lb: u32, rb: u32, depth: u32, children: Vec<NodeId>) -> NodeId {
        let id = (self.n() + self.inner.len()) as NodeId;
        let start = self.children.len() as u32;
        self.children.extend_from_slice(&children);
        self.inner.push(Inner {
            lb,
            rb,
            depth,
            heavy_leaf: NONE,
            children: (start, self.children.len() as u32),
            du: (0, 0),
        });
        // Children close before parents, so the deepest node of an interval
        // claims it first.
        self.intervals.entry(interval_key(lb, rb)).or_insert(id);
        id
    }

    fn build_heavy_paths(&mut self) {
        let n = self.n();
        let mut is_top = vec![false; self.inner.len()];
        is_top[self.root as usize - n] = true;
        for v in 0..self.inner.len() {
            let (s, e) = self.inner[v].children;
            let heavy = self.heavy_child_of(s, e);
            self.inner[v].heavy_leaf = if (heavy as usize) < n {
                heavy
            } else {
                self.inner[heavy as usize - n].heavy_leaf
            };
            for k in s..e {
                let c = self.children[k as usize];
                if c != heavy && c as usize >= n {
                    is_top[c as usize - n] = true;
                }
            }
        }
        for v in 0..self.inner.len() {
            if !is_top[v] {
                continue;
            }
            let Inner { lb, rb, depth, .. } = self.inner[v];
            let start = self.du.len();
            for k in lb..=rb {
                let q = (self.sa[k as usize] + depth) as usize;
                if q < n {
                    self.du.push(self.isa[q]);
                }
            }
            self.du[start..].sort_unstable();
            self.inner[v].du = (start as u32, self.du.len() as u32);
        }
    }

    /// The child with the most leaves; the leftmost on ties.
    fn heavy_child_of(&self, s: u32, e: u32) -> NodeId {
        let mut best = self.children[s as usize];
        for k in s + 1..e {
            let c = self.children[k as usize];
            if self.size(c) > self.size(best) {
                best = c;
            }
        }
        best
    }

    fn interval(&self, v: NodeId) -> (u32, u32) {
        if (v as usize) < self.n() {
            (v, v)
        } else {
            let node = &self.inner[v as usize - self.n()];
            (node.lb, node.rb)
        }
    }

    fn size(&self, v: NodeId) -> u32 {
        let (lb, rb) = self.interval(v);
        rb - lb + 1
    }

    fn depth(&self, v: NodeId) -> usize {
        if (v as usize) < self.n() {
            self.n() - self.sa[v as usize] as usize
        } else {
            self.inner[v as usize - self.n()].depth as usize
        }
    }

    fn child_ids(&self, v: NodeId) -> &[NodeId] {
        if (v as usize) < self.n() {
            return &[];
        }
        let (s, e) = self.inner[v as usize - self.n()].children;
        &self.children[s as usize..e as usize]
    }

    fn heavy_leaf(&self, v: NodeId) -> u32 {
        if (v as usize) < self.n() {
            v
        } else {
            self.inner[v as usize - self.n()].heavy_leaf
        }
    }

    fn du_of(&self, v: NodeId) -> &[u32] {
        if (v as usize) < self.n() {
            return &[];
        }
        let (s, e) = self.inner[v as usize - self.n()].du;
        &self.du[s as usize..e as usize]
    }

    /// Common prefix length of suffixes `a` and `b` (0-based; past-the-end
    /// positions give 0).
    fn lce0(&self, a: usize, b: usize) -> usize {
        let n = self.n();
        if a >= n || b >= n {
            return 0;
        }
        if a == b {
            return n - a;
        }
        let (ra, rb) = (self.isa[a] as usize, self.isa[b] as usize);
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.rmq.min(&self.lcp, lo + 1, hi) as usize
    }

    /// SA interval of `R[pos..pos + len]` (0-based, `len >= 1`).
    fn sa_interval(&self, pos: usize, len: usize) -> (u32, u32) {
        let r0 = self.isa[pos] as usize;
        let len = len as u32;
        let (mut a, mut b) = (0, r0);
        while a < b {
            let mid = (a + b) / 2;
            if self.rmq.min(&self.lcp, mid + 1, r0) >= len {
                b = mid;
            } else {
                a = mid + 1;
            }
        }
        let lb = a;
        let (mut a, mut b) = (r0, self.n() - 1);
        while a < b {
            let mid = (a + b).div_ceil(2);
            if self.rmq.min(&self.lcp, r0 + 1, mid) >= len {
                a = mid;
            } else {
                b = mid - 1;
            }
        }
        (lb as u32, a as u32)
    }

    /// Highest node whose string has `R[pos..pos + len]` as a prefix.
    fn locus(&self, pos: usize, len: usize) -> NodeId {
        let (lb, rb) = self.sa_interval(pos, len);
        if lb == rb {
            lb
        } else {
            self.intervals[&interval_key(lb, rb)]
        }
    }

    /// First character on the edge into child `c` of a node at depth `d`.
    fn edge_char(&self, c: NodeId, d: usize) -> Option<u8> {
        let (lb, _) = self.interval(c);
        self.text.get(self.sa[lb as usize] as usize + d).copied()
    }

    pub fn reference(&self) -> &[u8] {
        &self.text
    }

    pub fn len(&self) -> usize {
        self.n()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// 1-based suffix array.
    pub fn suffix_array(&self) -> Vec<usize> {
        self.sa.iter().map(|&i| i as usize + 1).collect()
    }

    /// 1-based rank of suffix `i`.
    pub fn rank(&self, i: usize) -> Result<usize, IndexError> {
        self.check(i)?;
        Ok(self.isa[i - 1] as usize + 1)
    }

    /// A position of byte `b` in the reference.
    pub fn occurrence(&self, b: u8) -> Option<usize> {
        let p = self.first_occurrence[b as usize];
        (p != NONE).then_some(p as usize + 1)
    }

    fn check(&self, i: usize) -> Result<(), IndexError> {
        if i == 0 || i > self.n() {
            Err(IndexError::IndexOutOfRange {
                index: i,
                len: self.n(),
            })
        } else {
            Ok(())
        }
    }

    fn check_block(&self, b: Block) -> Result<(), IndexError> {
        if b.fits(self.n()) {
            Ok(())
        } else {
            Err(IndexError::InvalidBlock {
                block: b,
                len: self.n(),
            })
        }
    }

    /// Length of the longest common prefix of suffixes `a` and `b`.
    pub fn lce(&self, a: usize, b: usize) -> Result<usize, IndexError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.lce0(a - 1, b - 1))
    }

    /// Longest prefix of `text[from..]` (1-based `from`) that occurs in the
    /// reference, as `(length, start)`. The start is 0 when nothing matches.
    pub fn longest_match(&self, text: &[u8], from: usize) -> (usize, usize) {
        if from == 0 || from > text.len() {
            return (0, 0);
        }
        let rest = &text[from - 1..];
        let (mut lo, mut hi) = (0usize, self.n() - 1);
        let mut l = 0;
        while l < rest.len() {
            if lo == hi {
                let start = self.sa[lo] as usize;
                l += self.text[start + l..]
                    .iter()
                    .zip(&rest[l..])
                    .take_while(|(a, b)| a == b)
                    .count();
                break;
            }
            let c = Some(rest[l]);
            let key = |&i: &u32| self.text.get(i as usize + l).copied();
            let range = &self.sa[lo..=hi];
            let a = range.partition_point(|i| key(i) < c);
            let b = range.partition_point(|i| key(i) <= c);
            if a == b {
                break;
            }
            hi = lo + b - 1;
            lo += a;
            l += 1;
        }
        if l == 0 {
            (0, 0)
        } else {
            (l, self.sa[lo] as usize + 1)
        }
    }

    /// Start of an occurrence of `R[x]·R[y]` in the reference, or `None`.
    pub fn substring_concat(&self, x: Block, y: Block) -> Result<Option<usize>, IndexError> {
        self.check_block(x)?;
        self.check_block(y)?;
        Ok(self.concat0(x.start - 1, x.len(), y.start - 1, y.len()).map(|p| p + 1))
    }

    fn concat0(&self, xi: usize, lx: usize, yi: usize, ly: usize) -> Option<usize> {
        let n = self.n();
        if lx + ly > n {
            return None;
        }
        // Follow y along the heavy path below the locus of x.
        let v = self.locus(xi, lx);
        let h = self.sa[self.heavy_leaf(v) as usize] as usize;
        let m = ly.min(self.lce0(h + lx, yi));
        if m == ly {
            return Some(h);
        }
        let d = lx + m;
        let p = self.locus(h, d);
        if self.depth(p) != d {
            // The path diverges from y in the middle of an edge.
            return None;
        }
        let c = Some(self.text[yi + m]);
        let kids = self.child_ids(p);
        let k = kids.partition_point(|&u| self.edge_char(u, d) < c);
        let u = *kids.get(k).filter(|&&u| self.edge_char(u, d) == c)?;
        let start = self.sa[self.interval(u).0 as usize] as usize;
        let edge = self.depth(u) - d;
        let rest = ly - m;
        if rest <= edge {
            return (self.lce0(start + d, yi + m) >= rest).then_some(start);
        }
        if self.lce0(start + d, yi + m) < edge {
            return None;
        }
        // Some suffix below u must continue with the unmatched part of y.
        let (a, b) = self.sa_interval(yi + m + edge, rest - edge);
        let du = self.du_of(u);
        let k = du.partition_point(|&q| q < a);
        let &q = du.get(k).filter(|&&q| q <= b)?;
        Some(self.sa[q as usize] as usize - self.depth(u))
    }

    /// Brute-force check of every stored structure.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.n();
        let text = &self.text;
        for k in 1..n {
            let (a, b) = (self.sa[k - 1] as usize, self.sa[k] as usize);
            if text[a..] >= text[b..] {
                return Err(format!("suffixes at ranks {} and {k} out of order", k - 1));
            }
            let l = text[a..].iter().zip(&text[b..]).take_while(|(x, y)| x == y).count();
            if self.lcp[k] as usize != l {
                return Err(format!("lcp[{k}] = {} but should be {l}", self.lcp[k]));
            }
        }
        for (k, &i) in self.sa.iter().enumerate() {
            if self.isa[i as usize] as usize != k {
                return Err(format!("isa is not the inverse at rank {k}"));
            }
        }
        for (v, node) in self.inner.iter().enumerate() {
            let id = (n + v) as NodeId;
            let kids = self.child_ids(id);
            let covered: u32 = kids.iter().map(|&c| self.size(c)).sum();
            if covered != node.rb - node.lb + 1 {
                return Err(format!("children of node {id} do not tile its interval"));
            }
            let heavy = kids
                .iter()
                .copied()
                .find(|&c| self.heavy_leaf(c) == node.heavy_leaf)
                .ok_or("heavy leaf not below any child")?;
            if kids.iter().any(|&c| self.size(c) > self.size(heavy)) {
                return Err(format!("node {id} has a lighter heavy child"));
            }
            let mut expected: Vec<u32> = (node.lb..=node.rb)
                .map(|k| (self.sa[k as usize] + node.depth) as usize)
                .filter(|&q| q < n)
                .map(|q| self.isa[q])
                .collect();
            expected.sort_unstable();
            let stored = self.du_of(id);
            if !stored.is_empty() && stored != expected.as_slice() {
                return Err(format!("rank set of node {id} is wrong"));
            }
        }
        let mut tops = vec![(self.root, 1usize)];
        let bound = (n as f64).log2().floor() as usize + 1;
        while let Some((v, crossed)) = tops.pop() {
            if crossed > bound {
                return Err(format!("a root-to-leaf path crosses {crossed} heavy paths"));
            }
            let kids = self.child_ids(v);
            if kids.is_empty() {
                continue;
            }
            let heavy = self.heavy_child_of_node(v);
            for &c in kids {
                tops.push((c, crossed + usize::from(c != heavy)));
            }
        }
        Ok(())
    }

    fn heavy_child_of_node(&self, v: NodeId) -> NodeId {
        let (s, e) = self.inner[v as usize - self.n()].children;
        self.heavy_child_of(s, e)
    }

    /// Total number of stored rank entries over all heavy-path tops.
    pub fn rank_set_entries(&self) -> usize {
        self.du.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{naive_longest_match, naive_substring_concat};

    fn banana() -> RefIndex {
        RefIndex::new(b"banana").unwrap()
    }

    #[test]
    fn banana_suffix_array() {
        let idx = banana();
        assert_eq!(idx.suffix_array(), vec![6, 4, 2, 1, 5, 3]);
        idx.validate().unwrap();
        assert_eq!(idx.lce(2, 4), Ok(3));
        assert_eq!(idx.lce(3, 3), Ok(4));
        assert!(idx.lce(0, 1).is_err());
        assert_eq!(idx.occurrence(b'n'), Some(3));
        assert_eq!(idx.occurrence(b'z'), None);
    }

    #[test]
    fn banana_concat() {
        let idx = banana();
        let q = |a, b, c, d| idx.substring_concat(Block::new(a, b), Block::new(c, d)).unwrap();
        assert_eq!(q(1, 2, 3, 4), Some(1));
        assert_eq!(q(2, 3, 2, 3), Some(2));
        assert_eq!(q(5, 6, 1, 1), None);
        assert!(idx.substring_concat(Block { start: 5, end: 7 }, Block::new(1, 1)).is_err());
    }

    #[test]
    fn banana_longest_match() {
        let idx = banana();
        assert_eq!(idx.longest_match(b"bananaban", 1), (6, 1));
        assert_eq!(idx.longest_match(b"bananaban", 7), (3, 1));
        assert_eq!(idx.longest_match(b"xa", 1), (0, 0));
    }

    #[test]
    fn unit_and_periodic_references() {
        let one = RefIndex::new(b"a").unwrap();
        one.validate().unwrap();
        assert_eq!(one.suffix_array(), vec![1]);
        assert_eq!(one.substring_concat(Block::new(1, 1), Block::new(1, 1)), Ok(None));
        let aaaa = RefIndex::new(b"aaaa").unwrap();
        aaaa.validate().unwrap();
        assert_eq!(aaaa.substring_concat(Block::new(2, 3), Block::new(1, 2)), Ok(Some(1)));
        assert_eq!(aaaa.substring_concat(Block::new(2, 4), Block::new(1, 2)), Ok(None));
        assert!(matches!(RefIndex::new(b""), Err(IndexError::EmptyReference)));
    }

    #[test]
    fn agrees_with_scans_on_small_references() {
        for text in [&b"abaababaab"[..], b"mississippi", b"abcabcabd", b"aabbaabb"] {
            let idx = RefIndex::new(text).unwrap();
            idx.validate().unwrap();
            let r = text.len();
            let blocks: Vec<Block> = (1..=r)
                .flat_map(|s| (s..=r).map(move |e| Block::new(s, e)))
                .collect();
            for &x in &blocks {
                for &y in &blocks {
                    let got = idx.substring_concat(x, y).unwrap();
                    let want = naive_substring_concat(text, x, y);
                    assert_eq!(got.is_some(), want.is_some(), "{x} {y} in {text:?}");
                    if let Some(p) = got {
                        let mut xy = x.slice(text).to_vec();
                        xy.extend_from_slice(y.slice(text));
                        assert_eq!(&text[p - 1..p - 1 + xy.len()], xy.as_slice());
                    }
                }
            }
            for from in 1..=r {
                let probe = [&text[from - 1..], b"ab"].concat();
                let (l, s) = idx.longest_match(&probe, 1);
                assert_eq!(l, naive_longest_match(text, &probe, 1).0);
                assert_eq!(&text[s - 1..s - 1 + l], &probe[..l]);
            }
        }
    }
}
