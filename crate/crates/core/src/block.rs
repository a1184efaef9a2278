use std::fmt;

/// A reference interval `R[start..=end]`, 1-based and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block {
    pub start: usize,
    pub end: usize,
}

impl Block {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start >= 1 && start <= end, "invalid block ({start},{end})");
        Block { start, end }
    }

    /// Block of `len >= 1` characters starting at `start`.
    pub fn with_len(start: usize, len: usize) -> Self {
        Block::new(start, start + len - 1)
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether the block lies inside a reference of length `r`.
    pub fn fits(&self, r: usize) -> bool {
        1 <= self.start && self.start <= self.end && self.end <= r
    }

    /// The bytes of the block.
    pub fn slice<'a>(&self, reference: &'a [u8]) -> &'a [u8] {
        &reference[self.start - 1..self.end]
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.start, self.end)
    }
}
