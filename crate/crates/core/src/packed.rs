//! Dynamic partial sums over short sequences.
//!
//! A [`PackedSums`] stores at most `capacity` non-negative entries `Z[1..]`
//! through their prefix sums `Y[i] = Z[1] + ... + Z[i]`. The prefix sums are
//! grouped into *runs*: two neighbouring prefix sums share a run when they
//! differ by at most the run gap. The first element of a run is its
//! representative. Every prefix sum is kept as a small signed offset from the
//! stored value of its representative, and those offsets are packed into a few
//! machine words so that one word operation adjusts many of them at once:
//!
//! * `U` (offsets) and `C` (running representative counts) are packed arrays
//!   of `field_bits`-wide two's complement fields,
//! * `B` (run starts) is a bitstring,
//! * representative values live in a small sorted set.
//!
//! Updates touch only `U`. Representatives drift out of date between
//! rebuilds, but the run gap is chosen so that the drift accumulated before the
//! next periodic rebuild can never move an answer of `search` outside the run
//! of the successor representative or its two neighbours.
//!
//! `divide` and `merge` re-partition only the runs around the touched index.
//! When the re-partitioned window would leave too little slack against its
//! neighbours for the remaining drift budget, the whole structure is rebuilt
//! instead; with the default parameters that is an `O(B)` step on at most eight
//! entries.

use std::ops::Range;

use smallvec::SmallVec;
use thiserror::Error;

const WORD_BITS: u32 = u64::BITS;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PsError {
    #[error("index {index} outside 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("search target {target} outside 1..={total}")]
    OutOfBounds { target: u64, total: u64 },
    #[error("update {delta} does not fit in {bits} bits")]
    DeltaTooLarge { delta: i64, bits: u32 },
    #[error("entry {index} would become negative")]
    NegativeEntry { index: usize },
    #[error("cannot split an entry of value {value} at {at}")]
    BadSplit { value: u64, at: u64 },
    #[error("sequence already holds {capacity} entries")]
    Full { capacity: usize },
    #[error("entry of value {value} cannot be removed with {bits}-bit updates")]
    DeleteTooLarge { value: u64, bits: u32 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Word-RAM parameters of a [`PackedSums`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PsConfig {
    capacity: usize,
    delta_bits: u32,
    run_gap: u64,
    field_bits: u32,
}

impl Default for PsConfig {
    /// `B = 8`, `δ = 2`, 16-bit fields: `U` and `C` fill two 64-bit words each.
    fn default() -> Self {
        PsConfig::new(8, 2, 16).expect("default configuration is valid")
    }
}

impl PsConfig {
    /// Configuration with run gap `capacity · 2^delta_bits` whose packed arrays
    /// fit in two machine words.
    pub fn new(capacity: usize, delta_bits: u32, field_bits: u32) -> Result<Self, PsError> {
        if delta_bits > 16 {
            return Err(PsError::InvalidConfig("delta_bits must be at most 16"));
        }
        let gap = (capacity as u64) << delta_bits;
        let config = Self::custom(capacity, delta_bits, gap, field_bits)?;
        if capacity as u64 * field_bits as u64 > 2 * WORD_BITS as u64 {
            return Err(PsError::InvalidConfig(
                "packed arrays must fit in two machine words",
            ));
        }
        Ok(config)
    }

    /// Configuration with an explicit run gap and no limit on the number of
    /// words used by the packed arrays (up to 128 entries).
    ///
    /// The periodic rebuild happens every `run_gap / 2^delta_bits` operations,
    /// so the drift between rebuilds always stays below the run gap.
    pub fn custom(
        capacity: usize,
        delta_bits: u32,
        run_gap: u64,
        field_bits: u32,
    ) -> Result<Self, PsError> {
        if !(1..=128).contains(&capacity) {
            return Err(PsError::InvalidConfig("capacity must be in 1..=128"));
        }
        if !matches!(field_bits, 8 | 16 | 32) {
            return Err(PsError::InvalidConfig("field width must be 8, 16 or 32 bits"));
        }
        if delta_bits > 16 {
            return Err(PsError::InvalidConfig("delta_bits must be at most 16"));
        }
        if run_gap == 0 {
            return Err(PsError::InvalidConfig("run gap must be positive"));
        }
        // Offsets stay below capacity·gap + gap in magnitude; two spare bits
        // for the sign and for the sum with a search offset.
        let spread = (capacity as u128 + 1) * run_gap as u128;
        let needed = 2 + ceil_log2(spread);
        if needed > field_bits || capacity as u128 >= 1u128 << (field_bits - 2) {
            return Err(PsError::InvalidConfig("fields too narrow for capacity and run gap"));
        }
        Ok(PsConfig {
            capacity,
            delta_bits,
            run_gap,
            field_bits,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn delta_bits(&self) -> u32 {
        self.delta_bits
    }

    pub fn run_gap(&self) -> u64 {
        self.run_gap
    }

    pub fn field_bits(&self) -> u32 {
        self.field_bits
    }

    /// Exclusive bound on `|Δ|` for update and insert.
    pub fn delta_limit(&self) -> u64 {
        1 << self.delta_bits
    }

    /// Number of mutations between two full rebuilds.
    pub fn rebuild_period(&self) -> usize {
        ((self.run_gap >> self.delta_bits) as usize).max(1)
    }

    fn drift_budget(&self, ops_done: usize) -> u64 {
        (self.rebuild_period().saturating_sub(ops_done)) as u64 * (self.delta_limit() - 1)
    }

    fn offset_limit(&self) -> i64 {
        1 << (self.field_bits - 2)
    }
}

fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}

/// Fixed-width two's complement fields packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct PackedArray {
    words: SmallVec<[u64; 2]>,
    len: usize,
    field_bits: u32,
}

impl PackedArray {
    fn new(field_bits: u32) -> Self {
        PackedArray {
            words: SmallVec::new(),
            len: 0,
            field_bits,
        }
    }

    #[inline]
    fn per_word(&self) -> usize {
        (WORD_BITS / self.field_bits) as usize
    }

    #[inline]
    fn field_mask(&self) -> u64 {
        (1u64 << self.field_bits) - 1
    }

    /// One in the lowest bit of every field.
    #[inline]
    fn ones(&self) -> u64 {
        u64::MAX / self.field_mask()
    }

    /// The sign bit of every field.
    #[inline]
    fn high_bits(&self) -> u64 {
        self.ones() << (self.field_bits - 1)
    }

    #[inline]
    fn locate(&self, i: usize) -> (usize, u32) {
        let per = self.per_word();
        (i / per, (i % per) as u32 * self.field_bits)
    }

    /// Copies `value` into every field by a single multiplication.
    #[inline]
    fn broadcast(&self, value: i64) -> u64 {
        (value as u64 & self.field_mask()).wrapping_mul(self.ones())
    }

    /// Field-wise addition modulo `2^field_bits`, without carries between fields.
    #[inline]
    fn swar_add(&self, x: u64, y: u64) -> u64 {
        let h = self.high_bits();
        ((x & !h).wrapping_add(y & !h)) ^ ((x ^ y) & h)
    }

    /// Mask selecting the fields of word `w` whose index lies in `range`.
    fn lanes(&self, w: usize, range: &Range<usize>) -> u64 {
        let per = self.per_word();
        let first = w * per;
        let lo = range.start.max(first) - first;
        let hi = range.end.min(first + per).saturating_sub(first);
        if lo >= hi {
            return 0;
        }
        let bits = |n: usize| -> u64 {
            let b = n as u32 * self.field_bits;
            if b >= WORD_BITS {
                u64::MAX
            } else {
                (1u64 << b) - 1
            }
        };
        bits(hi) & !bits(lo)
    }

    fn words_for(&self, range: &Range<usize>) -> Range<usize> {
        if range.start >= range.end {
            return 0..0;
        }
        let per = self.per_word();
        range.start / per..(range.end - 1) / per + 1
    }

    fn get(&self, i: usize) -> i64 {
        debug_assert!(i < self.len);
        let (w, shift) = self.locate(i);
        let raw = (self.words[w] >> shift) & self.field_mask();
        let spare = WORD_BITS - self.field_bits;
        ((raw << spare) as i64) >> spare
    }

    fn set(&mut self, i: usize, value: i64) {
        debug_assert!(i < self.len);
        let (w, shift) = self.locate(i);
        let m = self.field_mask() << shift;
        self.words[w] = (self.words[w] & !m) | (((value as u64) << shift) & m);
    }

    fn insert(&mut self, i: usize, value: i64) {
        debug_assert!(i <= self.len);
        if self.len % self.per_word() == 0 {
            self.words.push(0);
        }
        let (wi, shift) = self.locate(i);
        let carry_shift = WORD_BITS - self.field_bits;
        for w in (wi + 1..self.words.len()).rev() {
            self.words[w] = (self.words[w] << self.field_bits) | (self.words[w - 1] >> carry_shift);
        }
        let low_mask = (1u64 << shift) - 1;
        let word = self.words[wi];
        let low = word & low_mask;
        let high = (word & !low_mask) << self.field_bits;
        let field = (value as u64 & self.field_mask()) << shift;
        self.words[wi] = low | high | field;
        self.len += 1;
    }

    fn remove(&mut self, i: usize) -> i64 {
        debug_assert!(i < self.len);
        let value = self.get(i);
        let (wi, shift) = self.locate(i);
        let carry_shift = WORD_BITS - self.field_bits;
        let next_low = |words: &[u64], w: usize, mask: u64| -> u64 {
            words.get(w + 1).map_or(0, |&x| (x & mask) << carry_shift)
        };
        let fm = self.field_mask();
        let word = self.words[wi];
        let low_mask = (1u64 << shift) - 1;
        let above_shift = shift + self.field_bits;
        let above = if above_shift >= WORD_BITS {
            0
        } else {
            (word >> above_shift) << shift
        };
        self.words[wi] = (word & low_mask) | above | next_low(&self.words, wi, fm);
        for w in wi + 1..self.words.len() {
            self.words[w] = (self.words[w] >> self.field_bits) | next_low(&self.words, w, fm);
        }
        self.len -= 1;
        let needed = self.len.div_ceil(self.per_word());
        self.words.truncate(needed);
        value
    }

    /// Adds `delta` to every field in `range` with one SWAR addition per word.
    fn add_range(&mut self, range: Range<usize>, delta: i64) {
        if delta == 0 {
            return;
        }
        let pattern = self.broadcast(delta);
        for w in self.words_for(&range) {
            let add = pattern & self.lanes(w, &range);
            self.words[w] = self.swar_add(self.words[w], add);
        }
    }

    /// Number of fields `j` in `range` with `field[j] + offset < 0`.
    ///
    /// Every such sum must be representable in a field.
    fn count_negative(&self, range: Range<usize>, offset: i64) -> usize {
        let pattern = self.broadcast(offset);
        let h = self.high_bits();
        self.words_for(&range)
            .map(|w| {
                let shifted = self.swar_add(self.words[w], pattern);
                (shifted & h & self.lanes(w, &range)).count_ones() as usize
            })
            .sum()
    }

    fn clear(&mut self) {
        self.words.clear();
        self.len = 0;
    }

    fn push(&mut self, value: i64) {
        let i = self.len;
        if i % self.per_word() == 0 {
            self.words.push(0);
        }
        self.len += 1;
        self.set(i, value);
    }

    fn to_vec(&self) -> Vec<i64> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

fn bits_insert(bits: u128, i: usize, bit: bool) -> u128 {
    let low_mask = (1u128 << i) - 1;
    (bits & low_mask) | ((bits & !low_mask) << 1) | ((bit as u128) << i)
}

fn bits_remove(bits: u128, i: usize) -> u128 {
    let low_mask = (1u128 << i) - 1;
    let above = if i + 1 >= 128 { 0 } else { (bits >> (i + 1)) << i };
    (bits & low_mask) | above
}

/// Partial sums over at most `capacity` entries. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PackedSums {
    config: PsConfig,
    count: usize,
    /// Stored representative values, strictly increasing in run order.
    reps: Vec<u64>,
    /// `U[i] = Y[i] - reps[rep(i)]`.
    offsets: PackedArray,
    /// Bit `i` set iff element `i` starts a run.
    run_bits: u128,
    /// `C[i]` = number of run starts among elements `0..=i`.
    run_counts: PackedArray,
    ops_since_rebuild: usize,
}

impl PackedSums {
    pub fn new(config: PsConfig) -> Self {
        PackedSums {
            config,
            count: 0,
            reps: Vec::new(),
            offsets: PackedArray::new(config.field_bits),
            run_bits: 0,
            run_counts: PackedArray::new(config.field_bits),
            ops_since_rebuild: 0,
        }
    }

    /// Builds the structure over `values` and runs a full rebuild.
    pub fn from_values(config: PsConfig, values: &[u64]) -> Result<Self, PsError> {
        if values.len() > config.capacity {
            return Err(PsError::Full {
                capacity: config.capacity,
            });
        }
        let mut ps = PackedSums::new(config);
        let prefix: Vec<u64> = values
            .iter()
            .scan(0u64, |acc, &v| {
                *acc += v;
                Some(*acc)
            })
            .collect();
        ps.rebuild_from_prefix(&prefix);
        Ok(ps)
    }

    pub fn config(&self) -> &PsConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn is_full(&self) -> bool {
        self.count == self.config.capacity
    }

    pub fn total(&self) -> u64 {
        if self.count == 0 {
            0
        } else {
            self.prefix(self.count - 1)
        }
    }

    pub fn representatives(&self) -> &[u64] {
        &self.reps
    }

    pub fn offsets(&self) -> Vec<i64> {
        self.offsets.to_vec()
    }

    pub fn run_bits(&self) -> Vec<bool> {
        (0..self.count).map(|i| self.run_bits >> i & 1 == 1).collect()
    }

    pub fn run_counts(&self) -> Vec<i64> {
        self.run_counts.to_vec()
    }

    pub fn ops_since_rebuild(&self) -> usize {
        self.ops_since_rebuild
    }

    /// Prefix sum through element `i` (0-based).
    #[inline]
    fn prefix(&self, i: usize) -> u64 {
        let run = self.run_counts.get(i) as usize - 1;
        self.reps[run].wrapping_add_signed(self.offsets.get(i))
    }

    #[inline]
    fn prefix_before(&self, i: usize) -> u64 {
        if i == 0 {
            0
        } else {
            self.prefix(i - 1)
        }
    }

    #[inline]
    fn run_of(&self, i: usize) -> usize {
        self.run_counts.get(i) as usize - 1
    }

    /// Index of the first element of run `k` (0-based), by counting the
    /// elements whose running count is still below `k + 1`.
    fn run_start(&self, k: usize) -> usize {
        if k >= self.reps.len() {
            return self.count;
        }
        self.run_counts.count_negative(0..self.count, -(k as i64 + 1))
    }

    fn run_range(&self, k: usize) -> Range<usize> {
        self.run_start(k)..self.run_start(k + 1)
    }

    fn check_index(&self, i: usize) -> Result<usize, PsError> {
        if i == 0 || i > self.count {
            Err(PsError::IndexOutOfRange {
                index: i,
                len: self.count,
            })
        } else {
            Ok(i - 1)
        }
    }

    fn check_delta(&self, delta: i64) -> Result<(), PsError> {
        if delta.unsigned_abs() >= self.config.delta_limit() {
            Err(PsError::DeltaTooLarge {
                delta,
                bits: self.config.delta_bits,
            })
        } else {
            Ok(())
        }
    }

    /// `Z[1] + ... + Z[i]`.
    pub fn sum(&self, i: usize) -> Result<u64, PsError> {
        let p = self.check_index(i)?;
        Ok(self.prefix(p))
    }

    /// The entry `Z[i]`.
    pub fn entry(&self, i: usize) -> Result<u64, PsError> {
        let p = self.check_index(i)?;
        Ok(self.prefix(p) - self.prefix_before(p))
    }

    pub fn values(&self) -> Vec<u64> {
        (0..self.count)
            .map(|p| self.prefix(p) - self.prefix_before(p))
            .collect()
    }

    /// Smallest `i` with `sum(i) >= t`.
    pub fn search(&self, t: u64) -> Result<usize, PsError> {
        let total = self.total();
        if t == 0 || t > total {
            return Err(PsError::OutOfBounds { target: t, total });
        }
        let succ = self.reps.partition_point(|&r| r < t);
        let last_run = self.reps.len() - 1;
        let limit = self.config.offset_limit();
        for k in succ.saturating_sub(1)..=(succ + 1).min(last_run) {
            let run = self.run_range(k);
            let width = run.len();
            let offset = self.reps[k] as i128 - t as i128;
            let below = if offset >= limit as i128 {
                0
            } else if offset <= -(limit as i128) {
                width
            } else {
                self.offsets.count_negative(run.clone(), offset as i64)
            };
            if below < width {
                return Ok(run.start + below + 1);
            }
        }
        unreachable!("search target {t} escaped the successor runs")
    }

    /// `Z[i] += delta`.
    pub fn update(&mut self, i: usize, delta: i64) -> Result<(), PsError> {
        let p = self.check_index(i)?;
        self.check_delta(delta)?;
        let value = self.prefix(p) - self.prefix_before(p);
        if (value as i128) + (delta as i128) < 0 {
            return Err(PsError::NegativeEntry { index: i });
        }
        self.offsets.add_range(p..self.count, delta);
        self.count_op();
        Ok(())
    }

    /// Replaces `Z[i]` by the two entries `t` and `Z[i] - t`.
    pub fn divide(&mut self, i: usize, t: u64) -> Result<(), PsError> {
        let p = self.check_index(i)?;
        if self.is_full() {
            return Err(PsError::Full {
                capacity: self.config.capacity,
            });
        }
        let before = self.prefix_before(p);
        let value = self.prefix(p) - before;
        if t > value {
            return Err(PsError::BadSplit { value, at: t });
        }
        let run_lo = self.run_of(p.saturating_sub(1));
        let run_hi = self.run_of(p);
        let span = self.run_start(run_lo)..self.run_start(run_hi + 1);
        let mut ys: Vec<u64> = span.clone().map(|j| self.prefix(j)).collect();
        ys.insert(p - span.start, before + t);
        self.replace_window(run_lo..run_hi + 1, span, ys);
        Ok(())
    }

    /// Replaces `Z[i]` and `Z[i + 1]` by their sum.
    pub fn merge(&mut self, i: usize) -> Result<(), PsError> {
        if i == 0 || i >= self.count {
            return Err(PsError::IndexOutOfRange {
                index: i,
                len: self.count,
            });
        }
        let p = i - 1;
        let run_lo = self.run_of(p.saturating_sub(1));
        let run_hi = self.run_of(p + 1);
        let span = self.run_start(run_lo)..self.run_start(run_hi + 1);
        let mut ys: Vec<u64> = span.clone().map(|j| self.prefix(j)).collect();
        ys.remove(p - span.start);
        self.replace_window(run_lo..run_hi + 1, span, ys);
        Ok(())
    }

    /// Inserts a new entry of value `delta` before `Z[i]`; `i = len + 1` appends.
    pub fn insert(&mut self, i: usize, delta: u64) -> Result<(), PsError> {
        if i == 0 || i > self.count + 1 {
            return Err(PsError::IndexOutOfRange {
                index: i,
                len: self.count,
            });
        }
        if delta >= self.config.delta_limit() {
            return Err(PsError::DeltaTooLarge {
                delta: delta as i64,
                bits: self.config.delta_bits,
            });
        }
        if self.is_full() {
            return Err(PsError::Full {
                capacity: self.config.capacity,
            });
        }
        if self.count == 0 {
            self.rebuild_from_prefix(&[delta]);
            return Ok(());
        }
        if i <= self.count {
            self.divide(i, 0)?;
        } else {
            let last = self.entry(self.count)?;
            self.divide(self.count, last)?;
        }
        self.update(i, delta as i64)
    }

    /// Removes `Z[i]`, which must be smaller than `2^δ`.
    pub fn delete(&mut self, i: usize) -> Result<(), PsError> {
        let value = self.entry(i)?;
        if value >= self.config.delta_limit() {
            return Err(PsError::DeleteTooLarge {
                value,
                bits: self.config.delta_bits,
            });
        }
        if value > 0 {
            self.update(i, -(value as i64))?;
        }
        if self.count == 1 {
            self.rebuild_from_prefix(&[]);
            Ok(())
        } else if i == 1 {
            self.merge(1)
        } else {
            self.merge(i - 1)
        }
    }

    /// Full rebuild: greedy runs over the current prefix sums.
    pub fn rebuild(&mut self) {
        let ys: Vec<u64> = (0..self.count).map(|j| self.prefix(j)).collect();
        self.rebuild_from_prefix(&ys);
    }

    fn count_op(&mut self) {
        self.ops_since_rebuild += 1;
        if self.ops_since_rebuild >= self.config.rebuild_period() {
            self.rebuild();
        }
    }

    fn rebuild_from_prefix(&mut self, ys: &[u64]) {
        debug_assert!(ys.len() <= self.config.capacity);
        self.count = ys.len();
        self.reps.clear();
        self.offsets.clear();
        self.run_counts.clear();
        self.run_bits = 0;
        for (j, &y) in ys.iter().enumerate() {
            if j == 0 || y - ys[j - 1] > self.config.run_gap {
                self.reps.push(y);
                self.run_bits |= 1 << j;
            }
            let rep = *self.reps.last().expect("first element starts a run");
            self.offsets.push((y - rep) as i64);
            self.run_counts.push(self.reps.len() as i64);
        }
        self.ops_since_rebuild = 0;
    }

    /// Replaces the elements of `span`, which covers exactly the runs `runs`,
    /// with the prefix sums `ys`, re-partitioning them greedily.
    fn replace_window(&mut self, runs: Range<usize>, span: Range<usize>, ys: Vec<u64>) {
        self.ops_since_rebuild += 1;
        if self.ops_since_rebuild >= self.config.rebuild_period()
            || !self.window_fits(&runs, &span, &ys)
        {
            let mut all: Vec<u64> = (0..span.start).map(|j| self.prefix(j)).collect();
            all.extend_from_slice(&ys);
            all.extend((span.end..self.count).map(|j| self.prefix(j)));
            self.rebuild_from_prefix(&all);
            return;
        }

        for _ in span.clone() {
            self.offsets.remove(span.start);
            self.run_counts.remove(span.start);
            self.run_bits = bits_remove(self.run_bits, span.start);
        }
        let old_runs = runs.len();
        let mut new_reps = Vec::new();
        for (k, &y) in ys.iter().enumerate() {
            let at = span.start + k;
            let starts = k == 0 || y - ys[k - 1] > self.config.run_gap;
            if starts {
                new_reps.push(y);
            }
            let rep = *new_reps.last().expect("window starts a run");
            self.offsets.insert(at, (y - rep) as i64);
            self.run_counts.insert(at, (runs.start + new_reps.len()) as i64);
            self.run_bits = bits_insert(self.run_bits, at, starts);
        }
        self.count = self.count - span.len() + ys.len();
        let after = span.start + ys.len();
        self.run_counts
            .add_range(after..self.count, new_reps.len() as i64 - old_runs as i64);
        self.reps.splice(runs, new_reps);
    }

    /// Whether greedily re-partitioning the window keeps enough slack against
    /// the runs outside it for the drift still allowed before the next rebuild.
    fn window_fits(&self, runs: &Range<usize>, span: &Range<usize>, ys: &[u64]) -> bool {
        let budget = self.config.drift_budget(self.ops_since_rebuild) as i128;
        let limit = self.config.offset_limit() as i128;
        let gap = self.config.run_gap;
        let mut first_rep = None;
        let mut last_rep = 0;
        let mut rep = 0;
        for (k, &y) in ys.iter().enumerate() {
            if k == 0 || y - ys[k - 1] > gap {
                rep = y;
                first_rep.get_or_insert(y);
                last_rep = y;
            }
            if (y - rep) as i128 + budget >= limit {
                return false;
            }
        }
        let (Some(first_rep), Some(&first_y), Some(&last_y)) = (first_rep, ys.first(), ys.last())
        else {
            return false;
        };
        if runs.start > 0 {
            let rep_before = self.reps[runs.start - 1] as i128;
            let last_before = self.prefix(span.start - 1) as i128;
            let r = first_rep as i128;
            if r <= rep_before || r - last_before < budget || first_y as i128 - rep_before < budget
            {
                return false;
            }
        }
        if runs.end < self.reps.len() {
            let rep_after = self.reps[runs.end] as i128;
            let first_after = self.prefix(span.end) as i128;
            let r = last_rep as i128;
            if r >= rep_after || rep_after - (last_y as i128) < budget || first_after - r < budget {
                return false;
            }
        }
        true
    }

    /// Checks every structural invariant; used by tests and debug validators.
    pub fn check_invariants(&self) -> Result<(), String> {
        let cfg = &self.config;
        if self.count > cfg.capacity {
            return Err(format!("{} entries exceed capacity {}", self.count, cfg.capacity));
        }
        if self.offsets.len != self.count || self.run_counts.len != self.count {
            return Err("packed array lengths disagree with count".into());
        }
        if self.count < 128 && self.run_bits >> self.count != 0 {
            return Err("run bits set beyond count".into());
        }
        if self.count > 0 && self.run_bits & 1 == 0 {
            return Err("first element is not a representative".into());
        }
        if self.run_bits.count_ones() as usize != self.reps.len() {
            return Err("run bit count differs from representative count".into());
        }
        if self.reps.windows(2).any(|w| w[0] >= w[1]) {
            return Err("representatives not strictly increasing".into());
        }
        if self.ops_since_rebuild >= cfg.rebuild_period() {
            return Err("rebuild overdue".into());
        }
        let mut running = 0;
        for i in 0..self.count {
            running += (self.run_bits >> i & 1) as i64;
            if self.run_counts.get(i) != running {
                return Err(format!("C[{}] = {} but {} run starts", i + 1, self.run_counts.get(i), running));
            }
            if self.offsets.get(i).abs() >= cfg.offset_limit() {
                return Err(format!("offset U[{}] overflows its field", i + 1));
            }
            if i > 0 && self.prefix(i) < self.prefix(i - 1) {
                return Err(format!("prefix sums decrease at {}", i + 1));
            }
        }
        let budget = cfg.drift_budget(self.ops_since_rebuild) as i128;
        for k in 1..self.reps.len() {
            let start = self.run_start(k);
            let last_before = self.prefix(start - 1) as i128;
            let first = self.prefix(start) as i128;
            if (self.reps[k] as i128) - last_before < budget
                || first - (self.reps[k - 1] as i128) < budget
            {
                return Err(format!("run boundary before element {} lacks drift slack", start + 1));
            }
        }
        Ok(())
    }
}
