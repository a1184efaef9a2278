//! Dynamic partial sums over sequences of any length.
//!
//! A leaf-oriented B-tree: entries live in the leaves, left to right, and
//! every internal node keeps a [`PackedSums`] over the totals of its children.
//! Queries walk one root-to-leaf path and use the packed structure of each
//! node to pick the child. Each leaf also carries a payload `P`, which lets a
//! caller link leaves to its own records.

use crate::packed::{PackedSums, PsConfig, PsError};

#[derive(Debug, Clone)]
struct Leaf<P> {
    value: u64,
    payload: P,
}

#[derive(Debug, Clone)]
enum Kind<P> {
    Bottom(Vec<Leaf<P>>),
    Inner {
        children: Vec<Node<P>>,
        /// Leaves below each child.
        counts: Vec<usize>,
    },
}

#[derive(Debug, Clone)]
struct Node<P> {
    sums: PackedSums,
    kind: Kind<P>,
}

impl<P> Node<P> {
    fn bottom(config: PsConfig, leaves: Vec<Leaf<P>>) -> Self {
        let values: Vec<u64> = leaves.iter().map(|l| l.value).collect();
        Node {
            sums: PackedSums::from_values(config, &values).expect("node within capacity"),
            kind: Kind::Bottom(leaves),
        }
    }

    fn inner(config: PsConfig, children: Vec<Node<P>>) -> Self {
        let values: Vec<u64> = children.iter().map(Node::total).collect();
        let counts = children.iter().map(Node::leaf_count).collect();
        Node {
            sums: PackedSums::from_values(config, &values).expect("node within capacity"),
            kind: Kind::Inner { children, counts },
        }
    }

    fn total(&self) -> u64 {
        self.sums.total()
    }

    fn degree(&self) -> usize {
        match &self.kind {
            Kind::Bottom(leaves) => leaves.len(),
            Kind::Inner { children, .. } => children.len(),
        }
    }

    fn leaf_count(&self) -> usize {
        match &self.kind {
            Kind::Bottom(leaves) => leaves.len(),
            Kind::Inner { counts, .. } => counts.iter().sum(),
        }
    }

    fn rebuild_sums(&mut self) {
        let config = *self.sums.config();
        let values: Vec<u64> = match &self.kind {
            Kind::Bottom(leaves) => leaves.iter().map(|l| l.value).collect(),
            Kind::Inner { children, .. } => children.iter().map(Node::total).collect(),
        };
        self.sums = PackedSums::from_values(config, &values).expect("node within capacity");
    }

    /// Splits an overfull node in two; returns the right half.
    fn split_off(&mut self) -> Node<P> {
        let config = *self.sums.config();
        let right = match &mut self.kind {
            Kind::Bottom(leaves) => {
                let tail = leaves.split_off(leaves.len() / 2);
                Node::bottom(config, tail)
            }
            Kind::Inner { children, counts } => {
                let half = children.len() / 2;
                counts.truncate(half);
                Node::inner(config, children.split_off(half))
            }
        };
        self.rebuild_sums();
        right
    }
}

/// Locates the child holding leaf `x`; returns the child and the leaf's index
/// inside it.
fn find_child(counts: &[usize], mut x: usize) -> (usize, usize) {
    for (c, &n) in counts.iter().enumerate() {
        if x < n {
            return (c, x);
        }
        x -= n;
    }
    let last = counts.len() - 1;
    (last, x + counts[last])
}

/// Result of [`SumTree::locate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Located<'a, P> {
    /// 1-based index of the entry.
    pub index: usize,
    /// Sum of all entries before it.
    pub before: u64,
    pub value: u64,
    pub payload: &'a P,
}

/// Partial sums over a sequence of arbitrary length. Indices are 1-based.
#[derive(Debug, Clone)]
pub struct SumTree<P = ()> {
    config: PsConfig,
    root: Option<Node<P>>,
    len: usize,
}

impl<P> SumTree<P> {
    /// An empty tree whose nodes hold between `capacity / 2` and `capacity`
    /// children.
    pub fn new(config: PsConfig) -> Result<Self, PsError> {
        if config.capacity() < 4 {
            return Err(PsError::InvalidConfig("B-tree nodes need capacity of at least 4"));
        }
        Ok(SumTree {
            config,
            root: None,
            len: 0,
        })
    }

    /// Bulk-loads a tree from `(value, payload)` pairs.
    pub fn from_entries<I>(config: PsConfig, entries: I) -> Result<Self, PsError>
    where
        I: IntoIterator<Item = (u64, P)>,
    {
        let mut tree = SumTree::new(config)?;
        let leaves: Vec<Leaf<P>> = entries
            .into_iter()
            .map(|(value, payload)| Leaf { value, payload })
            .collect();
        tree.len = leaves.len();
        if leaves.is_empty() {
            return Ok(tree);
        }
        let mut level: Vec<Node<P>> = chunk(leaves, config.capacity())
            .into_iter()
            .map(|group| Node::bottom(config, group))
            .collect();
        while level.len() > 1 {
            level = chunk(level, config.capacity())
                .into_iter()
                .map(|group| Node::inner(config, group))
                .collect();
        }
        tree.root = level.pop();
        Ok(tree)
    }

    pub fn config(&self) -> &PsConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn total(&self) -> u64 {
        self.root.as_ref().map_or(0, Node::total)
    }

    /// Number of node levels: 0 when empty, 1 when the root is a bottom node.
    pub fn height(&self) -> usize {
        let mut h = 0;
        let mut node = self.root.as_ref();
        while let Some(n) = node {
            h += 1;
            node = match &n.kind {
                Kind::Bottom(_) => None,
                Kind::Inner { children, .. } => children.first(),
            };
        }
        h
    }

    fn check_index(&self, i: usize) -> Result<usize, PsError> {
        if i == 0 || i > self.len {
            Err(PsError::IndexOutOfRange {
                index: i,
                len: self.len,
            })
        } else {
            Ok(i - 1)
        }
    }

    fn leaf(&self, x: usize) -> &Leaf<P> {
        let mut node = self.root.as_ref().expect("non-empty tree");
        let mut x = x;
        loop {
            match &node.kind {
                Kind::Bottom(leaves) => return &leaves[x],
                Kind::Inner { children, counts } => {
                    let (c, y) = find_child(counts, x);
                    node = &children[c];
                    x = y;
                }
            }
        }
    }

    /// The entry `Z[i]`.
    pub fn get(&self, i: usize) -> Result<u64, PsError> {
        let x = self.check_index(i)?;
        Ok(self.leaf(x).value)
    }

    pub fn payload(&self, i: usize) -> Result<&P, PsError> {
        let x = self.check_index(i)?;
        Ok(&self.leaf(x).payload)
    }

    /// `Z[1] + ... + Z[i]`.
    pub fn sum(&self, i: usize) -> Result<u64, PsError> {
        let x = self.check_index(i)?;
        let mut node = self.root.as_ref().expect("non-empty tree");
        let mut x = x;
        let mut acc = 0;
        loop {
            match &node.kind {
                Kind::Bottom(_) => return Ok(acc + node.sums.sum(x + 1).expect("leaf in node")),
                Kind::Inner { children, counts } => {
                    let (c, y) = find_child(counts, x);
                    if c > 0 {
                        acc += node.sums.sum(c).expect("child in node");
                    }
                    node = &children[c];
                    x = y;
                }
            }
        }
    }

    /// Smallest `i` with `sum(i) >= t`.
    pub fn search(&self, t: u64) -> Result<usize, PsError> {
        self.locate(t).map(|found| found.index)
    }

    /// Like [`search`](Self::search), also reporting the sum before the entry
    /// and its payload.
    pub fn locate(&self, t: u64) -> Result<Located<'_, P>, PsError> {
        let total = self.total();
        if t == 0 || t > total {
            return Err(PsError::OutOfBounds { target: t, total });
        }
        let mut node = self.root.as_ref().expect("non-empty tree");
        let mut t = t;
        let mut index = 0;
        let mut before = 0;
        loop {
            let c = node.sums.search(t).expect("target within node") - 1;
            let skipped = if c > 0 {
                node.sums.sum(c).expect("child in node")
            } else {
                0
            };
            t -= skipped;
            before += skipped;
            match &node.kind {
                Kind::Bottom(leaves) => {
                    let leaf = &leaves[c];
                    return Ok(Located {
                        index: index + c + 1,
                        before,
                        value: leaf.value,
                        payload: &leaf.payload,
                    });
                }
                Kind::Inner { children, counts } => {
                    index += counts[..c].iter().sum::<usize>();
                    node = &children[c];
                }
            }
        }
    }

    /// `Z[i] += delta`, with `|delta| < 2^δ`.
    pub fn update(&mut self, i: usize, delta: i64) -> Result<(), PsError> {
        let x = self.check_index(i)?;
        if delta.unsigned_abs() >= self.config.delta_limit() {
            return Err(PsError::DeltaTooLarge {
                delta,
                bits: self.config.delta_bits(),
            });
        }
        if (self.leaf(x).value as i128) + (delta as i128) < 0 {
            return Err(PsError::NegativeEntry { index: i });
        }
        let mut node = self.root.as_mut().expect("non-empty tree");
        let mut x = x;
        loop {
            match &mut node.kind {
                Kind::Bottom(leaves) => {
                    node.sums.update(x + 1, delta).expect("validated update");
                    leaves[x].value = leaves[x].value.wrapping_add_signed(delta);
                    return Ok(());
                }
                Kind::Inner { children, counts } => {
                    let (c, y) = find_child(counts, x);
                    node.sums.update(c + 1, delta).expect("validated update");
                    node = &mut children[c];
                    x = y;
                }
            }
        }
    }

    /// Replaces `Z[i]` by `t` and `Z[i] - t`; the new right entry carries
    /// `payload`.
    pub fn divide_with(&mut self, i: usize, t: u64, payload: P) -> Result<(), PsError> {
        let x = self.check_index(i)?;
        let value = self.leaf(x).value;
        if t > value {
            return Err(PsError::BadSplit { value, at: t });
        }
        let root = self.root.as_mut().expect("non-empty tree");
        if let Some(right) = divide_rec(root, x, t, payload) {
            self.grow_root(right);
        }
        self.len += 1;
        Ok(())
    }

    /// Inserts an entry of value `delta < 2^δ` before `Z[i]`; `i = len + 1`
    /// appends.
    pub fn insert_with(&mut self, i: usize, delta: u64, payload: P) -> Result<(), PsError> {
        if i == 0 || i > self.len + 1 {
            return Err(PsError::IndexOutOfRange {
                index: i,
                len: self.len,
            });
        }
        if delta >= self.config.delta_limit() {
            return Err(PsError::DeltaTooLarge {
                delta: delta as i64,
                bits: self.config.delta_bits(),
            });
        }
        let leaf = Leaf {
            value: delta,
            payload,
        };
        match self.root.as_mut() {
            None => self.root = Some(Node::bottom(self.config, vec![leaf])),
            Some(root) => {
                if let Some(right) = insert_rec(root, i - 1, leaf) {
                    self.grow_root(right);
                }
            }
        }
        self.len += 1;
        Ok(())
    }

    /// Replaces `Z[i]` and `Z[i + 1]` by their sum, keeping the payload of the
    /// left entry; returns the payload of the right one.
    pub fn merge(&mut self, i: usize) -> Result<P, PsError> {
        if i == 0 || i >= self.len {
            return Err(PsError::IndexOutOfRange {
                index: i,
                len: self.len,
            });
        }
        let root = self.root.as_mut().expect("non-empty tree");
        let payload = merge_rec(root, i - 1);
        self.len -= 1;
        self.shrink_root();
        Ok(payload)
    }

    /// Removes `Z[i]`, which must be smaller than `2^δ`; returns its payload.
    pub fn delete(&mut self, i: usize) -> Result<P, PsError> {
        let x = self.check_index(i)?;
        let value = self.leaf(x).value;
        if value >= self.config.delta_limit() {
            return Err(PsError::DeleteTooLarge {
                value,
                bits: self.config.delta_bits(),
            });
        }
        let root = self.root.as_mut().expect("non-empty tree");
        let leaf = delete_rec(root, x);
        self.len -= 1;
        self.shrink_root();
        Ok(leaf.payload)
    }

    fn grow_root(&mut self, right: Node<P>) {
        let left = self.root.take().expect("root present");
        self.root = Some(Node::inner(self.config, vec![left, right]));
    }

    fn shrink_root(&mut self) {
        loop {
            let Some(root) = self.root.as_mut() else {
                return;
            };
            match &mut root.kind {
                Kind::Bottom(leaves) if leaves.is_empty() => {
                    self.root = None;
                    return;
                }
                Kind::Inner { children, .. } if children.len() == 1 => {
                    let child = children.pop().expect("one child");
                    self.root = Some(child);
                }
                _ => return,
            }
        }
    }

    pub fn iter(&self) -> Iter<'_, P> {
        Iter {
            stack: self.root.iter().map(|n| (n, 0)).collect(),
        }
    }

    pub fn values(&self) -> Vec<u64> {
        self.iter().map(|(v, _)| v).collect()
    }

    /// Full structural check: degree bounds, equal leaf depth, node sums and
    /// leaf counts recomputed from the leaves, and every node's packed
    /// invariants.
    pub fn validate(&self) -> Result<(), String> {
        let Some(root) = &self.root else {
            return if self.len == 0 {
                Ok(())
            } else {
                Err("empty root with non-zero length".into())
            };
        };
        let bmin = self.config.capacity() / 2;
        let bmax = self.config.capacity();
        let mut leaf_depth = None;
        let (count, _) = validate_rec(root, 1, true, bmin, bmax, &mut leaf_depth)?;
        if count != self.len {
            return Err(format!("tree holds {count} leaves, length says {}", self.len));
        }
        if let Kind::Inner { children, .. } = &root.kind {
            if children.len() < 2 {
                return Err("inner root with a single child".into());
            }
        }
        let h = self.height() as f64;
        if self.len > 1 {
            let bound = ((self.len as f64).ln() / (bmin as f64).ln()).ceil() + 1.0;
            if h > bound {
                return Err(format!("height {h} exceeds bound {bound}"));
            }
        }
        Ok(())
    }
}

impl<P: Default> SumTree<P> {
    pub fn from_values(config: PsConfig, values: &[u64]) -> Result<Self, PsError> {
        SumTree::from_entries(config, values.iter().map(|&v| (v, P::default())))
    }

    pub fn divide(&mut self, i: usize, t: u64) -> Result<(), PsError> {
        self.divide_with(i, t, P::default())
    }

    pub fn insert(&mut self, i: usize, delta: u64) -> Result<(), PsError> {
        self.insert_with(i, delta, P::default())
    }
}

/// Splits `items` into `ceil(n / cap)` groups of nearly equal size.
fn chunk<T>(items: Vec<T>, cap: usize) -> Vec<Vec<T>> {
    let n = items.len();
    let groups = n.div_ceil(cap);
    let mut out = Vec::with_capacity(groups);
    let mut it = items.into_iter();
    for g in 0..groups {
        let size = n / groups + usize::from(g < n % groups);
        out.push(it.by_ref().take(size).collect());
    }
    out
}

fn divide_rec<P>(node: &mut Node<P>, x: usize, t: u64, payload: P) -> Option<Node<P>> {
    let cap = node.sums.config().capacity();
    match &mut node.kind {
        Kind::Bottom(leaves) => {
            let rest = leaves[x].value - t;
            leaves[x].value = t;
            leaves.insert(x + 1, Leaf { value: rest, payload });
            if !node.sums.is_full() {
                node.sums.divide(x + 1, t).expect("validated divide");
            }
        }
        Kind::Inner { children, counts } => {
            let (c, y) = find_child(counts, x);
            let split = divide_rec(&mut children[c], y, t, payload);
            counts[c] += 1;
            if let Some(right) = split {
                adopt_split(node, c, right);
            }
        }
    }
    (node.degree() > cap).then(|| node.split_off())
}

/// Records that child `c` split off `right`. The parent entry for `c` already
/// holds the combined total.
fn adopt_split<P>(node: &mut Node<P>, c: usize, right: Node<P>) {
    let Kind::Inner { children, counts } = &mut node.kind else {
        unreachable!("only inner nodes adopt children");
    };
    let left_total = children[c].total();
    counts[c] = children[c].leaf_count();
    counts.insert(c + 1, right.leaf_count());
    children.insert(c + 1, right);
    // A full node overflows here and is rebuilt by the split that follows.
    if !node.sums.is_full() {
        node.sums.divide(c + 1, left_total).expect("split keeps the total");
    }
}

fn insert_rec<P>(node: &mut Node<P>, x: usize, leaf: Leaf<P>) -> Option<Node<P>> {
    let cap = node.sums.config().capacity();
    let value = leaf.value;
    match &mut node.kind {
        Kind::Bottom(leaves) => {
            leaves.insert(x, leaf);
            if !node.sums.is_full() {
                node.sums.insert(x + 1, value).expect("validated insert");
            }
        }
        Kind::Inner { children, counts } => {
            let (c, y) = find_child(counts, x);
            let split = insert_rec(&mut children[c], y, leaf);
            counts[c] += 1;
            node.sums.update(c + 1, value as i64).expect("validated insert");
            if let Some(right) = split {
                adopt_split(node, c, right);
            }
        }
    }
    (node.degree() > cap).then(|| node.split_off())
}

fn delete_rec<P>(node: &mut Node<P>, x: usize) -> Leaf<P> {
    match &mut node.kind {
        Kind::Bottom(leaves) => {
            node.sums.delete(x + 1).expect("validated delete");
            leaves.remove(x)
        }
        Kind::Inner { children, counts } => {
            let (c, y) = find_child(counts, x);
            let leaf = delete_rec(&mut children[c], y);
            counts[c] -= 1;
            if leaf.value > 0 {
                node.sums
                    .update(c + 1, -(leaf.value as i64))
                    .expect("validated delete");
            }
            fix_underflow(node, c);
            leaf
        }
    }
}

fn merge_rec<P>(node: &mut Node<P>, x: usize) -> P {
    match &mut node.kind {
        Kind::Bottom(leaves) => {
            let right = leaves.remove(x + 1);
            leaves[x].value += right.value;
            node.sums.merge(x + 1).expect("adjacent leaves");
            right.payload
        }
        Kind::Inner { children, counts } => {
            let (c, y) = find_child(counts, x);
            if y + 1 < counts[c] {
                let payload = merge_rec(&mut children[c], y);
                counts[c] -= 1;
                fix_underflow(node, c);
                return payload;
            }
            // Leaf x closes child c and leaf x + 1 opens child c + 1.
            let right = remove_first(&mut children[c + 1]);
            add_to_last(&mut children[c], right.value);
            counts[c + 1] -= 1;
            let left_total = children[c].total();
            node.sums.merge(c + 1).expect("adjacent children");
            node.sums
                .divide(c + 1, left_total)
                .expect("boundary shift keeps the pair total");
            fix_underflow(node, c + 1);
            right.payload
        }
    }
}

fn remove_first<P>(node: &mut Node<P>) -> Leaf<P> {
    let leaf = match &mut node.kind {
        Kind::Bottom(leaves) => leaves.remove(0),
        Kind::Inner { children, counts } => {
            let leaf = remove_first(&mut children[0]);
            counts[0] -= 1;
            leaf
        }
    };
    if matches!(node.kind, Kind::Inner { .. }) {
        fix_underflow(node, 0);
    }
    node.rebuild_sums();
    leaf
}

fn add_to_last<P>(node: &mut Node<P>, value: u64) {
    match &mut node.kind {
        Kind::Bottom(leaves) => {
            let last = leaves.last_mut().expect("non-empty node");
            last.value += value;
        }
        Kind::Inner { children, .. } => {
            add_to_last(children.last_mut().expect("non-empty node"), value);
        }
    }
    node.rebuild_sums();
}

/// Restores the minimum degree of child `c` by borrowing from or merging with
/// a sibling.
fn fix_underflow<P>(node: &mut Node<P>, c: usize) {
    let config = *node.sums.config();
    let bmin = config.capacity() / 2;
    let Kind::Inner { children, counts } = &mut node.kind else {
        unreachable!("only inner nodes have children");
    };
    if children[c].degree() >= bmin || children.len() < 2 {
        return;
    }
    let (l, r) = if c + 1 < children.len() { (c, c + 1) } else { (c - 1, c) };
    let donor = if l == c { r } else { l };
    if children[donor].degree() > bmin {
        let (left, right) = two_mut(children, l, r);
        if donor == r {
            move_first_to_end(left, right);
        } else {
            move_last_to_front(left, right);
        }
        left.rebuild_sums();
        right.rebuild_sums();
        counts[l] = children[l].leaf_count();
        counts[r] = children[r].leaf_count();
        let left_total = children[l].total();
        node.sums.merge(l + 1).expect("adjacent children");
        node.sums.divide(l + 1, left_total).expect("borrow keeps the pair total");
    } else {
        let right = children.remove(r);
        counts.remove(r);
        let left = &mut children[l];
        match (&mut left.kind, right.kind) {
            (Kind::Bottom(a), Kind::Bottom(b)) => a.extend(b),
            (Kind::Inner { children: a, counts: ac }, Kind::Inner { children: b, counts: bc }) => {
                a.extend(b);
                ac.extend(bc);
            }
            _ => unreachable!("siblings share a level"),
        }
        left.rebuild_sums();
        counts[l] = children[l].leaf_count();
        node.sums.merge(l + 1).expect("adjacent children");
    }
}

fn two_mut<T>(v: &mut [T], a: usize, b: usize) -> (&mut T, &mut T) {
    debug_assert!(a < b);
    let (head, tail) = v.split_at_mut(b);
    (&mut head[a], &mut tail[0])
}

fn move_first_to_end<P>(left: &mut Node<P>, right: &mut Node<P>) {
    match (&mut left.kind, &mut right.kind) {
        (Kind::Bottom(a), Kind::Bottom(b)) => a.push(b.remove(0)),
        (Kind::Inner { children: a, counts: ac }, Kind::Inner { children: b, counts: bc }) => {
            a.push(b.remove(0));
            ac.push(bc.remove(0));
        }
        _ => unreachable!("siblings share a level"),
    }
}

fn move_last_to_front<P>(left: &mut Node<P>, right: &mut Node<P>) {
    match (&mut left.kind, &mut right.kind) {
        (Kind::Bottom(a), Kind::Bottom(b)) => b.insert(0, a.pop().expect("donor non-empty")),
        (Kind::Inner { children: a, counts: ac }, Kind::Inner { children: b, counts: bc }) => {
            b.insert(0, a.pop().expect("donor non-empty"));
            bc.insert(0, ac.pop().expect("donor non-empty"));
        }
        _ => unreachable!("siblings share a level"),
    }
}

fn validate_rec<P>(
    node: &Node<P>,
    depth: usize,
    is_root: bool,
    bmin: usize,
    bmax: usize,
    leaf_depth: &mut Option<usize>,
) -> Result<(usize, u64), String> {
    node.sums.check_invariants()?;
    let d = node.degree();
    if d > bmax || (!is_root && d < bmin) {
        return Err(format!("node at depth {depth} has degree {d}"));
    }
    let (count, totals): (usize, Vec<u64>) = match &node.kind {
        Kind::Bottom(leaves) => {
            match leaf_depth {
                Some(ld) if *ld != depth => return Err("leaves at unequal depth".into()),
                _ => *leaf_depth = Some(depth),
            }
            (leaves.len(), leaves.iter().map(|l| l.value).collect())
        }
        Kind::Inner { children, counts } => {
            if counts.len() != children.len() {
                return Err("count vector length mismatch".into());
            }
            let mut total_count = 0;
            let mut totals = Vec::new();
            for (child, &n) in children.iter().zip(counts) {
                let (cn, ct) = validate_rec(child, depth + 1, false, bmin, bmax, leaf_depth)?;
                if cn != n {
                    return Err(format!("stored count {n} but child holds {cn} leaves"));
                }
                total_count += cn;
                totals.push(ct);
            }
            (total_count, totals)
        }
    };
    if node.sums.values() != totals {
        return Err(format!("node sums {:?} disagree with children {:?}", node.sums.values(), totals));
    }
    Ok((count, totals.iter().sum()))
}

/// In-order iterator over `(value, &payload)`.
pub struct Iter<'a, P> {
    stack: Vec<(&'a Node<P>, usize)>,
}

impl<'a, P> Iterator for Iter<'a, P> {
    type Item = (u64, &'a P);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let (node, pos) = self.stack.last_mut()?;
            let node: &'a Node<P> = node;
            match &node.kind {
                Kind::Bottom(leaves) => {
                    if let Some(leaf) = leaves.get(*pos) {
                        *pos += 1;
                        return Some((leaf.value, &leaf.payload));
                    }
                    self.stack.pop();
                }
                Kind::Inner { children, .. } => {
                    if let Some(child) = children.get(*pos) {
                        *pos += 1;
                        self.stack.push((child, 0));
                    } else {
                        self.stack.pop();
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(values: &[u64]) -> SumTree {
        SumTree::from_values(PsConfig::default(), values).unwrap()
    }

    #[test]
    fn replicated_worked_sequence() {
        let base = [5u64, 1, 4, 7, 1, 1, 6, 5, 1, 1, 2, 2, 1, 3, 5, 10, 5, 10, 2];
        let values: Vec<u64> = base.iter().copied().cycle().take(base.len() * 100).collect();
        let t = tree(&values);
        t.validate().unwrap();
        assert_eq!(t.sum(4), Ok(17));
        assert_eq!(t.sum(23), Ok(72 + 17));
        assert_eq!(t.search(t.total()), Ok(t.len()));
        assert_eq!(t.search(73), Ok(20));
    }

    #[test]
    fn divide_down_to_ones() {
        let mut t = tree(&[10; 100]);
        let mut oracle = vec![10u64; 100];
        let mut i = 1;
        while i <= oracle.len() {
            if oracle[i - 1] > 1 {
                t.divide(i, 1).unwrap();
                let v = oracle[i - 1];
                oracle[i - 1] = 1;
                oracle.insert(i, v - 1);
                t.validate().unwrap();
                assert_eq!(t.sum(i + 1), Ok(oracle[..=i].iter().sum()));
            }
            i += 1;
        }
        assert_eq!(t.values(), vec![1; 1000]);
    }

    #[test]
    fn merge_fold_conserves_total() {
        let values: Vec<u64> = (0..1000).map(|i| (i * 7919 % 1000) as u64).collect();
        let total: u64 = values.iter().sum();
        let mut t = tree(&values);
        let mut k = 0;
        while t.len() > 1 {
            let i = 1 + (k * 31) % (t.len() - 1);
            t.merge(i).unwrap();
            k += 1;
            if k % 50 == 0 {
                t.validate().unwrap();
            }
        }
        assert_eq!(t.values(), vec![total]);
        assert_eq!(t.height(), 1);
    }

    #[test]
    fn build_from_empty_and_drain() {
        let mut t: SumTree<u32> = SumTree::new(PsConfig::default()).unwrap();
        for k in 0..200u32 {
            t.insert_with(t.len() + 1, (k % 4) as u64, k).unwrap();
            t.validate().unwrap();
        }
        assert_eq!(*t.payload(17).unwrap(), 16);
        let found = t.locate(5).unwrap();
        assert_eq!((found.index, found.before), (4, 3));
        while !t.is_empty() {
            let i = 1 + t.len() / 2;
            let i = i.min(t.len());
            t.update(i, -(t.get(i).unwrap() as i64)).unwrap();
            t.delete(i).unwrap();
            t.validate().unwrap();
        }
        assert_eq!(t.height(), 0);
        assert_eq!(t.total(), 0);
    }

    #[test]
    fn errors_mirror_small_structure() {
        let mut t = tree(&[5, 1]);
        assert!(matches!(t.sum(3), Err(PsError::IndexOutOfRange { .. })));
        assert!(matches!(t.search(7), Err(PsError::OutOfBounds { .. })));
        assert!(matches!(t.update(1, 4), Err(PsError::DeltaTooLarge { .. })));
        assert!(matches!(t.update(2, -2), Err(PsError::NegativeEntry { .. })));
        assert!(matches!(t.divide(2, 2), Err(PsError::BadSplit { .. })));
        assert!(matches!(t.merge(2), Err(PsError::IndexOutOfRange { .. })));
        assert!(matches!(t.delete(1), Err(PsError::DeleteTooLarge { .. })));
        assert!(matches!(t.insert(4, 1), Err(PsError::IndexOutOfRange { .. })));
        assert!(SumTree::<()>::new(PsConfig::new(2, 2, 16).unwrap()).is_err());
    }
}
