//! Receptive-field analysis of block masks as DAGs.
//!
//! A mask row is an out-edge set: query block `q` has an edge to every key
//! block it may attend. Multi-layer information flow is then plain graph
//! reachability, and the per-step reachable sets from a source block give
//! the layer-wise receptive field.

use std::fmt;

use crate::patterns::BlockMask;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    /// A block index is not inside the mask.
    IndexOutOfRange { index: usize, n_blocks: usize },
    /// `target > source` is trivially unreachable under causality; calling
    /// with one is almost certainly a bug, so it is signaled distinctly.
    TargetAfterSource { source: usize, target: usize },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IndexOutOfRange { index, n_blocks } => {
                write!(f, "block index {index} out of range for {n_blocks} blocks")
            }
            Self::TargetAfterSource { source, target } => {
                write!(f, "target {target} is after source {source}; causal masks cannot reach it")
            }
        }
    }
}

impl std::error::Error for GraphError {}

// ---------------------------------------------------------------------------
// BlockSet
// ---------------------------------------------------------------------------

/// A set of block indices backed by a fixed-width bitmap.
#[derive(Clone)]
pub struct BlockSet {
    n_blocks: usize,
    words: Vec<u64>,
}

impl PartialEq for BlockSet {
    /// Membership equality; capacity does not matter.
    fn eq(&self, other: &Self) -> bool {
        let words = self.words.len().max(other.words.len());
        (0..words).all(|i| {
            self.words.get(i).copied().unwrap_or(0) == other.words.get(i).copied().unwrap_or(0)
        })
    }
}

impl Eq for BlockSet {}

impl BlockSet {
    pub fn empty(n_blocks: usize) -> Self {
        Self { n_blocks, words: vec![0; n_blocks.div_ceil(64)] }
    }

    pub fn singleton(n_blocks: usize, block: usize) -> Self {
        let mut set = Self::empty(n_blocks);
        set.insert(block);
        set
    }

    pub fn capacity(&self) -> usize {
        self.n_blocks
    }

    pub fn insert(&mut self, block: usize) {
        assert!(block < self.n_blocks, "block {block} out of range");
        self.words[block / 64] |= 1 << (block % 64);
    }

    pub fn contains(&self, block: usize) -> bool {
        block < self.n_blocks && self.words[block / 64] & (1 << (block % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// In-place union; both sets must share a capacity.
    pub fn union_with(&mut self, other: &Self) {
        assert_eq!(self.n_blocks, other.n_blocks, "capacity mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// Ascending iterator over members.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_blocks).filter(move |&b| self.contains(b))
    }

    /// Members as a sorted vector.
    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for BlockSet {
    /// Renders as the member list, which keeps assertion failures readable.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for BlockSet {
    /// Collects into a set sized to hold the largest member.
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let members: Vec<usize> = iter.into_iter().collect();
        let cap = members.iter().max().map_or(0, |&m| m + 1);
        let mut set = Self::empty(cap);
        for m in members {
            set.insert(m);
        }
        set
    }
}

// ---------------------------------------------------------------------------
// Reachability profile
// ---------------------------------------------------------------------------

/// Per-step reachable block sets from a source block, with coverage ratios.
///
/// `steps[k]` is the set reachable within `k` attention steps (`steps[0]` is
/// the source itself); `coverage[k]` is `|steps[k]| / n_blocks`. Sets are
/// monotone and stabilize at the transitive-closure row of the source.
#[derive(Debug, Clone)]
pub struct ReachabilityProfile {
    pub source: usize,
    pub steps: Vec<BlockSet>,
    pub coverage: Vec<f64>,
}

impl ReachabilityProfile {
    /// First step index at which the sets stop growing.
    pub fn fixpoint_step(&self) -> usize {
        for k in 1..self.steps.len() {
            if self.steps[k] == self.steps[k - 1] {
                return k - 1;
            }
        }
        self.steps.len().saturating_sub(1)
    }

    /// The stabilized reachable set (the last computed step).
    pub fn fixpoint(&self) -> &BlockSet {
        self.steps.last().expect("profile always holds step 0")
    }
}

fn check_index(index: usize, n_blocks: usize) -> Result<(), GraphError> {
    if index >= n_blocks {
        return Err(GraphError::IndexOutOfRange { index, n_blocks });
    }
    Ok(())
}

/// Mask rows packed into bitmap words so frontier expansion is a word-wise
/// OR per member instead of a column scan.
struct RowTable {
    words_per_row: usize,
    bits: Vec<u64>,
}

impl RowTable {
    fn new(mask: &BlockMask) -> Self {
        let n = mask.n_blocks();
        let words_per_row = n.div_ceil(64);
        let mut bits = vec![0u64; n * words_per_row];
        for q in 0..n {
            for (k, &allowed) in mask.row(q).iter().enumerate() {
                if allowed {
                    bits[q * words_per_row + k / 64] |= 1 << (k % 64);
                }
            }
        }
        Self { words_per_row, bits }
    }

    /// One frontier expansion: everything in `set` plus all out-neighbors.
    fn expand(&self, set: &BlockSet) -> BlockSet {
        let mut next = set.clone();
        for q in set.iter() {
            let row = &self.bits[q * self.words_per_row..(q + 1) * self.words_per_row];
            for (word, &row_word) in next.words.iter_mut().zip(row) {
                *word |= row_word;
            }
        }
        next
    }
}

/// Reachable block sets from `source` for steps `0..=max_steps`.
pub fn reach_profile(
    mask: &BlockMask,
    source: usize,
    max_steps: usize,
) -> Result<ReachabilityProfile, GraphError> {
    let n = mask.n_blocks();
    check_index(source, n)?;
    let table = RowTable::new(mask);
    let mut steps = Vec::with_capacity(max_steps + 1);
    steps.push(BlockSet::singleton(n, source));
    for k in 1..=max_steps {
        let next = table.expand(&steps[k - 1]);
        steps.push(next);
    }
    let coverage = steps.iter().map(|s| s.len() as f64 / n as f64).collect();
    Ok(ReachabilityProfile { source, steps, coverage })
}

/// Run frontier expansion to its fixpoint, returning the set per step.
/// The last two entries are equal when the source has any out-edge beyond
/// itself; a lone self-loop yields the single step-0 entry.
fn reach_until_fixpoint(table: &RowTable, n: usize, source: usize) -> Vec<BlockSet> {
    let mut steps = vec![BlockSet::singleton(n, source)];
    loop {
        let next = table.expand(steps.last().unwrap());
        if next == *steps.last().unwrap() {
            return steps;
        }
        steps.push(next);
    }
}

/// BFS shortest path length from `source` to `target` along out-edges.
/// `Ok(None)` means the target is never reached; `target > source` is a
/// distinct error since causality makes it structurally impossible.
pub fn shortest_depth(
    mask: &BlockMask,
    source: usize,
    target: usize,
) -> Result<Option<usize>, GraphError> {
    let n = mask.n_blocks();
    check_index(source, n)?;
    check_index(target, n)?;
    if target > source {
        return Err(GraphError::TargetAfterSource { source, target });
    }
    if target == source {
        return Ok(Some(0));
    }
    let table = RowTable::new(mask);
    let mut seen = BlockSet::singleton(n, source);
    let mut depth = 0;
    loop {
        let next = table.expand(&seen);
        if next == seen {
            return Ok(None);
        }
        depth += 1;
        if next.contains(target) {
            return Ok(Some(depth));
        }
        seen = next;
    }
}

/// Blocks at or before `source` that no number of steps can reach.
pub fn coverage_gaps(mask: &BlockMask, source: usize) -> Result<BlockSet, GraphError> {
    let n = mask.n_blocks();
    check_index(source, n)?;
    let table = RowTable::new(mask);
    let reachable = reach_until_fixpoint(&table, n, source);
    let closure = reachable.last().unwrap();
    let mut gaps = BlockSet::empty(n);
    for b in 0..=source {
        if !closure.contains(b) {
            gaps.insert(b);
        }
    }
    Ok(gaps)
}

/// `(k, |reachable set|)` pairs from step 0 up to the fixpoint.
pub fn depth_growth_curve(
    mask: &BlockMask,
    source: usize,
) -> Result<Vec<(usize, usize)>, GraphError> {
    let n = mask.n_blocks();
    check_index(source, n)?;
    let table = RowTable::new(mask);
    let steps = reach_until_fixpoint(&table, n, source);
    Ok(steps.iter().enumerate().map(|(k, s)| (k, s.len())).collect())
}
