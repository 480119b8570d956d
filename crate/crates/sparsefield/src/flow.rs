//! Deterministic influence propagation through multi-layer mask stacks.
//!
//! A [`LayerSchedule`] assigns one pattern to each layer. Starting from a
//! one-hot indicator at a source block, each layer adds a uniform-attention
//! average of the blocks its mask lets each query see, on top of a residual
//! copy. All quantities stay nonnegative, so the support of the resulting
//! [`InfluenceField`] is exactly layered reachability: block `q` carries
//! source information after layer `l` iff some attend-or-stay path leads
//! from the source to `q` through masks `0..l` in order. That makes the
//! field a checkable stand-in for probing where information can possibly
//! live, and [`retrievability`] its block-level passkey oracle.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::BlockSet;
use crate::patterns::{build_mask, BlockMask, ConfigError, PatternConfig};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowError {
    /// Schedules need at least one layer.
    EmptySchedule,
    /// A layer's config failed validation.
    BadLayer { layer: usize, source: ConfigError },
    /// Layers must agree on tokens per block.
    MixedBlockTokens { layer: usize, expected: usize, got: usize },
    /// A block index is outside the context.
    BlockOutOfRange { block: usize, n_blocks: usize },
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptySchedule => write!(f, "schedule has no layers"),
            Self::BadLayer { layer, source } => write!(f, "layer {layer}: {source}"),
            Self::MixedBlockTokens { layer, expected, got } => {
                write!(f, "layer {layer}: block_tokens {got} differs from {expected}")
            }
            Self::BlockOutOfRange { block, n_blocks } => {
                write!(f, "block {block} out of range for {n_blocks} blocks")
            }
        }
    }
}

impl std::error::Error for FlowError {}

// ---------------------------------------------------------------------------
// LayerSchedule
// ---------------------------------------------------------------------------

/// An ordered assignment of one [`PatternConfig`] per layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSchedule {
    layers: Vec<PatternConfig>,
}

impl LayerSchedule {
    /// Validate and wrap a per-layer config list.
    pub fn new(layers: Vec<PatternConfig>) -> Result<Self, FlowError> {
        if layers.is_empty() {
            return Err(FlowError::EmptySchedule);
        }
        let block_tokens = layers[0].block_tokens;
        for (layer, config) in layers.iter().enumerate() {
            config.validate().map_err(|source| FlowError::BadLayer { layer, source })?;
            if config.block_tokens != block_tokens {
                return Err(FlowError::MixedBlockTokens {
                    layer,
                    expected: block_tokens,
                    got: config.block_tokens,
                });
            }
        }
        Ok(Self { layers })
    }

    /// The same pattern at every layer.
    pub fn uniform(config: PatternConfig, depth: usize) -> Result<Self, FlowError> {
        Self::new(vec![config; depth])
    }

    /// A repeated sparse pattern with `full_count` full-attention layers in
    /// each group of `group` layers. `last` places the full layers at the
    /// end of each group, otherwise at the start; a final partial group gets
    /// full layers in the same relative positions.
    pub fn hybrid(
        sparse: PatternConfig,
        depth: usize,
        group: usize,
        full_count: usize,
        last: bool,
    ) -> Result<Self, FlowError> {
        assert!(group >= 1, "group length must be at least 1");
        let block_tokens = sparse.block_tokens;
        let full = PatternConfig::full_causal().with_block_tokens(block_tokens);
        let layers = (0..depth)
            .map(|l| {
                let pos = l % group;
                let is_full = if last {
                    pos + full_count >= group
                } else {
                    pos < full_count
                };
                if is_full { full.clone() } else { sparse.clone() }
            })
            .collect();
        Self::new(layers)
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[PatternConfig] {
        &self.layers
    }

    pub fn block_tokens(&self) -> usize {
        self.layers[0].block_tokens
    }

    /// Build each layer's mask, sharing masks between identical configs.
    pub fn masks(&self, n_blocks: usize) -> Result<Vec<BlockMask>, ConfigError> {
        let mut cache: HashMap<&PatternConfig, BlockMask> = HashMap::new();
        let mut masks = Vec::with_capacity(self.layers.len());
        for config in &self.layers {
            if !cache.contains_key(config) {
                cache.insert(config, build_mask(config, n_blocks)?);
            }
            masks.push(cache[config].clone());
        }
        Ok(masks)
    }
}

// ---------------------------------------------------------------------------
// InfluenceField
// ---------------------------------------------------------------------------

/// Layer-by-layer nonnegative influence values, `values[l][block]` for
/// `l = 0..=depth`; row 0 is the one-hot input indicator.
#[derive(Debug, Clone)]
pub struct InfluenceField {
    pub source: usize,
    pub values: Vec<Vec<f64>>,
}

impl InfluenceField {
    pub fn n_blocks(&self) -> usize {
        self.values[0].len()
    }

    /// Blocks with positive value after layer `l`.
    pub fn support(&self, l: usize) -> BlockSet {
        let mut set = BlockSet::empty(self.n_blocks());
        for (b, &v) in self.values[l].iter().enumerate() {
            if v > 0.0 {
                set.insert(b);
            }
        }
        set
    }

    /// First layer index whose value at `block` is positive, if any.
    pub fn first_positive_layer(&self, block: usize) -> Option<usize> {
        self.values.iter().position(|row| row[block] > 0.0)
    }
}

/// Propagate a one-hot indicator at `source_block` through the schedule:
/// `values[l+1][q] = values[l][q] + mean over allowed k of values[l][k]`,
/// the mean taken over layer `l`'s mask row for `q` (uniform attention plus
/// a residual copy).
pub fn propagate_influence(
    schedule: &LayerSchedule,
    n_blocks: usize,
    source_block: usize,
) -> Result<InfluenceField, FlowError> {
    if source_block >= n_blocks {
        return Err(FlowError::BlockOutOfRange { block: source_block, n_blocks });
    }
    let masks = schedule
        .masks(n_blocks)
        .map_err(|source| FlowError::BadLayer { layer: 0, source })?;
    let mut values = Vec::with_capacity(schedule.depth() + 1);
    let mut row = vec![0.0f64; n_blocks];
    row[source_block] = 1.0;
    values.push(row);
    for mask in &masks {
        let prev = values.last().unwrap();
        let mut next = prev.clone();
        for (q, slot) in next.iter_mut().enumerate() {
            let mut sum = 0.0f64;
            let mut budget = 0usize;
            for (k, &allowed) in mask.row(q).iter().enumerate() {
                if allowed {
                    sum += prev[k];
                    budget += 1;
                }
            }
            *slot += sum / budget as f64;
        }
        values.push(next);
    }
    Ok(InfluenceField { source: source_block, values })
}

// ---------------------------------------------------------------------------
// Retrievability
// ---------------------------------------------------------------------------

/// For each block, the smallest layer count within which its information
/// reaches the last block, or `None` when the full stack never delivers it.
///
/// Step `l` uses layer `l`'s mask: starting from the passkey block, each
/// layer extends the carrier set with every block whose mask row touches it
/// (attend-or-stay), and a block is retrievable within `k` layers when the
/// last block is a carrier after step `k`. The carrier sets are exactly the
/// influence-field supports.
pub fn retrieval_depths(
    schedule: &LayerSchedule,
    n_blocks: usize,
) -> Result<Vec<Option<usize>>, FlowError> {
    let masks = schedule
        .masks(n_blocks)
        .map_err(|source| FlowError::BadLayer { layer: 0, source })?;
    let last = n_blocks - 1;
    let mut depths = vec![None; n_blocks];
    for (passkey, depth) in depths.iter_mut().enumerate() {
        let mut carriers = BlockSet::singleton(n_blocks, passkey);
        if passkey == last {
            *depth = Some(0);
            continue;
        }
        for (l, mask) in masks.iter().enumerate() {
            let mut next = carriers.clone();
            for q in 0..n_blocks {
                if !next.contains(q)
                    && mask.row(q).iter().enumerate().any(|(k, &a)| a && carriers.contains(k))
                {
                    next.insert(q);
                }
            }
            carriers = next;
            if carriers.contains(last) {
                *depth = Some(l + 1);
                break;
            }
        }
    }
    Ok(depths)
}

/// Whether the last block can see `passkey_block`'s information after the
/// whole stack runs.
pub fn retrievability(
    schedule: &LayerSchedule,
    n_blocks: usize,
    passkey_block: usize,
) -> Result<bool, FlowError> {
    if passkey_block >= n_blocks {
        return Err(FlowError::BlockOutOfRange { block: passkey_block, n_blocks });
    }
    let depths = retrieval_depths(schedule, n_blocks)?;
    Ok(depths[passkey_block].is_some_and(|d| d <= schedule.depth()))
}

/// `(k, fraction of blocks retrievable within k layers)` for `k = 1..=depth`.
pub fn retrievability_curve(
    schedule: &LayerSchedule,
    n_blocks: usize,
) -> Result<Vec<(usize, f64)>, FlowError> {
    let depths = retrieval_depths(schedule, n_blocks)?;
    let curve = (1..=schedule.depth())
        .map(|k| {
            let reached = depths.iter().filter(|d| d.is_some_and(|v| v <= k)).count();
            (k, reached as f64 / n_blocks as f64)
        })
        .collect();
    Ok(curve)
}
