//! Block-level sparse attention mask construction.
//!
//! A [`PatternConfig`] names one of seven mask families and its numeric
//! parameters; [`build_mask`] turns it into a [`BlockMask`] for a given
//! context size. Masks are square boolean matrices at block granularity:
//! `allowed[q][k]` says whether query block `q` may attend key block `k`.
//! Every mask is causal (`k <= q`) and keeps the diagonal attendable.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Tokens per block when a config does not say otherwise.
pub const DEFAULT_BLOCK_TOKENS: usize = 256;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// A pattern configuration that cannot be built.
///
/// Every variant names the offending field so CLI surfaces can point at it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    /// A field required by the family is zero or empty.
    MissingField { family: Family, field: &'static str },
    /// A field that the family does not use carries a nonzero value.
    ForeignField { family: Family, field: &'static str },
    /// A field value is out of its valid range.
    InvalidField { field: &'static str, reason: String },
    /// `n_blocks` must be at least 1.
    EmptyContext,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MissingField { family, field } => {
                write!(f, "{family} requires a nonzero `{field}`")
            }
            Self::ForeignField { family, field } => {
                write!(f, "{family} does not use `{field}`; it must be zero or empty")
            }
            Self::InvalidField { field, reason } => write!(f, "invalid `{field}`: {reason}"),
            Self::EmptyContext => write!(f, "invalid `n_blocks`: must be at least 1"),
        }
    }
}

impl std::error::Error for ConfigError {}

// ---------------------------------------------------------------------------
// Pattern families and configuration
// ---------------------------------------------------------------------------

/// The supported static sparse attention families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Plain causal attention; every earlier block is attendable.
    #[serde(rename = "full", alias = "full_causal")]
    FullCausal,
    /// Local window of recent blocks plus a sink prefix.
    SlidingWindow,
    /// Local window, sink prefix, and global columns at equal strides.
    StrideSlash,
    /// Every `(dilation+1)`-th offset inside an enlarged window.
    Dilated,
    /// Union of segment-aligned dilated grids with per-segment ratios.
    #[serde(rename = "longnet")]
    LongNet,
    /// Local window, sink prefix, and every power-of-two offset.
    Power,
    /// Power-of-two offsets only (plus the mandatory diagonal).
    PowerPure,
}

impl Family {
    /// Canonical lowercase name, used in CSV output and CLI flags.
    pub fn name(&self) -> &'static str {
        match self {
            Self::FullCausal => "full",
            Self::SlidingWindow => "sliding_window",
            Self::StrideSlash => "stride_slash",
            Self::Dilated => "dilated",
            Self::LongNet => "longnet",
            Self::Power => "power",
            Self::PowerPure => "power_pure",
        }
    }

    /// Parse a family name as accepted by the CLI.
    pub fn parse(name: &str) -> Result<Self, ConfigError> {
        match name {
            "full" | "full_causal" => Ok(Self::FullCausal),
            "sliding_window" | "sliding" => Ok(Self::SlidingWindow),
            "stride_slash" | "stride" => Ok(Self::StrideSlash),
            "dilated" => Ok(Self::Dilated),
            "longnet" => Ok(Self::LongNet),
            "power" => Ok(Self::Power),
            "power_pure" => Ok(Self::PowerPure),
            other => Err(ConfigError::InvalidField {
                field: "family",
                reason: format!("unknown family `{other}`"),
            }),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn default_block_tokens() -> usize {
    DEFAULT_BLOCK_TOKENS
}

/// One pattern family plus its numeric parameters.
///
/// Fields that a family does not use must stay zero/empty; [`PatternConfig::validate`]
/// rejects contradictory mixes. The JSON form leaves unused fields out entirely:
///
/// ```json
/// {"family": "power", "window_blocks": 5, "sink_blocks": 1, "slash_blocks": 4}
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternConfig {
    pub family: Family,
    /// Local-window width in blocks; offsets `0..window_blocks` are attendable.
    #[serde(default)]
    pub window_blocks: usize,
    /// Number of initial blocks every query may attend.
    #[serde(default)]
    pub sink_blocks: usize,
    /// Extra global columns (stride_slash) or the nominal extra budget (power).
    #[serde(default)]
    pub slash_blocks: usize,
    /// Gap between attended offsets (dilated).
    #[serde(default)]
    pub dilation_blocks: usize,
    /// `(segment_length_blocks, dilation_ratio)` pairs (longnet).
    #[serde(default)]
    pub segments: Vec<(usize, usize)>,
    /// Tokens per block; only the numeric attention layer looks inside blocks.
    #[serde(default = "default_block_tokens")]
    pub block_tokens: usize,
}

impl PatternConfig {
    fn bare(family: Family) -> Self {
        Self {
            family,
            window_blocks: 0,
            sink_blocks: 0,
            slash_blocks: 0,
            dilation_blocks: 0,
            segments: Vec::new(),
            block_tokens: DEFAULT_BLOCK_TOKENS,
        }
    }

    /// Plain causal attention.
    pub fn full_causal() -> Self {
        Self::bare(Family::FullCausal)
    }

    /// Local window plus sink prefix.
    pub fn sliding_window(window_blocks: usize, sink_blocks: usize) -> Self {
        Self { window_blocks, sink_blocks, ..Self::bare(Family::SlidingWindow) }
    }

    /// Local window, sink prefix, and `slash_blocks` global columns.
    pub fn stride_slash(window_blocks: usize, sink_blocks: usize, slash_blocks: usize) -> Self {
        Self { window_blocks, sink_blocks, slash_blocks, ..Self::bare(Family::StrideSlash) }
    }

    /// `window_blocks` attended offsets spaced `dilation_blocks + 1` apart.
    pub fn dilated(window_blocks: usize, dilation_blocks: usize) -> Self {
        Self { window_blocks, dilation_blocks, ..Self::bare(Family::Dilated) }
    }

    /// Union of segment grids; each pair is `(segment_length, ratio)`.
    pub fn longnet(segments: Vec<(usize, usize)>) -> Self {
        Self { segments, ..Self::bare(Family::LongNet) }
    }

    /// Local window, sink prefix, and all power-of-two offsets.
    pub fn power(window_blocks: usize, sink_blocks: usize, slash_blocks: usize) -> Self {
        Self { window_blocks, sink_blocks, slash_blocks, ..Self::bare(Family::Power) }
    }

    /// Power-of-two offsets only.
    pub fn power_pure() -> Self {
        Self::bare(Family::PowerPure)
    }

    /// Override the tokens-per-block value.
    #[must_use]
    pub fn with_block_tokens(mut self, block_tokens: usize) -> Self {
        self.block_tokens = block_tokens;
        self
    }

    /// Check family/parameter consistency.
    pub fn validate(&self) -> Result<(), ConfigError> {
        use Family::*;
        if self.block_tokens == 0 {
            return Err(ConfigError::InvalidField {
                field: "block_tokens",
                reason: "must be at least 1".into(),
            });
        }
        let requires_window = matches!(self.family, SlidingWindow | StrideSlash | Dilated | Power);
        if requires_window && self.window_blocks == 0 {
            return Err(ConfigError::MissingField { family: self.family, field: "window_blocks" });
        }
        if !requires_window && self.window_blocks != 0 {
            return Err(ConfigError::ForeignField { family: self.family, field: "window_blocks" });
        }
        let uses_sink = matches!(self.family, SlidingWindow | StrideSlash | Power);
        if !uses_sink && self.sink_blocks != 0 {
            return Err(ConfigError::ForeignField { family: self.family, field: "sink_blocks" });
        }
        let uses_slash = matches!(self.family, StrideSlash | Power);
        if !uses_slash && self.slash_blocks != 0 {
            return Err(ConfigError::ForeignField { family: self.family, field: "slash_blocks" });
        }
        if self.family != Dilated && self.dilation_blocks != 0 {
            return Err(ConfigError::ForeignField {
                family: self.family,
                field: "dilation_blocks",
            });
        }
        if self.family == LongNet {
            if self.segments.is_empty() {
                return Err(ConfigError::MissingField { family: self.family, field: "segments" });
            }
            for &(w, r) in &self.segments {
                if w == 0 || r == 0 {
                    return Err(ConfigError::InvalidField {
                        field: "segments",
                        reason: format!(
                            "segment ({w}, {r}) invalid: length and ratio must be at least 1"
                        ),
                    });
                }
            }
        } else if !self.segments.is_empty() {
            return Err(ConfigError::ForeignField { family: self.family, field: "segments" });
        }
        Ok(())
    }

    /// True when the per-row budget meets or exceeds the context, so the
    /// pattern would not actually be sparse at this size. Such masks are
    /// still built; callers may want to warn.
    pub fn is_degenerate_for(&self, n_blocks: usize) -> bool {
        self.window_blocks + self.sink_blocks + self.slash_blocks > n_blocks
    }

    /// The slash-column stride used by `stride_slash` at a given context size.
    pub fn slash_stride(&self, n_blocks: usize) -> usize {
        (n_blocks.div_ceil(self.slash_blocks + 1)).max(1)
    }
}

// ---------------------------------------------------------------------------
// BlockMask
// ---------------------------------------------------------------------------

/// A square boolean adjacency matrix over blocks: `allowed[q][k]` iff query
/// block `q` may attend key block `k`. Always causal, diagonal always true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMask {
    n_blocks: usize,
    allowed: Vec<bool>,
}

impl BlockMask {
    /// Side length in blocks.
    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    /// Whether query block `q` may attend key block `k`.
    pub fn is_allowed(&self, q: usize, k: usize) -> bool {
        assert!(q < self.n_blocks && k < self.n_blocks, "block index out of range");
        self.allowed[q * self.n_blocks + k]
    }

    /// The full row for query block `q`.
    pub fn row(&self, q: usize) -> &[bool] {
        assert!(q < self.n_blocks, "block index {q} out of range for {} blocks", self.n_blocks);
        &self.allowed[q * self.n_blocks..(q + 1) * self.n_blocks]
    }

    /// Number of attendable key blocks in row `q`.
    pub fn row_budget(&self, q: usize) -> usize {
        self.row(q).iter().filter(|&&a| a).count()
    }

    /// Total number of allowed entries.
    pub fn allowed_count(&self) -> usize {
        self.allowed.iter().filter(|&&a| a).count()
    }

    /// Iterator over allowed `(q, k)` pairs in row-major order.
    pub fn allowed_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n_blocks;
        self.allowed
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(move |(idx, _)| (idx / n, idx % n))
    }

    /// Masked-out fraction relative to the chosen denominator.
    pub fn sparsity(&self, denominator: SparsityDenominator) -> f64 {
        let n = self.n_blocks as f64;
        let denom = match denominator {
            SparsityDenominator::FullSquare => n * n,
            SparsityDenominator::CausalTriangle => n * (n + 1.0) / 2.0,
        };
        1.0 - self.allowed_count() as f64 / denom
    }

    /// Render as a plain (P1) portable bitmap, one pixel per block,
    /// black (`1`) = allowed. Output is deterministic byte-for-byte.
    pub fn to_pbm(&self) -> String {
        let n = self.n_blocks;
        let mut out = String::with_capacity(16 + n * (2 * n + 1));
        out.push_str("P1\n");
        out.push_str(&format!("{n} {n}\n"));
        for q in 0..n {
            for k in 0..n {
                if k > 0 {
                    out.push(' ');
                }
                out.push(if self.is_allowed(q, k) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

/// Denominator choice for [`BlockMask::sparsity`]. Both are reported because
/// "sparsity" is quoted against either base in the literature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparsityDenominator {
    /// All `n * n` entries.
    FullSquare,
    /// The `n * (n + 1) / 2` causal entries.
    CausalTriangle,
}

// ---------------------------------------------------------------------------
// Mask construction
// ---------------------------------------------------------------------------

/// Build the block mask for `config` over `n_blocks` blocks.
///
/// The family rules are applied with `d = q - k` on 0-based indices, then
/// intersected with causality; the diagonal is forced attendable for every
/// family. The same `(config, n_blocks)` always yields an identical mask.
pub fn build_mask(config: &PatternConfig, n_blocks: usize) -> Result<BlockMask, ConfigError> {
    config.validate()?;
    if n_blocks == 0 {
        return Err(ConfigError::EmptyContext);
    }
    let mut allowed = vec![false; n_blocks * n_blocks];
    for q in 0..n_blocks {
        let row = &mut allowed[q * n_blocks..(q + 1) * n_blocks];
        for (k, slot) in row.iter_mut().enumerate().take(q + 1) {
            *slot = k == q || family_rule(config, n_blocks, q, k);
        }
    }
    Ok(BlockMask { n_blocks, allowed })
}

fn family_rule(config: &PatternConfig, n_blocks: usize, q: usize, k: usize) -> bool {
    let d = q - k;
    match config.family {
        Family::FullCausal => true,
        Family::SlidingWindow => d < config.window_blocks || k < config.sink_blocks,
        Family::StrideSlash => {
            let stride = config.slash_stride(n_blocks);
            d < config.window_blocks
                || k < config.sink_blocks
                || (k.is_multiple_of(stride) && k >= config.sink_blocks)
        }
        Family::Dilated => {
            let step = config.dilation_blocks + 1;
            d < config.window_blocks * step && d.is_multiple_of(step)
        }
        Family::LongNet => config.segments.iter().any(|&(w, r)| {
            let start = (q / w) * w;
            k >= start && (q - start).is_multiple_of(r) && (k - start).is_multiple_of(r)
        }),
        Family::Power => {
            d < config.window_blocks || k < config.sink_blocks || d.is_power_of_two()
        }
        Family::PowerPure => d == 0 || d.is_power_of_two(),
    }
}
