//! Desk-scale numeric attention.
//!
//! Two forward passes over the same problem: [`dense_attention`] walks a
//! token-level mask row by row (the reference), and [`block_sparse_attention`]
//! visits only the blocks a [`BlockMask`] allows, skipping everything else.
//! Both accumulate scores, the softmax normalizer, and the weighted value
//! sums in `f64` regardless of the element type, so their outputs agree to
//! accumulation tolerance and the sparse path's only freedom is which blocks
//! it visits. A [`CostReport`] counts the score entries actually computed.

use std::fmt;

use crate::patterns::BlockMask;
use crate::rng::SplitMix64;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttentionError {
    /// A tensor's length does not match `heads * seq_len * head_dim`.
    TensorShape { tensor: &'static str, expected: usize, got: usize },
    /// A tensor holds a NaN or infinity.
    NonFinite { tensor: &'static str },
    /// The token mask's side length does not match the problem.
    MaskShape { expected: usize, got: usize },
    /// The token mask allows a position above the diagonal.
    MaskNotCausal { row: usize, col: usize },
    /// A query row with no attendable position has no defined softmax.
    EmptyRow { row: usize },
    /// `seq_len` is not `n_blocks * block_tokens` for any whole block size.
    BlockShape { seq_len: usize, n_blocks: usize },
    /// Dimensions must all be at least 1.
    EmptyDimension { field: &'static str },
}

impl fmt::Display for AttentionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TensorShape { tensor, expected, got } => {
                write!(f, "tensor `{tensor}` has {got} elements, expected {expected}")
            }
            Self::NonFinite { tensor } => write!(f, "tensor `{tensor}` holds non-finite values"),
            Self::MaskShape { expected, got } => {
                write!(f, "token mask is {got} wide, problem needs {expected}")
            }
            Self::MaskNotCausal { row, col } => {
                write!(f, "token mask allows acausal position ({row}, {col})")
            }
            Self::EmptyRow { row } => {
                write!(f, "query row {row} attends nothing; softmax is undefined")
            }
            Self::BlockShape { seq_len, n_blocks } => {
                write!(f, "seq_len {seq_len} is not a multiple of {n_blocks} blocks")
            }
            Self::EmptyDimension { field } => write!(f, "`{field}` must be at least 1"),
        }
    }
}

impl std::error::Error for AttentionError {}

// ---------------------------------------------------------------------------
// Elements
// ---------------------------------------------------------------------------

/// Storage element for attention tensors. Accumulation always happens in
/// `f64`; this trait only moves values in and out of storage precision.
pub trait Element: Copy + PartialEq + fmt::Debug + 'static {
    const NAME: &'static str;
    fn from_f64(value: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Element for f32 {
    const NAME: &'static str = "single";
    fn from_f64(value: f64) -> Self {
        value as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Element for f64 {
    const NAME: &'static str = "double";
    fn from_f64(value: f64) -> Self {
        value
    }
    fn to_f64(self) -> f64 {
        self
    }
}

// ---------------------------------------------------------------------------
// Problem
// ---------------------------------------------------------------------------

/// Query/key/value tensors of shape `[heads, seq_len, head_dim]` (row-major,
/// head-major) plus the `1/sqrt(head_dim)` score scale.
#[derive(Debug, Clone)]
pub struct AttentionProblem<T: Element> {
    pub seq_len: usize,
    pub heads: usize,
    pub head_dim: usize,
    pub q: Vec<T>,
    pub k: Vec<T>,
    pub v: Vec<T>,
    pub scale: f64,
}

impl<T: Element> AttentionProblem<T> {
    pub fn new(
        seq_len: usize,
        heads: usize,
        head_dim: usize,
        q: Vec<T>,
        k: Vec<T>,
        v: Vec<T>,
    ) -> Result<Self, AttentionError> {
        for (field, value) in [("seq_len", seq_len), ("heads", heads), ("head_dim", head_dim)] {
            if value == 0 {
                return Err(AttentionError::EmptyDimension { field });
            }
        }
        let expected = heads * seq_len * head_dim;
        for (tensor, data) in [("q", &q), ("k", &k), ("v", &v)] {
            if data.len() != expected {
                return Err(AttentionError::TensorShape { tensor, expected, got: data.len() });
            }
            if data.iter().any(|x| !x.to_f64().is_finite()) {
                return Err(AttentionError::NonFinite { tensor });
            }
        }
        let scale = 1.0 / (head_dim as f64).sqrt();
        Ok(Self { seq_len, heads, head_dim, q, k, v, scale })
    }

    /// Deterministic standard-normal problem. The generator fills `q`, then
    /// `k`, then `v`, each head-major, with consecutive draws from
    /// [`SplitMix64::next_normal`] seeded by `seed`.
    pub fn random(seq_len: usize, heads: usize, head_dim: usize, seed: u64) -> Self {
        let len = heads * seq_len * head_dim;
        let mut rng = SplitMix64::new(seed);
        let mut tensor = || -> Vec<T> { (0..len).map(|_| T::from_f64(rng.next_normal())).collect() };
        let q = tensor();
        let k = tensor();
        let v = tensor();
        Self::new(seq_len, heads, head_dim, q, k, v).expect("generated shapes are consistent")
    }

    /// Flat offset of `(head, pos)` in any of the three tensors.
    fn offset(&self, head: usize, pos: usize) -> usize {
        (head * self.seq_len + pos) * self.head_dim
    }

    fn dot_qk(&self, head: usize, i: usize, j: usize) -> f64 {
        let qi = self.offset(head, i);
        let kj = self.offset(head, j);
        let mut acc = 0.0f64;
        for d in 0..self.head_dim {
            acc += self.q[qi + d].to_f64() * self.k[kj + d].to_f64();
        }
        acc * self.scale
    }
}

// ---------------------------------------------------------------------------
// Token mask
// ---------------------------------------------------------------------------

/// A token-level boolean attention mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenMask {
    seq_len: usize,
    allowed: Vec<bool>,
}

impl TokenMask {
    /// Build from a row-major boolean matrix.
    pub fn new(seq_len: usize, allowed: Vec<bool>) -> Result<Self, AttentionError> {
        if allowed.len() != seq_len * seq_len {
            return Err(AttentionError::MaskShape { expected: seq_len, got: allowed.len() });
        }
        Ok(Self { seq_len, allowed })
    }

    /// Plain causal mask.
    pub fn causal(seq_len: usize) -> Self {
        let mut allowed = vec![false; seq_len * seq_len];
        for i in 0..seq_len {
            for j in 0..=i {
                allowed[i * seq_len + j] = true;
            }
        }
        Self { seq_len, allowed }
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn is_allowed(&self, i: usize, j: usize) -> bool {
        self.allowed[i * self.seq_len + j]
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.allowed[i * self.seq_len..(i + 1) * self.seq_len]
    }

    fn check_causal(&self) -> Result<(), AttentionError> {
        for i in 0..self.seq_len {
            if let Some(col) = self.row(i)[i + 1..].iter().position(|&a| a) {
                return Err(AttentionError::MaskNotCausal { row: i, col: i + 1 + col });
            }
        }
        Ok(())
    }
}

/// Expand a block mask to token level. Tokens in distinct allowed blocks see
/// each other fully; the diagonal block applies token causality (`j <= i`).
pub fn expand_mask(mask: &BlockMask, block_tokens: usize) -> TokenMask {
    assert!(block_tokens >= 1, "block_tokens must be at least 1");
    let n = mask.n_blocks();
    let seq_len = n * block_tokens;
    let mut allowed = vec![false; seq_len * seq_len];
    for i in 0..seq_len {
        let bi = i / block_tokens;
        for j in 0..seq_len {
            let bj = j / block_tokens;
            allowed[i * seq_len + j] = mask.is_allowed(bi, bj) && (bi != bj || j <= i);
        }
    }
    TokenMask { seq_len, allowed }
}

// ---------------------------------------------------------------------------
// Dense reference
// ---------------------------------------------------------------------------

/// Masked softmax attention over every allowed token (the reference path).
///
/// Masked positions get zero weight by exclusion, which is equivalent to the
/// additive negative-infinity formulation. Scores and weight sums accumulate
/// in `f64` per row; each row's weights sum to 1.
pub fn dense_attention<T: Element>(
    problem: &AttentionProblem<T>,
    token_mask: &TokenMask,
) -> Result<Vec<T>, AttentionError> {
    if token_mask.seq_len != problem.seq_len {
        return Err(AttentionError::MaskShape {
            expected: problem.seq_len,
            got: token_mask.seq_len,
        });
    }
    token_mask.check_causal()?;
    let dim = problem.head_dim;
    let mut out = vec![T::from_f64(0.0); problem.heads * problem.seq_len * dim];
    let mut scores: Vec<(usize, f64)> = Vec::with_capacity(problem.seq_len);
    let mut acc = vec![0.0f64; dim];
    for head in 0..problem.heads {
        for i in 0..problem.seq_len {
            scores.clear();
            let mut max_score = f64::NEG_INFINITY;
            for (j, &allowed) in token_mask.row(i).iter().enumerate() {
                if allowed {
                    let s = problem.dot_qk(head, i, j);
                    max_score = max_score.max(s);
                    scores.push((j, s));
                }
            }
            if scores.is_empty() {
                return Err(AttentionError::EmptyRow { row: i });
            }
            acc.fill(0.0);
            let mut normalizer = 0.0f64;
            for &(j, s) in &scores {
                let w = (s - max_score).exp();
                normalizer += w;
                let vj = problem.offset(head, j);
                for (a, x) in acc.iter_mut().zip(&problem.v[vj..vj + dim]) {
                    *a += w * x.to_f64();
                }
            }
            let base = problem.offset(head, i);
            for d in 0..dim {
                out[base + d] = T::from_f64(acc[d] / normalizer);
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Block-sparse forward
// ---------------------------------------------------------------------------

/// Count of query-key score entries computed by block attention: full
/// `block_tokens^2` per allowed off-diagonal block, the causal triangle on
/// diagonal blocks. Per head.
pub fn score_entries(mask: &BlockMask, block_tokens: usize) -> u64 {
    let bt = block_tokens as u64;
    let mut total = 0u64;
    for (q, k) in mask.allowed_pairs() {
        total += if q == k { bt * (bt + 1) / 2 } else { bt * bt };
    }
    total
}

/// How much score work the sparse pass did relative to full causal attention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostReport {
    /// Query-key dot products actually computed, all heads.
    pub score_flops: u64,
    /// The full-causal equivalent count.
    pub dense_flops: u64,
    /// `score_flops / dense_flops`; 1.0 for a full causal mask.
    pub ratio: f64,
}

/// Block-skipping attention: visits only the blocks the mask allows.
/// Off-diagonal allowed blocks are fully visible; the diagonal block applies
/// token causality. The block size is `seq_len / n_blocks`, which must divide
/// evenly. Output matches [`dense_attention`] over [`expand_mask`] to
/// accumulation tolerance.
pub fn block_sparse_attention<T: Element>(
    problem: &AttentionProblem<T>,
    mask: &BlockMask,
) -> Result<(Vec<T>, CostReport), AttentionError> {
    let n_blocks = mask.n_blocks();
    if !problem.seq_len.is_multiple_of(n_blocks) {
        return Err(AttentionError::BlockShape { seq_len: problem.seq_len, n_blocks });
    }
    let bt = problem.seq_len / n_blocks;
    let dim = problem.head_dim;
    let mut out = vec![T::from_f64(0.0); problem.heads * problem.seq_len * dim];
    let mut scores: Vec<(usize, f64)> = Vec::with_capacity(problem.seq_len);
    let mut acc = vec![0.0f64; dim];
    let mut visited: u64 = 0;
    for head in 0..problem.heads {
        for qb in 0..n_blocks {
            let allowed_blocks: Vec<usize> =
                (0..=qb).filter(|&kb| mask.is_allowed(qb, kb)).collect();
            for i in qb * bt..(qb + 1) * bt {
                scores.clear();
                let mut max_score = f64::NEG_INFINITY;
                for &kb in &allowed_blocks {
                    let j_end = if kb == qb { i + 1 } else { (kb + 1) * bt };
                    for j in kb * bt..j_end {
                        let s = problem.dot_qk(head, i, j);
                        max_score = max_score.max(s);
                        scores.push((j, s));
                        visited += 1;
                    }
                }
                // The diagonal block always allows (i, i); rows cannot be empty.
                debug_assert!(!scores.is_empty());
                acc.fill(0.0);
                let mut normalizer = 0.0f64;
                for &(j, s) in &scores {
                    let w = (s - max_score).exp();
                    normalizer += w;
                    let vj = problem.offset(head, j);
                    for (a, x) in acc.iter_mut().zip(&problem.v[vj..vj + dim]) {
                        *a += w * x.to_f64();
                    }
                }
                let base = problem.offset(head, i);
                for d in 0..dim {
                    out[base + d] = T::from_f64(acc[d] / normalizer);
                }
            }
        }
    }
    let seq = problem.seq_len as u64;
    let dense_flops = problem.heads as u64 * seq * (seq + 1) / 2;
    let report = CostReport {
        score_flops: visited,
        dense_flops,
        ratio: visited as f64 / dense_flops as f64,
    };
    Ok((out, report))
}

/// Largest absolute element-wise difference between two outputs.
pub fn max_abs_diff<T: Element>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.to_f64() - y.to_f64()).abs())
        .fold(0.0, f64::max)
}
