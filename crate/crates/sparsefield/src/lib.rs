//! Analysis toolkit for static block-sparse attention patterns.
//!
//! Long-context transformers often restrict attention to a fixed per-row
//! budget of blocks. Which blocks matters more than how many: stacking
//! layers composes the masks, so the reachable context grows with depth at
//! a rate set entirely by the mask's geometry. This crate builds the common
//! static families at block granularity and measures exactly that:
//!
//! * [`patterns`] constructs deterministic block masks (full causal, sliding
//!   window, stride slash, dilated, segment grids, power-of-two) and reports
//!   their budgets and sparsity.
//! * [`graph`] treats a mask as a DAG and computes per-step reachable sets,
//!   shortest depths, growth curves, and permanently unreachable blocks.
//! * [`theory`] machine-checks the power-of-two edge set's guarantees:
//!   logarithmic out-degree and BFS distance equal to the binary weight of
//!   the index difference, with constructive path witnesses.
//! * [`attention`] runs desk-scale numeric attention twice — a dense masked
//!   softmax reference and a block-skipping pass — and checks they agree
//!   while counting the score work actually done.
//! * [`flow`] propagates influence through multi-layer schedules (including
//!   hybrid full/sparse stacks) and answers block-level retrievability
//!   questions.
//! * [`cli`] wires the above into the `sparsefield` binary.
//!
//! The `examples/` directory has one runnable walkthrough per capability;
//! `cargo run --example build_masks` is a good starting point.

pub mod attention;
pub mod cli;
pub mod flow;
pub mod graph;
pub mod patterns;
pub mod rng;
pub mod theory;

pub use attention::{
    block_sparse_attention, dense_attention, expand_mask, AttentionProblem, CostReport,
};
pub use flow::{
    propagate_influence, retrievability, retrievability_curve, InfluenceField, LayerSchedule,
};
pub use graph::{
    coverage_gaps, depth_growth_curve, reach_profile, shortest_depth, BlockSet,
    ReachabilityProfile,
};
pub use patterns::{build_mask, BlockMask, Family, PatternConfig, SparsityDenominator};
pub use theory::{binary_path, power_out_degree, verify, PathWitness, VerifyReport};
