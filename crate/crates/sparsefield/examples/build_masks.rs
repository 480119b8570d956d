//! Build one mask per family at its reference budget and compare footprints.
//!
//! Writes a PBM image per family under `target/example-output/` (any image
//! viewer opens them; black pixels are attendable blocks) and prints the
//! per-row budget and sparsity numbers that make the patterns comparable.
//!
//! ```bash
//! cargo run --example build_masks
//! ```

use std::fs;

use sparsefield::patterns::{build_mask, PatternConfig, SparsityDenominator};

fn main() {
    let n_blocks = 128;
    let configs = [
        PatternConfig::full_causal(),
        PatternConfig::sliding_window(9, 1),
        PatternConfig::stride_slash(6, 1, 3),
        PatternConfig::dilated(20, 1),
        PatternConfig::longnet(vec![(8, 1), (16, 2), (32, 4), (64, 8), (128, 16)]),
        PatternConfig::power(5, 1, 4),
        PatternConfig::power_pure(),
    ];

    let out_dir = "target/example-output";
    fs::create_dir_all(out_dir).expect("create output dir");

    println!("{n_blocks}-block masks (budgets measured on the last row):\n");
    println!("{:<16} {:>6} {:>9} {:>13} {:>15}", "family", "budget", "allowed", "sparsity(n^2)", "sparsity(tri)");
    for config in configs {
        let mask = build_mask(&config, n_blocks).expect("valid config");
        println!(
            "{:<16} {:>6} {:>9} {:>13.4} {:>15.4}",
            config.family.name(),
            mask.row_budget(n_blocks - 1),
            mask.allowed_count(),
            mask.sparsity(SparsityDenominator::FullSquare),
            mask.sparsity(SparsityDenominator::CausalTriangle),
        );
        let path = format!("{out_dir}/mask_{}.pbm", config.family.name());
        fs::write(&path, mask.to_pbm()).expect("write PBM");
    }
    println!("\nPBM images written to {out_dir}/");
    println!("note: sliding window, stride slash, and power all land on a 10-block budget");
}
