//! Receptive-field growth and coverage gaps, family by family.
//!
//! From the last block of a 128-block context, expand the reachable set one
//! attention step at a time and watch how differently the families grow:
//! linear for a sliding window, exponential for power-of-two offsets, and
//! permanently incomplete for dilated masks.
//!
//! ```bash
//! cargo run --example coverage_curves
//! ```

use sparsefield::graph::{coverage_gaps, depth_growth_curve, shortest_depth};
use sparsefield::patterns::{build_mask, PatternConfig};

fn main() {
    let n_blocks = 128;
    let source = n_blocks - 1;
    let configs = [
        PatternConfig::sliding_window(9, 1),
        PatternConfig::stride_slash(6, 1, 3),
        PatternConfig::dilated(20, 1),
        PatternConfig::longnet(vec![(8, 1), (16, 2), (32, 4), (64, 8), (128, 16)]),
        PatternConfig::power(5, 1, 4),
    ];

    println!("reachable blocks from block {source} of {n_blocks}, step by step:\n");
    for config in &configs {
        let mask = build_mask(config, n_blocks).expect("valid config");
        let curve = depth_growth_curve(&mask, source).expect("source in range");
        let gaps = coverage_gaps(&mask, source).expect("source in range");
        let sizes: Vec<String> = curve.iter().map(|(_, s)| s.to_string()).collect();
        println!("{:<16} {}", config.family.name(), sizes.join(" -> "));
        if gaps.is_empty() {
            println!("{:<16} full coverage after {} steps", "", curve.len() - 1);
        } else {
            let shown: Vec<usize> = gaps.iter().take(8).collect();
            println!(
                "{:<16} {} blocks never reachable (first few: {:?})",
                "",
                gaps.len(),
                shown
            );
        }
    }

    // Depth to a single far-away block tells the same story pointwise.
    let target = 20;
    println!("\nshortest depth from block {source} to block {target}:");
    for config in &configs {
        let mask = build_mask(config, n_blocks).expect("valid config");
        let depth = shortest_depth(&mask, source, target).expect("indices in range");
        match depth {
            Some(d) => println!("{:<16} {d} steps", config.family.name()),
            None => println!("{:<16} unreachable", config.family.name()),
        }
    }
}
