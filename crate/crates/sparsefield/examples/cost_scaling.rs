//! How score work scales with context length for fixed per-row budgets.
//!
//! Counting query-key score entries straight off the mask: a sliding window
//! does O(N) work, while power-of-two offsets add a log factor for an
//! O(N log N) total. Fitting log-log slopes over doubling context sizes
//! makes both exponents measurable.
//!
//! ```bash
//! cargo run --example cost_scaling
//! ```

use sparsefield::attention::score_entries;
use sparsefield::patterns::{build_mask, PatternConfig};

/// Least-squares slope of y over x.
fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    cov / var
}

fn main() {
    let block_tokens = 64;
    let sizes = [64usize, 128, 256, 512];

    println!("score entries per head at block_tokens={block_tokens}:\n");
    println!("{:>8} {:>16} {:>16} {:>16}", "blocks", "sliding_window", "power", "full");
    let mut sw_points = Vec::new();
    let mut power_points = Vec::new();
    for &n in &sizes {
        let sw = score_entries(&build_mask(&PatternConfig::sliding_window(9, 1), n).unwrap(), block_tokens);
        let power = score_entries(&build_mask(&PatternConfig::power(5, 1, 4), n).unwrap(), block_tokens);
        let full = score_entries(&build_mask(&PatternConfig::full_causal(), n).unwrap(), block_tokens);
        println!("{n:>8} {sw:>16} {power:>16} {full:>16}");
        sw_points.push(((n as f64).ln(), (sw as f64).ln()));
        // Divide out the expected log factor so a clean O(N log N) fits slope 1.
        power_points.push(((n as f64).ln(), (power as f64 / (n as f64).log2()).ln()));
    }

    let sw_slope = slope(&sw_points);
    let power_slope = slope(&power_points);
    println!("\nfitted exponents (log-log):");
    println!("  sliding window:      {sw_slope:.3}   (linear model predicts 1.0)");
    println!("  power / log2(N):     {power_slope:.3}   (N log N model predicts 1.0)");
}
