//! Influence propagation through multi-layer stacks, including hybrids.
//!
//! Drop a unit of information in one block and run it through a schedule of
//! masked layers: each layer adds a uniform-attention average on top of a
//! residual copy. The support spreads exactly as far as reachability allows,
//! so the printed map shows where a passkey planted at the source could
//! possibly be read out at each depth. A PGM heatmap (rows = layers) goes to
//! `target/example-output/`.
//!
//! ```bash
//! cargo run --example influence_map
//! ```

use std::fs;

use sparsefield::flow::{propagate_influence, retrievability_curve, LayerSchedule};
use sparsefield::patterns::PatternConfig;

fn ascii_row(row: &[f64]) -> String {
    row.iter()
        .map(|&v| {
            if v <= 0.0 {
                '.'
            } else if v >= 0.1 {
                '#'
            } else if v >= 0.001 {
                '+'
            } else {
                ':'
            }
        })
        .collect()
}

fn main() {
    let n_blocks = 64;
    let depth = 12;
    let source = 6;

    for (label, config) in [
        ("sliding_window(9,1)", PatternConfig::sliding_window(9, 1)),
        ("power(5,1,4)", PatternConfig::power(5, 1, 4)),
    ] {
        let schedule = LayerSchedule::uniform(config, depth).expect("valid schedule");
        let field = propagate_influence(&schedule, n_blocks, source).expect("source in range");
        println!("{label}: influence from block {source}, one row per layer");
        for (l, row) in field.values.iter().enumerate() {
            println!("  layer {l:>2} {}", ascii_row(row));
        }
        println!(
            "  information reaches the last block at layer {:?}\n",
            field.first_positive_layer(n_blocks - 1)
        );
    }

    // Hybrid stacks: two full-attention layers close each group of seven.
    let sparse = PatternConfig::sliding_window(9, 1);
    let hybrid = LayerSchedule::hybrid(sparse, 14, 7, 2, true).expect("valid schedule");
    let curve = retrievability_curve(&hybrid, n_blocks).expect("valid run");
    println!("hybrid 2-of-7 sliding-window stack, fraction retrievable per depth:");
    for (k, alpha) in curve {
        println!("  within {k:>2} layers: {alpha:.4}");
    }

    let out_dir = "target/example-output";
    fs::create_dir_all(out_dir).expect("create output dir");
    let schedule = LayerSchedule::uniform(PatternConfig::power(5, 1, 4), depth).unwrap();
    let field = propagate_influence(&schedule, n_blocks, source).unwrap();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in field.values.iter().flatten().copied().filter(|&v| v > 0.0) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let mut pgm = format!("P2\n{n_blocks} {}\n255\n", field.values.len());
    for row in &field.values {
        let pixels: Vec<String> = row
            .iter()
            .map(|&v| {
                if v <= 0.0 {
                    "0".to_string()
                } else {
                    (1 + ((v.ln() - lo.ln()) / (hi.ln() - lo.ln()) * 254.0).round() as u32)
                        .to_string()
                }
            })
            .collect();
        pgm.push_str(&pixels.join(" "));
        pgm.push('\n');
    }
    fs::write(format!("{out_dir}/influence_power.pgm"), pgm).expect("write PGM");
    println!("\nheatmap written to {out_dir}/influence_power.pgm");
}
