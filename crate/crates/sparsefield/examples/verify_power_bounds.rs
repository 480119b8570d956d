//! Machine-check the power-of-two offset graph's connectivity guarantees.
//!
//! On vertices 1..=n with edges at power-of-two index differences, every
//! vertex keeps its out-degree within floor(log2 n), and the BFS distance
//! between any pair equals the binary weight of their difference — so any
//! block is reachable in at most ceil(log2 n) hops. This example runs the
//! exhaustive check at n = 4096 and prints a constructive path witness.
//!
//! ```bash
//! cargo run --release --example verify_power_bounds
//! ```

use sparsefield::theory::{binary_path, power_out_degree, verify};

fn main() {
    let witness = binary_path(1024, 1).expect("target below source");
    println!("path 1024 -> 1 hops: {:?}", witness.hops);
    println!(
        "{} hops for a difference of {} (binary weight {})\n",
        witness.hops.len(),
        witness.source - witness.target,
        (witness.source - witness.target).count_ones()
    );

    println!("out-degree of 1024 within n=1024: {}", power_out_degree(1024, 1024).unwrap());

    for n in [128usize, 1024, 4096] {
        let report = verify(n);
        println!(
            "n={:<5} {} out-degree max {} (bound {}), distance max {} (bound {}), {} pairs",
            n,
            if report.pass { "PASS" } else { "FAIL" },
            report.max_out_degree,
            report.out_degree_bound,
            report.max_bfs_distance,
            report.distance_bound,
            report.pairs_checked,
        );
    }

    // Above the exhaustive limit the check samples: all powers of two and
    // their neighbors plus 1000 seeded random sources, all targets each.
    let report = verify(65536);
    println!(
        "n=65536 {} ({} mode, {} pairs)",
        if report.pass { "PASS" } else { "FAIL" },
        report.mode,
        report.pairs_checked
    );
}
