//! Acceptance suite: one test per shipped guarantee, each printing a
//! PASS/FAIL line (visible with `--nocapture`). Run with
//! `cargo test -p sparsefield --test acceptance`.

use std::process::Command;
use std::time::{Duration, Instant};

use sparsefield::attention::{
    block_sparse_attention, dense_attention, expand_mask, max_abs_diff, score_entries,
    AttentionProblem, Element,
};
use sparsefield::flow::{propagate_influence, retrievability_curve, LayerSchedule};
use sparsefield::graph::{coverage_gaps, reach_profile, BlockSet};
use sparsefield::patterns::{build_mask, PatternConfig};

fn report(criterion: &str, failures: &[String]) {
    if failures.is_empty() {
        println!("acceptance {criterion}: PASS");
    } else {
        println!("acceptance {criterion}: FAIL - {}", failures.join("; "));
    }
    assert!(failures.is_empty(), "{criterion}: {}", failures.join("; "));
}

/// The five sparse families at their reference budgets.
fn reference_configs() -> Vec<PatternConfig> {
    vec![
        PatternConfig::sliding_window(9, 1),
        PatternConfig::stride_slash(6, 1, 3),
        PatternConfig::dilated(20, 1),
        PatternConfig::longnet(vec![(8, 1), (16, 2), (32, 4), (64, 8), (128, 16)]),
        PatternConfig::power(5, 1, 4),
    ]
}

#[test]
fn criterion_1_coverage_curves() {
    let start = Instant::now();
    let n = 128;
    let mut failures = Vec::new();

    // Sliding window 9+1: first step reaches exactly 10 blocks, then the
    // reachable set grows by the window stride (8) until the sink region
    // merges with the advancing front at step 16.
    let mask = build_mask(&PatternConfig::sliding_window(9, 1), n).unwrap();
    let profile = reach_profile(&mask, 127, 16).unwrap();
    if profile.coverage[1] != 10.0 / 128.0 {
        failures.push(format!("sliding window alpha_1 = {}, want 10/128", profile.coverage[1]));
    }
    for k in 1..=16usize {
        let expected: BlockSet = std::iter::once(0usize)
            .chain(127usize.saturating_sub(8 * k)..=127)
            .collect();
        if profile.steps[k] != expected {
            failures.push(format!("sliding window step {k} set mismatch"));
        }
        if (2..=15).contains(&k) {
            let delta = profile.steps[k].len() - profile.steps[k - 1].len();
            if delta != 8 {
                failures.push(format!("sliding window step {k} grew by {delta}, want 8"));
            }
        }
    }
    if profile.steps[16].len() != 128 {
        failures.push("sliding window did not saturate at step 16".into());
    }

    // The uniform schedule view agrees with the single-mask profile.
    let schedule = LayerSchedule::uniform(PatternConfig::sliding_window(9, 1), 16).unwrap();
    let curve = retrievability_curve(&schedule, n).unwrap();
    if curve[0] != (1, 10.0 / 128.0) {
        failures.push(format!("schedule alpha_1 = {:?}, want (1, 10/128)", curve[0]));
    }
    for &(k, alpha) in &curve {
        if alpha != profile.coverage[k] {
            failures.push(format!("schedule alpha_{k} = {alpha} disagrees with graph profile"));
        }
    }

    // Power 5+1 reaches full coverage within 7 layers.
    let schedule = LayerSchedule::uniform(PatternConfig::power(5, 1, 4), 7).unwrap();
    let curve = retrievability_curve(&schedule, n).unwrap();
    if !curve.iter().any(|&(k, alpha)| alpha == 1.0 && k <= 7) {
        failures.push(format!("power curve never hits 1.0 within 7: {curve:?}"));
    }

    if start.elapsed() > Duration::from_secs(1) {
        failures.push(format!("runtime {:?} exceeds 1 s", start.elapsed()));
    }
    report("criterion 1 (coverage curve reproduction)", &failures);
}

#[test]
fn criterion_2_power_bounds_exhaustive_via_cli() {
    let start = Instant::now();
    let mut failures = Vec::new();

    let output = Command::new(env!("CARGO_BIN_EXE_sparsefield"))
        .args(["verify", "--n", "4096"])
        .output()
        .expect("run verify");
    let stdout = String::from_utf8_lossy(&output.stdout);
    if !output.status.success() {
        failures.push(format!("exit status {:?}", output.status.code()));
    }
    if !stdout.starts_with("PASS") {
        failures.push("stdout does not start with PASS".into());
    }
    let json_start = stdout.find('{').unwrap_or(0);
    let report_json: serde_json::Value =
        serde_json::from_str(&stdout[json_start..]).expect("JSON report on stdout");
    for (field, want) in [
        ("n", 4096u64),
        ("max_out_degree", 12),
        ("out_degree_bound", 12),
        ("max_bfs_distance", 12),
        ("distance_bound", 12),
        ("pairs_checked", 4096 * 4095 / 2),
    ] {
        if report_json[field] != serde_json::json!(want) {
            failures.push(format!("{field} = {}, want {want}", report_json[field]));
        }
    }
    if report_json["mode"] != serde_json::json!("exhaustive") {
        failures.push("mode is not exhaustive".into());
    }
    if report_json["pass"] != serde_json::json!(true) {
        failures.push("report.pass is false".into());
    }
    if start.elapsed() > Duration::from_secs(60) {
        failures.push(format!("runtime {:?} exceeds 60 s", start.elapsed()));
    }
    report("criterion 2 (power graph bounds, n=4096 exhaustive)", &failures);
}

#[test]
fn criterion_3_dilated_coverage_gap() {
    let mut failures = Vec::new();
    let mask = build_mask(&PatternConfig::dilated(20, 1), 128).unwrap();
    let gaps = coverage_gaps(&mask, 127).unwrap();
    let expected: BlockSet = (0..=127usize).filter(|b| (127 - b) % 2 == 1).collect();
    if gaps.len() != 64 {
        failures.push(format!("{} gap blocks, want 64", gaps.len()));
    }
    if gaps != expected {
        failures.push("gap set is not exactly the odd offsets".into());
    }
    report("criterion 3 (dilated 50% coverage gap)", &failures);
}

#[test]
fn criterion_4_stride_slash_and_power_full_coverage() {
    let mut failures = Vec::new();
    let n = 128;
    for config in [PatternConfig::stride_slash(6, 1, 3), PatternConfig::power(5, 1, 4)] {
        let name = config.family.name();
        let mask = build_mask(&config, n).unwrap();
        let gaps = coverage_gaps(&mask, 127).unwrap();
        if !gaps.is_empty() {
            failures.push(format!("{name} leaves {} unreachable blocks", gaps.len()));
        }
        let profile = reach_profile(&mask, 127, 8).unwrap();
        if profile.coverage[6] != 1.0 {
            let full_at = (0..profile.steps.len()).find(|&k| profile.steps[k].len() == n);
            failures.push(format!(
                "{name} alpha_6 = {:.6}, full coverage at step {:?}",
                profile.coverage[6], full_at
            ));
        }
    }
    report("criterion 4 (stride slash and power full coverage within 6 steps)", &failures);
}

fn equivalence_diff<T: Element>(config: &PatternConfig, seed: u64) -> f64 {
    let seq = 1024;
    let block_tokens = 64;
    let mask = build_mask(config, seq / block_tokens).unwrap();
    let problem = AttentionProblem::<T>::random(seq, 2, 32, seed);
    let (sparse, _) = block_sparse_attention(&problem, &mask).unwrap();
    let dense = dense_attention(&problem, &expand_mask(&mask, block_tokens)).unwrap();
    max_abs_diff(&sparse, &dense)
}

#[test]
fn criterion_5_numeric_equivalence() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for config in reference_configs() {
        for seed in [1u64, 2, 3] {
            let diff = equivalence_diff::<f64>(&config, seed);
            if diff > 1e-10 {
                failures.push(format!(
                    "{} seed {seed} double diff {diff:.3e} > 1e-10",
                    config.family
                ));
            }
            let diff = equivalence_diff::<f32>(&config, seed);
            if diff > 1e-5 {
                failures.push(format!(
                    "{} seed {seed} single diff {diff:.3e} > 1e-5",
                    config.family
                ));
            }
        }
    }
    if start.elapsed() > Duration::from_secs(30) {
        failures.push(format!("runtime {:?} exceeds 30 s", start.elapsed()));
    }
    report("criterion 5 (block-sparse vs dense equivalence, 5 families x 3 seeds)", &failures);
}

fn fitted_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    cov / var
}

#[test]
fn criterion_6_cost_scaling() {
    let mut failures = Vec::new();
    let block_tokens = 64;
    let sizes = [64usize, 128, 256, 512];

    let mut sw_points = Vec::new();
    let mut power_points = Vec::new();
    for &n in &sizes {
        let sw = score_entries(
            &build_mask(&PatternConfig::sliding_window(9, 1), n).unwrap(),
            block_tokens,
        ) as f64;
        let power =
            score_entries(&build_mask(&PatternConfig::power(5, 1, 4), n).unwrap(), block_tokens)
                as f64;
        sw_points.push(((n as f64).ln(), sw.ln()));
        // Dividing out log2(N) should leave a clean linear law.
        power_points.push(((n as f64).ln(), (power / (n as f64).log2()).ln()));
    }
    let sw_slope = fitted_slope(&sw_points);
    if (sw_slope - 1.0).abs() > 0.1 {
        failures.push(format!("sliding window exponent {sw_slope:.3} not within 1 +/- 0.1"));
    }
    let power_slope = fitted_slope(&power_points);
    if (power_slope - 1.0).abs() > 0.1 {
        failures.push(format!("power N log N exponent {power_slope:.3} not within 1 +/- 0.1"));
    }
    report("criterion 6 (O(N) sliding window, O(N log N) power cost scaling)", &failures);
}

#[test]
fn criterion_7_support_equals_reachability() {
    let mut failures = Vec::new();
    let n = 128;
    let depth = 12;
    for config in reference_configs() {
        let mask = build_mask(&config, n).unwrap();
        let profile = reach_profile(&mask, n - 1, depth).unwrap();
        let schedule = LayerSchedule::uniform(config.clone(), depth).unwrap();
        let fields: Vec<_> =
            (0..n).map(|s| propagate_influence(&schedule, n, s).unwrap()).collect();
        for k in 0..=depth {
            let mut support = BlockSet::empty(n);
            for (s, field) in fields.iter().enumerate() {
                if field.values[k][n - 1] > 0.0 {
                    support.insert(s);
                }
            }
            if support != profile.steps[k] {
                failures.push(format!("{} k={k}: support != reachable set", config.family));
            }
        }
    }
    report("criterion 7 (influence support equals graph reachability)", &failures);
}

#[test]
fn criterion_8_out_of_scope_results() {
    // Quantities this artifact deliberately does not reproduce: trained-model
    // perplexities, RULER scores, trained passkey accuracies, GPU latencies,
    // and probe classification accuracies. The structural checks above stand
    // in for them at desk scale.
    report("criterion 8 (trained-model and GPU results out of scope)", &[]);
}
