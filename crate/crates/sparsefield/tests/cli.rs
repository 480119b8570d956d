//! End-to-end tests of the `sparsefield` binary: flag handling, exit codes,
//! and byte-exact file outputs.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

static DIR_COUNTER: AtomicUsize = AtomicUsize::new(0);

struct TempDir(PathBuf);

impl TempDir {
    fn new(label: &str) -> Self {
        let id = DIR_COUNTER.fetch_add(1, Ordering::Relaxed);
        let path = std::env::temp_dir().join(format!(
            "sparsefield-cli-{}-{label}-{id}",
            std::process::id()
        ));
        fs::create_dir_all(&path).expect("create temp dir");
        Self(path)
    }

    fn path(&self, file: &str) -> PathBuf {
        self.0.join(file)
    }

    fn read(&self, file: &str) -> String {
        fs::read_to_string(self.path(file))
            .unwrap_or_else(|e| panic!("read {}: {e}", self.path(file).display()))
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsefield"))
        .args(args)
        .env_remove("SPARSEFIELD_SEED")
        .output()
        .expect("spawn binary")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

// ---------------------------------------------------------------------------
// mask
// ---------------------------------------------------------------------------

#[test]
fn mask_writes_pbm_and_csv() {
    let dir = TempDir::new("mask");
    let out = run(&[
        "mask", "--family", "full", "--blocks", "2", "--out", dir.0.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(dir.read("mask.pbm"), "P1\n2 2\n1 0\n1 1\n");
    assert_eq!(dir.read("mask.csv"), "q,k\n0,0\n1,0\n1,1\n");
    assert!(dir.path("manifest.json").exists());
}

#[test]
fn mask_power_row_budget_via_csv() {
    let dir = TempDir::new("mask-power");
    let out = run(&[
        "mask", "--family", "power", "--blocks", "128", "--window", "5", "--sink", "1",
        "--out", dir.0.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = dir.read("mask.csv");
    let last_row: Vec<&str> = csv.lines().filter(|l| l.starts_with("127,")).collect();
    assert_eq!(last_row.len(), 10);
    let cols: Vec<usize> =
        last_row.iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(cols, vec![0, 63, 95, 111, 119, 123, 124, 125, 126, 127]);
}

#[test]
fn mask_missing_blocks_flag_is_usage_error() {
    let out = run(&["mask", "--family", "full"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--blocks"), "{}", stderr(&out));
}

#[test]
fn mask_rejects_unknown_flags_and_families() {
    let out = run(&["mask", "--family", "full", "--blocks", "4", "--frobnicate", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--frobnicate"));

    let out = run(&["mask", "--family", "zigzag", "--blocks", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("zigzag"));
}

#[test]
fn mask_accepts_config_file() {
    let dir = TempDir::new("mask-config");
    let cfg = dir.path("pattern.json");
    fs::write(&cfg, r#"{"family": "sliding_window", "window_blocks": 2, "sink_blocks": 1}"#)
        .unwrap();
    let out = run(&[
        "mask", "--config", cfg.to_str().unwrap(), "--blocks", "4",
        "--out", dir.0.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(dir.read("mask.pbm"), "P1\n4 4\n1 0 0 0\n1 1 0 0\n1 1 1 0\n1 0 1 1\n");
}

#[test]
fn mask_reruns_are_byte_identical() {
    let a = TempDir::new("rerun-a");
    let b = TempDir::new("rerun-b");
    for dir in [&a, &b] {
        let out = run(&[
            "mask", "--family", "stride_slash", "--blocks", "64", "--window", "6",
            "--sink", "1", "--slash", "3", "--out", dir.0.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(a.read("mask.pbm"), b.read("mask.pbm"));
    assert_eq!(a.read("mask.csv"), b.read("mask.csv"));
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[test]
fn analyze_sliding_window_coverage() {
    let dir = TempDir::new("analyze");
    let out = run(&[
        "analyze", "--family", "sliding_window", "--window", "9", "--sink", "1",
        "--blocks", "128", "--out", dir.0.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = dir.read("coverage.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("pattern,n_blocks,source,k,reachable,coverage"));
    assert_eq!(lines.next(), Some("sliding_window,128,127,1,10,0.078125"));
    assert_eq!(dir.read("gaps.csv"), "pattern,n_blocks,source,block\n");
}

#[test]
fn analyze_dilated_gap_listing() {
    let dir = TempDir::new("analyze-dilated");
    let out = run(&[
        "analyze", "--family", "dilated", "--window", "20", "--dilation", "1",
        "--blocks", "128", "--out", dir.0.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let gaps = dir.read("gaps.csv");
    assert_eq!(gaps.lines().count(), 65); // header + 64 unreachable blocks
    assert!(gaps.lines().nth(1).unwrap().starts_with("dilated,128,127,"));
}

#[test]
fn analyze_full_causal_single_row() {
    let dir = TempDir::new("analyze-full");
    let out = run(&[
        "analyze", "--family", "full", "--blocks", "16", "--out", dir.0.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        dir.read("coverage.csv"),
        "pattern,n_blocks,source,k,reachable,coverage\nfull,16,15,1,16,1.000000\n"
    );
}

#[test]
fn analyze_compare_merges_in_config_order() {
    let dir = TempDir::new("analyze-compare");
    let sw = dir.path("sw.json");
    let power = dir.path("power.json");
    fs::write(&sw, r#"{"family": "sliding_window", "window_blocks": 9, "sink_blocks": 1}"#)
        .unwrap();
    fs::write(&power, r#"{"family": "power", "window_blocks": 5, "sink_blocks": 1}"#).unwrap();
    let out = run(&[
        "analyze", "--blocks", "128", "--compare", sw.to_str().unwrap(),
        power.to_str().unwrap(), "--out", dir.0.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = dir.read("coverage.csv");
    let patterns: Vec<&str> =
        csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    let first_power = patterns.iter().position(|p| *p == "power").unwrap();
    assert!(patterns[..first_power].iter().all(|p| *p == "sliding_window"));
    assert!(patterns[first_power..].iter().all(|p| *p == "power"));
    // Power saturates at step 6 from a cold source.
    assert!(csv.lines().any(|l| l == "power,128,127,6,128,1.000000"), "{csv}");
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[test]
fn verify_small_and_theorem_positional() {
    let out = run(&["verify", "--n", "128"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("PASS"), "{text}");
    assert!(text.contains("max_out_degree=7"));

    let out = run(&["verify", "theorem", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("PASS"));
}

#[test]
fn verify_writes_json_report() {
    let dir = TempDir::new("verify");
    let out = run(&["verify", "--n", "64", "--out", dir.0.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&dir.read("verify.json")).unwrap();
    assert_eq!(report["max_out_degree"], 6);
    assert_eq!(report["pass"], true);
}

#[test]
fn verify_rejects_tiny_n() {
    let out = run(&["verify", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--n"));
}

// ---------------------------------------------------------------------------
// attn
// ---------------------------------------------------------------------------

#[test]
fn attn_power_single_precision_passes_tolerance() {
    let out = run(&[
        "attn", "--seq", "512", "--block-tokens", "64", "--heads", "2", "--dim", "32",
        "--family", "power", "--window", "5", "--sink", "1", "--seed", "7",
        "--precision", "single",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("PASS"), "{text}");
    assert!(text.contains("precision=single"));
}

#[test]
fn attn_full_double_precision_is_tight() {
    let out = run(&[
        "attn", "--seq", "256", "--block-tokens", "64", "--heads", "1", "--dim", "16",
        "--family", "full", "--seed", "3", "--tol", "1e-10",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("ratio=1.000000"));
}

#[test]
fn attn_seq_not_multiple_of_block_tokens_is_usage_error() {
    let out = run(&[
        "attn", "--seq", "100", "--block-tokens", "64", "--heads", "1", "--dim", "8",
        "--family", "full",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--seq"), "{}", stderr(&out));
}

#[test]
fn attn_seed_falls_back_to_env() {
    let with_flag = run(&[
        "attn", "--seq", "128", "--block-tokens", "32", "--heads", "1", "--dim", "8",
        "--family", "full", "--seed", "11",
    ]);
    let with_env = Command::new(env!("CARGO_BIN_EXE_sparsefield"))
        .args([
            "attn", "--seq", "128", "--block-tokens", "32", "--heads", "1", "--dim", "8",
            "--family", "full",
        ])
        .env("SPARSEFIELD_SEED", "11")
        .output()
        .expect("spawn binary");
    assert_eq!(with_flag.status.code(), Some(0));
    assert_eq!(with_env.status.code(), Some(0));
    assert_eq!(stdout(&with_flag), stdout(&with_env));
}

// ---------------------------------------------------------------------------
// flow
// ---------------------------------------------------------------------------

#[test]
fn flow_single_layer_single_block() {
    let dir = TempDir::new("flow-tiny");
    let out = run(&[
        "flow", "--family", "full", "--blocks", "1", "--layers", "1",
        "--out", dir.0.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = dir.read("influence.csv");
    assert_eq!(csv, "layer,block,value\n0,0,1\n1,0,2\n");
    assert_eq!(dir.read("retrievability.csv"), "k,retrievable,alpha\n1,1,1.000000\n");
}

#[test]
fn flow_uniform_power_first_arrival() {
    let dir = TempDir::new("flow-power");
    let out = run(&[
        "flow", "--family", "power", "--window", "5", "--sink", "1", "--blocks", "64",
        "--layers", "28", "--source", "6", "--passkey-block", "6",
        "--out", dir.0.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    // Depth printed for the passkey verdict matches the layered BFS.
    let text = stdout(&out);
    assert!(text.contains("passkey_block=6 retrievable=true"), "{text}");
    // First positive influence.csv row for block 63 appears at that depth.
    let csv = dir.read("influence.csv");
    let first_layer = csv
        .lines()
        .skip(1)
        .map(|l| {
            let mut parts = l.split(',');
            let layer: usize = parts.next().unwrap().parse().unwrap();
            let block: usize = parts.next().unwrap().parse().unwrap();
            let value: f64 = parts.next().unwrap().parse().unwrap();
            (layer, block, value)
        })
        .find(|&(_, block, value)| block == 63 && value > 0.0)
        .map(|(layer, _, _)| layer);
    let depth: usize = text
        .lines()
        .find(|l| l.starts_with("passkey_block"))
        .and_then(|l| l.rsplit('=').next())
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert_eq!(first_layer, Some(depth));
}

#[test]
fn flow_hybrid_schedule_saturates_at_first_full_layer() {
    let dir = TempDir::new("flow-hybrid");
    let out = run(&[
        "flow", "--family", "sliding_window", "--window", "9", "--sink", "1",
        "--blocks", "128", "--layers", "28", "--hybrid", "2:7",
        "--out", dir.0.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = dir.read("retrievability.csv");
    // Groups of 7 with the last 2 full: layers 6 and 7 are the first full
    // pair, so coverage hits 1.0 at k=6 and never before.
    for line in csv.lines().skip(1) {
        let mut parts = line.split(',');
        let k: usize = parts.next().unwrap().parse().unwrap();
        let alpha = parts.nth(1).unwrap();
        if k < 6 {
            assert_ne!(alpha, "1.000000", "k={k}");
        } else {
            assert_eq!(alpha, "1.000000", "k={k}");
        }
    }
}

#[test]
fn flow_schedule_json_and_layer_errors() {
    let dir = TempDir::new("flow-json");
    let schedule = dir.path("schedule.json");
    fs::write(
        &schedule,
        r#"{"repeat": {"family": "power", "window_blocks": 5, "sink_blocks": 1},
            "count": 14, "hybrid_full_every": 7, "hybrid_full_count": 2}"#,
    )
    .unwrap();
    let out = run(&[
        "flow", "--schedule", schedule.to_str().unwrap(), "--blocks", "32",
        "--out", dir.0.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    // A malformed layer is reported by index.
    let bad = dir.path("bad.json");
    fs::write(
        &bad,
        r#"{"layers": [{"family": "full"}, {"family": "dilated", "dilation_blocks": 1}]}"#,
    )
    .unwrap();
    let out = run(&[
        "flow", "--schedule", bad.to_str().unwrap(), "--blocks", "8",
        "--out", dir.0.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("layer 1"), "{}", stderr(&out));
}

#[test]
fn help_and_unknown_command() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("usage: sparsefield"));

    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
}
