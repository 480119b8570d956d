//! Command-line front end.
//!
//! Five subcommands tie the library together: `mask` renders a pattern,
//! `analyze` emits coverage curves and gaps, `verify` machine-checks the
//! power-of-two connectivity bounds, `attn` runs the numeric equivalence
//! check, and `flow` emits influence maps over layer schedules. Outputs are
//! CSV, plain PBM/PGM, and JSON; every file-writing run drops a
//! `manifest.json` beside its outputs. Exit codes are stable: 0 success,
//! 1 verification failure, 2 usage error.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::attention::{
    block_sparse_attention, dense_attention, expand_mask, max_abs_diff, AttentionProblem, Element,
};
use crate::flow::{propagate_influence, retrieval_depths, LayerSchedule};
use crate::graph::{coverage_gaps, reach_profile};
use crate::patterns::{build_mask, BlockMask, Family, PatternConfig, SparsityDenominator};
use crate::theory;

const USAGE: &str = "\
usage: sparsefield <command> [options]

commands:
  mask     build a block mask; writes mask.pbm, mask.csv
  analyze  coverage curves and gaps; writes coverage.csv, gaps.csv
  verify   check power-of-two out-degree/distance bounds; writes verify.json
  attn     block-sparse vs dense numeric equivalence check
  flow     influence propagation over a layer schedule; writes
           influence.csv, influence.pgm, retrievability.csv

pattern options (mask, analyze, attn, flow):
  --family <full|sliding_window|stride_slash|dilated|longnet|power|power_pure>
  --window <blocks>  --sink <blocks>  --slash <blocks>  --dilation <blocks>
  --segments <w:r,w:r,...>  --block-tokens <tokens>
  --config <file.json>   load the pattern from JSON instead of flags

command options:
  mask     --blocks <n> [--out <dir>]
  analyze  --blocks <n> [--source <block>] [--layers <k>]
           [--compare <cfg.json> ...] [--out <dir>]
  verify   --n <vertices> [--out <dir>]
  attn     --seq <tokens> --block-tokens <tokens> --heads <h> --dim <d>
           [--seed <u64>] [--tol <float>] [--precision <single|double>]
  flow     --blocks <n> --layers <d> [--hybrid <full:group>]
           [--hybrid-position <first|last>] [--schedule <file.json>]
           [--source <block>] [--passkey-block <block>] [--out <dir>]

SPARSEFIELD_SEED is used when --seed is absent.";

// ---------------------------------------------------------------------------
// Errors and exit codes
// ---------------------------------------------------------------------------

enum CliError {
    /// Bad flags or bad input files: exit 2.
    Usage(String),
    /// Runtime failure (I/O and friends): exit 1.
    Failure(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(msg) | Self::Failure(msg) => f.write_str(msg),
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Failure(e.to_string())
    }
}

/// Entry point for the binary; `args` excludes the program name.
/// Returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    let result = match args.first().map(String::as_str) {
        Some("mask") => cmd_mask(&args[1..]),
        Some("analyze") => cmd_analyze(&args[1..]),
        Some("verify") => cmd_verify(&args[1..]),
        Some("attn") => cmd_attn(&args[1..]),
        Some("flow") => cmd_flow(&args[1..]),
        Some("--help" | "-h" | "help") => {
            println!("{USAGE}");
            return 0;
        }
        Some(other) => usage(format!("unknown command `{other}`")),
        None => usage("missing command"),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `sparsefield --help` for usage");
            2
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

// ---------------------------------------------------------------------------
// Flag parsing
// ---------------------------------------------------------------------------

/// Raw parsed flags. Values are kept in order; flags listed as `multi`
/// (only `--compare`) may take several values in a row.
struct Flags {
    values: Vec<(String, Vec<String>)>,
    positionals: Vec<String>,
}

impl Flags {
    fn parse(args: &[String], multi: &[&str]) -> Result<Self, CliError> {
        let mut values: Vec<(String, Vec<String>)> = Vec::new();
        let mut positionals = Vec::new();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            if let Some(name) = arg.strip_prefix("--") {
                let mut vals = Vec::new();
                i += 1;
                if multi.contains(&name) {
                    while i < args.len() && !args[i].starts_with("--") {
                        vals.push(args[i].clone());
                        i += 1;
                    }
                    if vals.is_empty() {
                        return usage(format!("flag --{name} needs at least one value"));
                    }
                } else {
                    if i >= args.len() || args[i].starts_with("--") {
                        return usage(format!("flag --{name} needs a value"));
                    }
                    vals.push(args[i].clone());
                    i += 1;
                }
                values.push((name.to_string(), vals));
            } else {
                positionals.push(arg.clone());
                i += 1;
            }
        }
        Ok(Self { values, positionals })
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.values
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v[0].as_str())
    }

    fn get_all(&self, name: &str) -> Vec<&str> {
        self.values
            .iter()
            .filter(|(n, _)| n == name)
            .flat_map(|(_, v)| v.iter().map(String::as_str))
            .collect()
    }

    fn check_known(&self, known: &[&str]) -> Result<(), CliError> {
        for (name, _) in &self.values {
            if !known.contains(&name.as_str()) {
                return usage(format!("unknown flag --{name}"));
            }
        }
        Ok(())
    }

    fn require(&self, name: &str) -> Result<&str, CliError> {
        self.get(name)
            .ok_or_else(|| CliError::Usage(format!("missing required flag --{name}")))
    }

    fn usize_flag(&self, name: &str) -> Result<Option<usize>, CliError> {
        self.get(name).map(|s| parse_num::<usize>(s, name)).transpose()
    }

    fn require_usize(&self, name: &str) -> Result<usize, CliError> {
        parse_num(self.require(name)?, name)
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, flag: &str) -> Result<T, CliError> {
    s.parse::<T>()
        .map_err(|_| CliError::Usage(format!("flag --{flag}: cannot parse `{s}`")))
}

const PATTERN_FLAGS: &[&str] =
    &["family", "window", "sink", "slash", "dilation", "segments", "block-tokens", "config"];

fn parse_segments(spec: &str) -> Result<Vec<(usize, usize)>, CliError> {
    spec.split(',')
        .map(|pair| {
            let (w, r) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("--segments: `{pair}` is not w:r")))?;
            Ok((parse_num(w, "segments")?, parse_num(r, "segments")?))
        })
        .collect()
}

/// Build a pattern config from `--config <file>` or from inline flags.
fn pattern_from_flags(flags: &Flags) -> Result<PatternConfig, CliError> {
    if let Some(path) = flags.get("config") {
        if flags.get("family").is_some() {
            return usage("pass either --config or --family, not both");
        }
        return load_config(Path::new(path));
    }
    let family = Family::parse(flags.require("family")?).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut config = PatternConfig {
        family,
        window_blocks: flags.usize_flag("window")?.unwrap_or(0),
        sink_blocks: flags.usize_flag("sink")?.unwrap_or(0),
        slash_blocks: flags.usize_flag("slash")?.unwrap_or(0),
        dilation_blocks: flags.usize_flag("dilation")?.unwrap_or(0),
        segments: Vec::new(),
        block_tokens: flags.usize_flag("block-tokens")?.unwrap_or(crate::patterns::DEFAULT_BLOCK_TOKENS),
    };
    if let Some(spec) = flags.get("segments") {
        config.segments = parse_segments(spec)?;
    }
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

fn load_config(path: &Path) -> Result<PatternConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let config: PatternConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    config
        .validate()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(config)
}

fn build_mask_checked(config: &PatternConfig, n_blocks: usize) -> Result<BlockMask, CliError> {
    if config.is_degenerate_for(n_blocks) {
        eprintln!(
            "warning: {} budget {} meets or exceeds {n_blocks} blocks; mask is effectively dense",
            config.family,
            config.window_blocks + config.sink_blocks + config.slash_blocks
        );
    }
    build_mask(config, n_blocks).map_err(|e| CliError::Usage(e.to_string()))
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

/// Written beside every output batch. Re-running the same command line
/// reproduces byte-identical CSV/PBM/PGM outputs; only `timestamp` differs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub seed: Option<u64>,
    pub output_dir: String,
    pub tool_version: String,
    pub timestamp: u64,
}

impl RunManifest {
    fn new(subcommand: &str, args: &[String], config_path: Option<String>, seed: Option<u64>, out: &Path) -> Self {
        Self {
            command: std::iter::once(subcommand.to_string())
                .chain(args.iter().cloned())
                .collect::<Vec<_>>()
                .join(" "),
            config_path,
            seed,
            output_dir: out.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    fn write(&self, out: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(out.join("manifest.json"), json + "\n")?;
        Ok(())
    }
}

fn out_dir(flags: &Flags) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(flags.get("out").unwrap_or("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

// ---------------------------------------------------------------------------
// mask
// ---------------------------------------------------------------------------

fn cmd_mask(args: &[String]) -> Result<i32, CliError> {
    let flags = Flags::parse(args, &[])?;
    flags.check_known(&[PATTERN_FLAGS, ["blocks", "out"].as_slice()].concat())?;
    let config = pattern_from_flags(&flags)?;
    let n_blocks = flags.require_usize("blocks")?;
    let mask = build_mask_checked(&config, n_blocks)?;
    let out = out_dir(&flags)?;

    fs::write(out.join("mask.pbm"), mask.to_pbm())?;
    let mut csv = String::from("q,k\n");
    for (q, k) in mask.allowed_pairs() {
        csv.push_str(&format!("{q},{k}\n"));
    }
    fs::write(out.join("mask.csv"), csv)?;
    RunManifest::new("mask", args, flags.get("config").map(String::from), None, &out)
        .write(&out)?;

    println!(
        "pattern={} n_blocks={} allowed={} last_row_budget={} sparsity_full_square={:.6} sparsity_causal_triangle={:.6}",
        config.family,
        n_blocks,
        mask.allowed_count(),
        mask.row_budget(n_blocks - 1),
        mask.sparsity(SparsityDenominator::FullSquare),
        mask.sparsity(SparsityDenominator::CausalTriangle),
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

fn cmd_analyze(args: &[String]) -> Result<i32, CliError> {
    let flags = Flags::parse(args, &["compare"])?;
    flags.check_known(
        &[PATTERN_FLAGS, ["blocks", "source", "layers", "compare", "out"].as_slice()].concat(),
    )?;
    let n_blocks = flags.require_usize("blocks")?;
    let compare = flags.get_all("compare");
    let configs: Vec<PatternConfig> = if compare.is_empty() {
        vec![pattern_from_flags(&flags)?]
    } else {
        if flags.get("family").is_some() || flags.get("config").is_some() {
            return usage("pass either --compare or a single pattern, not both");
        }
        compare
            .iter()
            .map(|path| load_config(Path::new(path)))
            .collect::<Result<_, _>>()?
    };
    let source = match flags.usize_flag("source")? {
        Some(s) if s < n_blocks => s,
        Some(s) => return usage(format!("flag --source: block {s} out of range")),
        None => n_blocks - 1,
    };
    let max_steps = flags.usize_flag("layers")?.unwrap_or(n_blocks);
    let out = out_dir(&flags)?;

    let mut coverage_csv = String::from("pattern,n_blocks,source,k,reachable,coverage\n");
    let mut gaps_csv = String::from("pattern,n_blocks,source,block\n");
    for config in &configs {
        let mask = build_mask_checked(config, n_blocks)?;
        let profile =
            reach_profile(&mask, source, max_steps).map_err(|e| CliError::Usage(e.to_string()))?;
        let last = profile.fixpoint_step().max(1).min(max_steps);
        for k in 1..=last {
            coverage_csv.push_str(&format!(
                "{},{},{},{},{},{:.6}\n",
                config.family,
                n_blocks,
                source,
                k,
                profile.steps[k].len(),
                profile.coverage[k],
            ));
        }
        let gaps = coverage_gaps(&mask, source).map_err(|e| CliError::Usage(e.to_string()))?;
        for block in gaps.iter() {
            gaps_csv.push_str(&format!("{},{},{},{}\n", config.family, n_blocks, source, block));
        }
        println!(
            "pattern={} source={} steps_to_fixpoint={} final_coverage={:.6} gaps={}",
            config.family,
            source,
            profile.fixpoint_step(),
            profile.coverage[last],
            gaps.len(),
        );
    }
    fs::write(out.join("coverage.csv"), coverage_csv)?;
    fs::write(out.join("gaps.csv"), gaps_csv)?;
    RunManifest::new("analyze", args, flags.get("config").map(String::from), None, &out)
        .write(&out)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(args: &[String]) -> Result<i32, CliError> {
    let flags = Flags::parse(args, &[])?;
    flags.check_known(&["n", "out"])?;
    for p in &flags.positionals {
        if p != "theorem" {
            return usage(format!("unexpected argument `{p}`"));
        }
    }
    let n = flags.require_usize("n")?;
    if n < 2 {
        return usage("flag --n: need at least 2 vertices");
    }
    let report = theory::verify(n);
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    println!(
        "{verdict} n={} mode={} max_out_degree={} (bound {}) max_bfs_distance={} (bound {}) pairs_checked={}",
        report.n,
        report.mode,
        report.max_out_degree,
        report.out_degree_bound,
        report.max_bfs_distance,
        report.distance_bound,
        report.pairs_checked,
    );
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{json}");
    if let Some(dir) = flags.get("out") {
        let out = out_dir(&flags)?;
        fs::write(out.join("verify.json"), json + "\n")?;
        RunManifest::new("verify", args, None, None, &out).write(&out)?;
        let _ = dir;
    }
    Ok(if report.pass { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// attn
// ---------------------------------------------------------------------------

fn resolve_seed(flags: &Flags) -> Result<u64, CliError> {
    if let Some(s) = flags.get("seed") {
        return parse_num(s, "seed");
    }
    if let Ok(s) = std::env::var("SPARSEFIELD_SEED") {
        return s
            .parse::<u64>()
            .map_err(|_| CliError::Usage(format!("SPARSEFIELD_SEED: cannot parse `{s}`")));
    }
    Ok(0)
}

struct AttnRun {
    config: PatternConfig,
    seq: usize,
    block_tokens: usize,
    heads: usize,
    dim: usize,
    seed: u64,
    tol: f64,
}

fn attn_check<T: Element>(run: &AttnRun) -> Result<i32, CliError> {
    let AttnRun { config, seq, block_tokens, heads, dim, seed, tol } = run;
    let (seq, block_tokens, heads, dim, seed, tol) =
        (*seq, *block_tokens, *heads, *dim, *seed, *tol);
    let mask = build_mask_checked(config, seq / block_tokens)?;
    let problem = AttentionProblem::<T>::random(seq, heads, dim, seed);
    let (sparse, report) =
        block_sparse_attention(&problem, &mask).map_err(|e| CliError::Failure(e.to_string()))?;
    let dense = dense_attention(&problem, &expand_mask(&mask, block_tokens))
        .map_err(|e| CliError::Failure(e.to_string()))?;
    let diff = max_abs_diff(&sparse, &dense);
    let pass = diff <= tol;
    println!(
        "pattern={} precision={} seq={} block_tokens={} heads={} dim={} seed={} max_abs_diff={:.3e} tol={:.3e} score_flops={} dense_flops={} ratio={:.6} {}",
        config.family,
        T::NAME,
        seq,
        block_tokens,
        heads,
        dim,
        seed,
        diff,
        tol,
        report.score_flops,
        report.dense_flops,
        report.ratio,
        if pass { "PASS" } else { "FAIL" },
    );
    Ok(if pass { 0 } else { 1 })
}

fn cmd_attn(args: &[String]) -> Result<i32, CliError> {
    let flags = Flags::parse(args, &[])?;
    flags.check_known(
        &[PATTERN_FLAGS, ["seq", "heads", "dim", "seed", "tol", "precision"].as_slice()].concat(),
    )?;
    let seq = flags.require_usize("seq")?;
    let block_tokens = flags.require_usize("block-tokens")?;
    if block_tokens == 0 || seq == 0 || seq % block_tokens != 0 {
        return usage(format!(
            "flag --seq: {seq} is not a positive multiple of --block-tokens {block_tokens}"
        ));
    }
    let run = AttnRun {
        config: pattern_from_flags(&flags)?.with_block_tokens(block_tokens),
        seq,
        block_tokens,
        heads: flags.require_usize("heads")?,
        dim: flags.require_usize("dim")?,
        seed: resolve_seed(&flags)?,
        tol: flags.get("tol").map(|s| parse_num(s, "tol")).transpose()?.unwrap_or(1e-5),
    };
    match flags.get("precision").unwrap_or("double") {
        "double" => attn_check::<f64>(&run),
        "single" => attn_check::<f32>(&run),
        other => usage(format!("flag --precision: `{other}` is not single|double")),
    }
}

// ---------------------------------------------------------------------------
// flow
// ---------------------------------------------------------------------------

/// Schedule JSON: an explicit layer list or a repeated pattern with an
/// optional hybrid full-attention overlay.
#[derive(Deserialize)]
#[serde(untagged)]
enum ScheduleSpec {
    Explicit {
        layers: Vec<PatternConfig>,
    },
    Repeat {
        repeat: PatternConfig,
        count: usize,
        #[serde(default)]
        hybrid_full_every: Option<usize>,
        #[serde(default)]
        hybrid_full_count: Option<usize>,
        #[serde(default)]
        hybrid_full_position: Option<String>,
    },
}

fn schedule_from_spec(spec: ScheduleSpec) -> Result<LayerSchedule, CliError> {
    let schedule = match spec {
        ScheduleSpec::Explicit { layers } => LayerSchedule::new(layers),
        ScheduleSpec::Repeat {
            repeat,
            count,
            hybrid_full_every,
            hybrid_full_count,
            hybrid_full_position,
        } => {
            let last = match hybrid_full_position.as_deref() {
                None | Some("last") => true,
                Some("first") => false,
                Some(other) => {
                    return usage(format!("hybrid_full_position `{other}` is not first|last"))
                }
            };
            match (hybrid_full_every, hybrid_full_count) {
                (Some(group), Some(full)) if group >= 1 => {
                    LayerSchedule::hybrid(repeat, count, group, full, last)
                }
                (None, None) => LayerSchedule::uniform(repeat, count),
                _ => return usage(
                    "hybrid_full_every and hybrid_full_count must be present together (every >= 1)",
                ),
            }
        }
    };
    schedule.map_err(|e| CliError::Usage(e.to_string()))
}

fn schedule_from_flags(flags: &Flags, block_tokens_hint: Option<usize>) -> Result<LayerSchedule, CliError> {
    if let Some(path) = flags.get("schedule") {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?;
        let spec: ScheduleSpec = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
        return schedule_from_spec(spec);
    }
    let depth = flags.require_usize("layers")?;
    let mut sparse = pattern_from_flags(flags)?;
    if let Some(bt) = block_tokens_hint {
        sparse = sparse.with_block_tokens(bt);
    }
    let schedule = if let Some(hybrid) = flags.get("hybrid") {
        let (full, group) = hybrid
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("flag --hybrid: `{hybrid}` is not full:group")))?;
        let full: usize = parse_num(full, "hybrid")?;
        let group: usize = parse_num(group, "hybrid")?;
        if group == 0 || full > group {
            return usage("flag --hybrid: need full <= group and group >= 1");
        }
        let last = match flags.get("hybrid-position").unwrap_or("last") {
            "last" => true,
            "first" => false,
            other => return usage(format!("flag --hybrid-position: `{other}` is not first|last")),
        };
        LayerSchedule::hybrid(sparse, depth, group, full, last)
    } else {
        LayerSchedule::uniform(sparse, depth)
    };
    schedule.map_err(|e| CliError::Usage(e.to_string()))
}

/// Log-scaled grayscale PGM, one row per layer. Zero stays black; positive
/// values map to 1..=255 linearly in log space between the smallest and
/// largest positive value.
fn influence_pgm(values: &[Vec<f64>]) -> String {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for row in values {
        for &v in row {
            if v > 0.0 {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    let width = values[0].len();
    let mut pgm = format!("P2\n{} {}\n255\n", width, values.len());
    for row in values {
        let mut line = String::with_capacity(width * 4);
        for (i, &v) in row.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            let pixel = if v <= 0.0 {
                0
            } else if hi <= lo {
                255
            } else {
                1 + ((v.ln() - lo.ln()) / (hi.ln() - lo.ln()) * 254.0).round() as u32
            };
            line.push_str(&pixel.to_string());
        }
        pgm.push_str(&line);
        pgm.push('\n');
    }
    pgm
}

fn cmd_flow(args: &[String]) -> Result<i32, CliError> {
    let flags = Flags::parse(args, &[])?;
    flags.check_known(
        &[
            PATTERN_FLAGS,
            ["blocks", "layers", "hybrid", "hybrid-position", "schedule", "source", "passkey-block", "out"]
                .as_slice(),
        ]
        .concat(),
    )?;
    let n_blocks = flags.require_usize("blocks")?;
    if n_blocks == 0 {
        return usage("flag --blocks: need at least 1 block");
    }
    let block_tokens = flags.usize_flag("block-tokens")?;
    let schedule = schedule_from_flags(&flags, block_tokens)?;
    let source = match flags.usize_flag("source")? {
        Some(s) if s < n_blocks => s,
        Some(s) => return usage(format!("flag --source: block {s} out of range")),
        None => 0,
    };
    let out = out_dir(&flags)?;

    let field = propagate_influence(&schedule, n_blocks, source)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut influence_csv = String::from("layer,block,value\n");
    for (layer, row) in field.values.iter().enumerate() {
        for (block, &value) in row.iter().enumerate() {
            influence_csv.push_str(&format!("{layer},{block},{value}\n"));
        }
    }
    fs::write(out.join("influence.csv"), influence_csv)?;
    fs::write(out.join("influence.pgm"), influence_pgm(&field.values))?;

    let depths = retrieval_depths(&schedule, n_blocks)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut retr_csv = String::from("k,retrievable,alpha\n");
    for k in 1..=schedule.depth() {
        let reached = depths.iter().filter(|d| d.is_some_and(|v| v <= k)).count();
        retr_csv.push_str(&format!("{k},{reached},{:.6}\n", reached as f64 / n_blocks as f64));
    }
    fs::write(out.join("retrievability.csv"), retr_csv)?;
    RunManifest::new("flow", args, flags.get("schedule").map(String::from), None, &out)
        .write(&out)?;

    println!(
        "layers={} blocks={} source={} final_coverage={:.6}",
        schedule.depth(),
        n_blocks,
        source,
        depths.iter().filter(|d| d.is_some_and(|v| v <= schedule.depth())).count() as f64
            / n_blocks as f64,
    );
    if let Some(passkey) = flags.usize_flag("passkey-block")? {
        if passkey >= n_blocks {
            return usage(format!("flag --passkey-block: block {passkey} out of range"));
        }
        let retrievable = depths[passkey].is_some_and(|d| d <= schedule.depth());
        println!(
            "passkey_block={} retrievable={} depth={}",
            passkey,
            retrievable,
            depths[passkey].map_or("unreachable".to_string(), |d| d.to_string()),
        );
    }
    Ok(0)
}
