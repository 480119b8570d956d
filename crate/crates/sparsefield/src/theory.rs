//! Machine checking of the power-of-two offset graph's connectivity bounds.
//!
//! The graph under test has vertices `1..=n` and an edge `(i, j)` whenever
//! `i - j` is an exact power of two. Three facts are verified against each
//! other: the out-degree of every vertex stays within `floor(log2 n)`, BFS
//! distance between any pair equals the binary weight (popcount) of their
//! index difference, and the binary decomposition of that difference is a
//! valid hop-by-hop path witness.
//!
//! Vertices are 1-based here; block masks elsewhere are 0-based. The mask
//! for the same edge set is `patterns::PatternConfig::power_pure()`, with
//! vertex `i` corresponding to block `i - 1`.

use std::fmt;

use serde::Serialize;

use crate::rng::SplitMix64;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TheoryError {
    /// Vertex index outside `1..=n`.
    NodeOutOfRange { node: usize, n: usize },
    /// Paths only run from a later vertex down to an earlier one.
    TargetNotBelowSource { source: usize, target: usize },
}

impl fmt::Display for TheoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NodeOutOfRange { node, n } => {
                write!(f, "vertex {node} out of range 1..={n}")
            }
            Self::TargetNotBelowSource { source, target } => {
                write!(f, "target {target} must be strictly below source {source}")
            }
        }
    }
}

impl std::error::Error for TheoryError {}

// ---------------------------------------------------------------------------
// Out-degree and path witnesses
// ---------------------------------------------------------------------------

/// Number of outgoing edges of vertex `i`: offsets `2^k` with `i - 2^k >= 1`.
///
/// Equals `floor(log2(i - 1)) + 1` for `i >= 2` and `0` for `i = 1`, which
/// never exceeds `floor(log2 n)`.
pub fn power_out_degree(i: usize, n: usize) -> Result<usize, TheoryError> {
    if i < 1 || i > n {
        return Err(TheoryError::NodeOutOfRange { node: i, n });
    }
    Ok((0..)
        .map(|k| 1usize << k)
        .take_while(|&offset| offset < i)
        .count())
}

/// A hop-by-hop path from `source` down to `target` along power-of-two edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathWitness {
    pub source: usize,
    pub target: usize,
    /// Power-of-two offsets, descending; they sum to `source - target` and
    /// there is one per set bit of that difference.
    pub hops: Vec<usize>,
}

impl PathWitness {
    /// Re-check every structural invariant of the witness.
    pub fn is_valid(&self) -> bool {
        if self.target >= self.source {
            return false;
        }
        let d = self.source - self.target;
        let mut at = self.source;
        for &hop in &self.hops {
            if !hop.is_power_of_two() || hop >= at {
                return false;
            }
            at -= hop;
        }
        at == self.target
            && self.hops.iter().sum::<usize>() == d
            && self.hops.len() == d.count_ones() as usize
    }
}

/// Build the path witness induced by the binary decomposition of
/// `source - target`, hops in descending order.
pub fn binary_path(source: usize, target: usize) -> Result<PathWitness, TheoryError> {
    if target >= source {
        return Err(TheoryError::TargetNotBelowSource { source, target });
    }
    let d = source - target;
    let mut hops = Vec::with_capacity(d.count_ones() as usize);
    let mut bit = 1usize << (usize::BITS - 1 - d.leading_zeros());
    while bit > 0 {
        if d & bit != 0 {
            hops.push(bit);
        }
        bit >>= 1;
    }
    Ok(PathWitness { source, target, hops })
}

// ---------------------------------------------------------------------------
// Verification report
// ---------------------------------------------------------------------------

/// A `(source, target, value)` triple recording where an extremum occurred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Extremum {
    pub source: usize,
    pub target: usize,
    pub value: usize,
}

/// Outcome of [`verify`]: measured extrema, the bounds they were checked
/// against, and the witnesses attaining them.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    /// `exhaustive` for n <= 4096, `sampled` above.
    pub mode: &'static str,
    /// Number of (source, target) pairs whose BFS distance was checked.
    pub pairs_checked: u64,
    pub max_out_degree: usize,
    /// Vertex attaining `max_out_degree`.
    pub max_out_degree_at: usize,
    /// `floor(log2 n)`; the out-degree bound. The strict form "< log2 n"
    /// is attained with equality at i = n when n is a power of two, so the
    /// non-strict bound is what gets asserted.
    pub out_degree_bound: usize,
    /// Vertex where out-degree equals the bound exactly, when one was seen.
    pub out_degree_bound_attained_at: Option<usize>,
    pub max_bfs_distance: usize,
    pub max_bfs_distance_pair: Extremum,
    /// `ceil(log2 n)`; the distance bound.
    pub distance_bound: usize,
    pub pass: bool,
    /// Populated with a description of the first failure, if any.
    pub failure: Option<String>,
}

/// BFS distances from `source` to every vertex in `1..=n` along power-of-two
/// down-edges. `u32::MAX` marks unreached vertices (none exist for this edge
/// set, but the checker does not assume that).
fn bfs_distances(source: usize, n: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; n + 1];
    dist[source] = 0;
    let mut queue = std::collections::VecDeque::with_capacity(source);
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let next = dist[v] + 1;
        let mut offset = 1usize;
        while offset < v {
            let j = v - offset;
            if dist[j] == u32::MAX {
                dist[j] = next;
                queue.push_back(j);
            }
            offset <<= 1;
        }
    }
    dist
}

const EXHAUSTIVE_LIMIT: usize = 4096;
const SAMPLED_RANDOM_SOURCES: usize = 1000;
const SAMPLE_SEED: u64 = 0x5eed_0001;

/// Sources for sampled mode: every power of two and its neighbors inside
/// range, `n` itself, plus 1000 seeded pseudorandom vertices.
fn sampled_sources(n: usize) -> Vec<usize> {
    let mut sources = Vec::new();
    let mut p = 1usize;
    while p <= n {
        for candidate in [p.saturating_sub(1), p, p + 1] {
            if (2..=n).contains(&candidate) {
                sources.push(candidate);
            }
        }
        if p > n / 2 {
            break;
        }
        p <<= 1;
    }
    sources.push(n);
    let mut rng = SplitMix64::new(SAMPLE_SEED);
    for _ in 0..SAMPLED_RANDOM_SOURCES {
        sources.push(2 + (rng.next_u64() as usize) % (n - 1));
    }
    sources.sort_unstable();
    sources.dedup();
    sources
}

/// Check the out-degree bound, the distance-equals-popcount law, and the
/// binary-path witnesses over the vertex set `1..=n`.
///
/// Exhaustive for `n <= 4096` (every source, every target); sampled above
/// (documented source set, all targets per sampled source). All three
/// computations — direct out-degree count, queue BFS, and binary
/// decomposition — are independent of one another.
pub fn verify(n: usize) -> VerifyReport {
    assert!(n >= 2, "verification needs at least 2 vertices");
    let exhaustive = n <= EXHAUSTIVE_LIMIT;
    let out_degree_bound = n.ilog2() as usize;
    let distance_bound = n.next_power_of_two().ilog2() as usize;

    let mut report = VerifyReport {
        n,
        mode: if exhaustive { "exhaustive" } else { "sampled" },
        pairs_checked: 0,
        max_out_degree: 0,
        max_out_degree_at: 1,
        out_degree_bound,
        out_degree_bound_attained_at: None,
        max_bfs_distance: 0,
        max_bfs_distance_pair: Extremum { source: 1, target: 1, value: 0 },
        distance_bound,
        pass: true,
        failure: None,
    };
    let fail = |report: &mut VerifyReport, msg: String| {
        report.pass = false;
        if report.failure.is_none() {
            report.failure = Some(msg);
        }
    };

    // Out-degree: checked for every vertex in both modes (O(n log n)).
    for i in 1..=n {
        let degree = power_out_degree(i, n).expect("i in range");
        if degree > report.max_out_degree {
            report.max_out_degree = degree;
            report.max_out_degree_at = i;
        }
        if degree == out_degree_bound {
            report.out_degree_bound_attained_at.get_or_insert(i);
        }
        if degree > out_degree_bound {
            fail(&mut report, format!("out-degree {degree} at vertex {i} exceeds {out_degree_bound}"));
        }
    }

    let sources: Vec<usize> =
        if exhaustive { (2..=n).collect() } else { sampled_sources(n) };

    for source in sources {
        let dist = bfs_distances(source, n);
        for (target, &got) in dist.iter().enumerate().take(source).skip(1) {
            report.pairs_checked += 1;
            let d = source - target;
            let expected = d.count_ones() as usize;
            if got == u32::MAX {
                fail(&mut report, format!("vertex {target} unreachable from {source}"));
                continue;
            }
            let got = got as usize;
            if got != expected {
                fail(
                    &mut report,
                    format!("distance {source}->{target} is {got}, popcount says {expected}"),
                );
            }
            if got > report.max_bfs_distance {
                report.max_bfs_distance = got;
                report.max_bfs_distance_pair = Extremum { source, target, value: got };
            }
            if got > distance_bound {
                fail(
                    &mut report,
                    format!("distance {source}->{target} = {got} exceeds {distance_bound}"),
                );
            }
            let witness = binary_path(source, target).expect("target below source");
            if !witness.is_valid() || witness.hops.len() != expected {
                fail(&mut report, format!("invalid path witness for {source}->{target}"));
            }
        }
    }
    report
}
