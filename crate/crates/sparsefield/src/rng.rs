//! Seeded pseudorandom input generation.
//!
//! Tensors for the numeric equivalence checks are generated from a fully
//! specified generator so that independent implementations can reproduce
//! them bit-for-bit:
//!
//! * State: one 64-bit word. Each draw adds `0x9E3779B97F4A7C15` to the
//!   state, then mixes the result `z` with
//!   `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9`,
//!   `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`, returning `z ^ (z >> 31)`
//!   (the SplitMix64 construction, all arithmetic mod 2^64).
//! * Standard normals come from Box-Muller over consecutive draws `a, b`:
//!   `u1 = ((a >> 11) + 1) * 2^-53` in (0, 1],
//!   `u2 = (b >> 11) * 2^-53` in [0, 1),
//!   `r = sqrt(-2 ln u1)`, `theta = 2*pi*u2`, yielding the pair
//!   `(r cos theta, r sin theta)`, consumed cosine first.

/// SplitMix64 generator with Box-Muller normal output.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    cached_normal: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed, cached_normal: None }
    }

    /// Next raw 64-bit draw.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw. Pairs are generated together; the sine half is
    /// cached and returned on the following call.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(second) = self.cached_normal.take() {
            return second;
        }
        let a = self.next_u64();
        let b = self.next_u64();
        let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.cached_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Fill a vector with `count` normals.
    pub fn normals(&mut self, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.next_normal()).collect()
    }
}
