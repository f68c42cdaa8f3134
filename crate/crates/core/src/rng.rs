//! Deterministic pseudo-random numbers, implemented in-repo so that streams
//! are byte-identical on every platform.
//!
//! Two public-domain generators are written out in full:
//!
//! * **SplitMix64** — state `s`; each draw does `s += 0x9E3779B97F4A7C15`,
//!   then mixes `z = s; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//!   z = (z ^ (z >> 27)) * 0x94D049BB133111EB; return z ^ (z >> 31)`.
//!   Used for seeding and for deriving independent stream seeds.
//! * **xoshiro256++** — 256-bit state `[s0..s3]`; each draw returns
//!   `rotl(s0 + s3, 23) + s0` and updates the state with the xor/shift/rotate
//!   sequence below. Used for all sample streams.
//!
//! Floating-point draws take the top 53 bits of a `u64`, giving uniforms on
//! `[0, 1)` with full double precision.

/// SplitMix64 stepping; also the mixer used to expand seeds.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Derive the seed of an independent, labelled stream from a master seed.
///
/// Streams with different labels are decorrelated by the SplitMix64 mixer;
/// the same `(master, label)` pair always yields the same seed.
pub fn derive_seed(master: u64, label: u64) -> u64 {
    let mut sm = SplitMix64::new(master.wrapping_add(label.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    sm.next_u64()
}

/// xoshiro256++ stream.
#[derive(Clone, Debug)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    /// Expand `seed` into the 256-bit state with SplitMix64, as the
    /// generator's authors recommend. The state cannot become all-zero.
    pub fn seeded(seed: u64) -> Self {
        let mut sm = SplitMix64::new(seed);
        Rng {
            s: [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()],
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform on `[0, 1)` using the top 53 bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.uniform() * (hi - lo)
    }

    /// Uniform on `(-bound, bound)` (symmetric, for weight initialization).
    pub fn symmetric(&mut self, bound: f64) -> f64 {
        (2.0 * self.uniform() - 1.0) * bound
    }
}
