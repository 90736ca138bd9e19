//! Portable generators.
//!
//! * SplitMix64 expands seeds and derives sub-seeds.
//! * xoshiro256** produces the sample streams; its 256-bit state is filled
//!   with four consecutive SplitMix64 outputs.
//! * A uniform double in `[0, 1)` is the top 53 bits of one output times
//!   `2^-53`.
//!
//! All of it is fixed-width integer arithmetic, so any implementation that
//! follows these definitions reproduces the same streams bit for bit.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Root seed of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Seed(pub u64);

impl From<u64> for Seed {
    fn from(value: u64) -> Self {
        Seed(value)
    }
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }
}

/// Sub-seed for stream `index` under `seed`: the first SplitMix64 output of
/// `seed XOR first_output(index)`. Pure, so any worker can compute any
/// stream's seed without coordination.
pub fn derive_seed(seed: Seed, index: u64) -> Seed {
    let salt = SplitMix64::new(index).next_u64();
    Seed(SplitMix64::new(seed.0 ^ salt).next_u64())
}

#[derive(Debug, Clone)]
pub struct Xoshiro256StarStar {
    s: [u64; 4],
}

impl Xoshiro256StarStar {
    pub fn from_state(s: [u64; 4]) -> Self {
        Self { s }
    }

    pub fn from_seed(seed: Seed) -> Self {
        let mut sm = SplitMix64::new(seed.0);
        let s = [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()];
        // SplitMix64 is a bijection on consecutive states, so four zero
        // outputs cannot happen.
        Self { s }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
