//! Counter-based random numbers: every draw is a pure function of
//! `(seed, stream, index)`, so parallel generation is reproducible.

/// SplitMix64 finaliser.
#[inline]
fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    seed: u64,
    stream: u64,
}

impl CounterRng {
    pub const fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn u64_at(&self, index: u64) -> u64 {
        let k = mix64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        let k = mix64(k ^ self.stream.wrapping_mul(0xd1b5_4a32_d192_ed03));
        mix64(k ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform_at(&self, index: u64) -> f64 {
        (self.u64_at(index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range_at(&self, index: u64, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform_at(index)
    }

    /// Sequential view over consecutive counters.
    pub fn iter(&self) -> CounterIter {
        CounterIter { rng: *self, next: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct CounterIter {
    rng: CounterRng,
    next: u64,
}

impl CounterIter {
    pub fn uniform(&mut self) -> f64 {
        let u = self.rng.uniform_at(self.next);
        self.next += 1;
        u
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}
