//! Counter-based deterministic random streams.
//!
//! Output k of a stream with key K is `mix64(K + k * GOLDEN)` where `mix64`
//! is the SplitMix64 finalizer. Substreams re-key with a mixed tag, so the
//! draws of one agent/step never depend on how many draws another consumer
//! made. The generator and mixing function are fixed here so other
//! implementations can reproduce simulation runs bit-exactly.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Episode seed for tournament pair (blue_idx, red_idx).
pub fn mix_episode_seed(base_seed: u64, blue_idx: u64, red_idx: u64) -> u64 {
    mix64(base_seed ^ mix64(blue_idx.wrapping_mul(GOLDEN) ^ red_idx.rotate_left(32)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamRng {
    key: u64,
    counter: u64,
}

impl StreamRng {
    pub fn from_seed(seed: u64) -> Self {
        StreamRng {
            key: mix64(seed ^ GOLDEN),
            counter: 0,
        }
    }

    /// Derive an independent stream; does not consume draws from `self`.
    pub fn substream(&self, tag: u64) -> StreamRng {
        StreamRng {
            key: mix64(self.key ^ mix64(tag.wrapping_add(GOLDEN))),
            counter: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)));
        self.counter += 1;
        v
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [0, n).
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.next_u64() % n
    }

    /// Normal(0, sigma) via Box-Muller.
    pub fn normal(&mut self, sigma: f64) -> f64 {
        if sigma == 0.0 {
            // Still consume the pair so downstream draws do not shift when
            // sigma changes.
            let _ = self.next_f64();
            let _ = self.next_f64();
            return 0.0;
        }
        let u1 = loop {
            let u = self.next_f64();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.next_f64();
        sigma * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}
