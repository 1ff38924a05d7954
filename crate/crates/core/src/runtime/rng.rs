//! PCG32 (XSH-RR, 64-bit state, 32-bit output).
//!
//! The generator is `rand_pcg::Pcg32`, which seeds like the reference
//! `pcg32_srandom_r(seed, stream)`.
//! A world seeded with `s` uses `Pcg32::new(s, WORLD_STREAM)`.
//!
//! Derived draws:
//! * `below(n)`: unbiased integer in `[0, n)` by rejecting outputs under
//!   `2^32 mod n`, then `r mod n`.
//! * `unit_f64()`: `(a >> 5) * 2^26 + (b >> 6)` over `2^53`, using two
//!   consecutive outputs `a` then `b`; uniform in `[0, 1)`.

use rand_pcg::rand_core::Rng;

/// Stream selector used for every world.
pub const WORLD_STREAM: u64 = 54;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pcg32(rand_pcg::Pcg32);

impl Pcg32 {
    pub fn new(seed: u64, stream: u64) -> Self {
        Pcg32(rand_pcg::Pcg32::new(seed, stream))
    }

    pub fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    /// Uniform integer in `[0, bound)`. `bound` must be positive.
    pub fn below(&mut self, bound: u32) -> u32 {
        assert!(bound > 0, "bound must be positive");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let r = self.next_u32();
            if r >= threshold {
                return r % bound;
            }
        }
    }

    pub fn unit_f64(&mut self) -> f64 {
        let a = u64::from(self.next_u32() >> 5);
        let b = u64::from(self.next_u32() >> 6);
        ((a << 26) | b) as f64 / (1u64 << 53) as f64
    }
}
