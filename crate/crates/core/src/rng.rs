//! Seeded randomness.
//!
//! All draws come from ChaCha8 (via `rand_chacha`), seeded with
//! `SeedableRng::seed_from_u64`. Both the stream cipher and the seed expansion
//! are specified algorithms with value-stability guarantees, so a seed yields
//! the same sequence on every platform. The integer and unit-interval mappings
//! live here rather than in `rand` so they cannot shift under a dependency
//! upgrade.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Seeded generator owned by exactly one simulation run.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
    words: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            words: 0,
        }
    }

    /// Number of 64-bit words consumed so far.
    pub fn words_drawn(&self) -> u64 {
        self.words
    }

    fn next_word(&mut self) -> u64 {
        self.words += 1;
        self.inner.next_u64()
    }

    /// Uniform integer on `1..=n`.
    ///
    /// Uses Lemire's multiply-and-reject mapping, so the result is exactly
    /// uniform. For small `n` a rejection is astronomically rare and one word
    /// is consumed per call.
    pub fn uniform_int(&mut self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "uniform_int needs n >= 1".to_string(),
            ));
        }
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = u128::from(self.next_word()) * u128::from(n);
            if (m as u64) >= threshold {
                return Ok((m >> 64) as u64 + 1);
            }
        }
    }

    /// Uniform real on `[0, 1)` with 53 bits of resolution.
    pub fn uniform_unit(&mut self) -> f64 {
        (self.next_word() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `uniform_int` for a count known to be positive.
    pub(crate) fn pick(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.uniform_int(n as u64).expect("n is positive") as usize
    }
}
