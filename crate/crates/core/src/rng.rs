//! Deterministic pseudo-random numbers for instance generation.
//!
//! Every seeded artifact in this crate (Gaussian ensembles, sparse supports,
//! noise vectors) is drawn from [`SplitMix64`], a counter-based 64-bit
//! generator: the state advances by a fixed odd constant and the output is a
//! finalizing mix of the counter. The same `(seed, call sequence)` therefore
//! produces bit-identical streams on every platform, which the trace and
//! instance reproducibility guarantees rely on.

use crate::num;

/// SplitMix64 generator (Steele, Lea, Flood; the `java.util.SplittableRandom`
/// mix function).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform in `(0, 1]`; safe as a logarithm argument.
    pub fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform integer in `[0, n)`.
    pub fn next_below(&mut self, n: usize) -> usize {
        // Modulo bias is irrelevant here: n is always far below 2^64.
        (self.next_u64() % n as u64) as usize
    }

    /// Standard normal via Box–Muller. Draws two uniforms per call and keeps
    /// one value so streams stay aligned with the call count.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        num::sqrt(-2.0 * num::ln(u1)) * num::cos(2.0 * core::f64::consts::PI * u2)
    }

    /// Fill a fresh vector with standard normal entries.
    pub fn gaussian_vec(&mut self, n: usize) -> alloc::vec::Vec<f64> {
        let mut v = alloc::vec::Vec::with_capacity(n);
        for _ in 0..n {
            v.push(self.next_gaussian());
        }
        v
    }

    /// Sample `k` distinct indices from `[0, n)` (partial Fisher–Yates).
    pub fn distinct_indices(&mut self, k: usize, n: usize) -> alloc::vec::Vec<usize> {
        assert!(k <= n);
        let mut pool: alloc::vec::Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.next_below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_streams() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn uniform_range() {
        let mut r = SplitMix64::new(7);
        for _ in 0..10_000 {
            let x = r.next_f64();
            assert!((0.0..1.0).contains(&x));
            let y = r.next_f64_open();
            assert!(y > 0.0 && y <= 1.0);
        }
    }

    #[test]
    fn gaussian_moments() {
        let mut r = SplitMix64::new(3);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let g = r.next_gaussian();
            sum += g;
            sumsq += g * g;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn distinct_indices_are_distinct() {
        let mut r = SplitMix64::new(11);
        let idx = r.distinct_indices(32, 1024);
        assert_eq!(idx.len(), 32);
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 32);
    }
}
