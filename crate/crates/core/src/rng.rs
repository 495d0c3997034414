//! Seeded pseudo-random number generation with a pinned algorithm.
//!
//! Every randomized operation in this crate (train/validation splits, random-draw
//! balancing, weight initialization, epoch shuffling, dropout masks) draws from
//! [`Rng`], which is xoshiro256** seeded through SplitMix64. Both algorithms are
//! public-domain and fully specified below, so any implementation in any language
//! that reproduces them reproduces our splits and training runs bit for bit.
//!
//! Seeding: the four 64-bit words of xoshiro256** state are the first four
//! outputs of a SplitMix64 generator initialized with the user seed.
//!
//! Derived draws are likewise pinned:
//! - `next_f64` takes the top 53 bits of `next_u64` and scales by 2^-53.
//! - `below(n)` uses rejection sampling on `next_u64` (see the method docs).
//! - `shuffle` is a Fisher-Yates pass from the last index down to 1.
//! - `sample_indices` is a partial Fisher-Yates over `0..n` taking the first
//!   `m` slots.

/// SplitMix64 stream, used only to expand a 64-bit seed into xoshiro state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// xoshiro256** generator; the crate-wide source of randomness.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    /// Seed via SplitMix64 as described in the module docs.
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = SplitMix64::new(seed);
        Rng {
            s: [sm.next_u64(), sm.next_u64(), sm.next_u64(), sm.next_u64()],
        }
    }

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

    /// Uniform float in [0, 1) from the top 53 bits of one `next_u64` draw.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform float in [lo, hi); consumes exactly one draw.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n). Rejection sampling: accept `x < n * floor(MAX/n)`
    /// and return `x % n`, so every residue is equally likely.
    ///
    /// # Panics
    /// Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0) is undefined");
        let q = u64::MAX / n;
        let limit = q * n;
        loop {
            let x = self.next_u64();
            if x < limit {
                return x % n;
            }
        }
    }

    /// Fisher-Yates shuffle: for i from len-1 down to 1, swap i with `below(i+1)`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// Sample `m` distinct indices from `0..n`, uniformly without replacement.
    /// Partial Fisher-Yates: slot i (0..m) swaps with `i + below(n - i)`.
    ///
    /// # Panics
    /// Panics if `m > n`.
    pub fn sample_indices(&mut self, n: usize, m: usize) -> Vec<usize> {
        assert!(m <= n, "cannot sample {m} of {n} without replacement");
        let mut arr: Vec<usize> = (0..n).collect();
        for i in 0..m {
            let j = i + self.below((n - i) as u64) as usize;
            arr.swap(i, j);
        }
        arr.truncate(m);
        arr
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_xoshiro::rand_core::{RngCore, SeedableRng};
    use rand_xoshiro::Xoshiro256StarStar;

    // rand_xoshiro seeds Xoshiro256** from a u64 with SplitMix64, exactly the
    // scheme documented here, so it serves as an independent reference stream.
    #[test]
    fn matches_reference_xoshiro_stream() {
        for seed in [0u64, 1, 42, 0xDEAD_BEEF, u64::MAX] {
            let mut ours = Rng::from_seed(seed);
            let mut reference = Xoshiro256StarStar::seed_from_u64(seed);
            for _ in 0..256 {
                assert_eq!(ours.next_u64(), reference.next_u64());
            }
        }
    }

    #[test]
    fn next_f64_in_unit_interval() {
        let mut rng = Rng::from_seed(7);
        for _ in 0..10_000 {
            let x = rng.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn below_is_in_range_and_deterministic() {
        let mut a = Rng::from_seed(3);
        let mut b = Rng::from_seed(3);
        for n in 1..50u64 {
            let x = a.below(n);
            assert!(x < n);
            assert_eq!(x, b.below(n));
        }
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = Rng::from_seed(11);
        let mut items: Vec<u32> = (0..100).collect();
        rng.shuffle(&mut items);
        let mut sorted = items.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
        assert_ne!(items, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn sample_indices_distinct_and_in_range() {
        let mut rng = Rng::from_seed(5);
        let picked = rng.sample_indices(10, 4);
        assert_eq!(picked.len(), 4);
        let mut uniq = picked.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), 4);
        assert!(picked.iter().all(|&i| i < 10));
        // m == n yields a permutation
        let mut all = rng.sample_indices(6, 6);
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4, 5]);
    }
}
