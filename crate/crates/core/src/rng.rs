//! SplitMix64, the one generator every seeded path in the crate draws from.
//!
//! Update rule (all arithmetic wrapping mod 2^64):
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output z ^ (z >> 31)
//! ```
//!
//! Bounded draws use rejection on `u64` so no floating point touches sampled positions.

#[derive(Debug, Clone, PartialEq, Eq)]
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

    /// Uniform integer in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        // largest multiple of n that fits; reject the remainder band
        let limit = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < limit {
                return x % n;
            }
        }
    }

    /// True with probability `num / den`.
    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.below(den) < num
    }

    /// Zero-mean integer offset: popcount of `bits` fair coin flips minus `bits / 2`.
    /// Variance is `bits / 4`; `bits` must be even.
    pub fn centered_binomial(&mut self, bits: u32) -> i64 {
        debug_assert!(bits % 2 == 0);
        let mut remaining = bits;
        let mut ones = 0i64;
        while remaining > 0 {
            let take = remaining.min(64);
            let word = self.next_u64();
            let masked = if take == 64 { word } else { word & ((1u64 << take) - 1) };
            ones += masked.count_ones() as i64;
            remaining -= take;
        }
        ones - (bits / 2) as i64
    }
}

/// Number of coin flips giving a centered binomial with standard deviation close to `sigma`.
pub fn binomial_bits_for_sigma(sigma: f64) -> u32 {
    let half = (2.0 * sigma * sigma).round();
    (half.clamp(0.0, 8192.0) as u32) * 2
}

/// Independent sub-seed for `stream` under `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    SplitMix64::new(seed ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03)).next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_outputs() {
        // first outputs for seed 1234567, cross-checked with an independent evaluation of the update rule
        let mut r = SplitMix64::new(1234567);
        let got: Vec<u64> = (0..5).map(|_| r.next_u64()).collect();
        assert_eq!(
            got,
            vec![
                6457827717110365317,
                3203168211198807973,
                9817491932198370423,
                4593380528125082431,
                16408922859458223821,
            ]
        );
    }

    #[test]
    fn below_stays_in_range() {
        let mut r = SplitMix64::new(7);
        let mut seen = [0u32; 5];
        for _ in 0..5000 {
            seen[r.below(5) as usize] += 1;
        }
        assert!(seen.iter().all(|&c| c > 850 && c < 1150), "{seen:?}");
    }

    #[test]
    fn binomial_moments() {
        let mut r = SplitMix64::new(99);
        let bits = binomial_bits_for_sigma(2.0);
        assert_eq!(bits, 16);
        let draws: Vec<i64> = (0..20000).map(|_| r.centered_binomial(bits)).collect();
        let mean = draws.iter().sum::<i64>() as f64 / draws.len() as f64;
        let var = draws.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 0.1);
        assert!((var - 4.0).abs() < 0.3);
        assert_eq!(r.centered_binomial(0), 0);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_eq!(derive_seed(5, 3), derive_seed(5, 3));
    }
}
