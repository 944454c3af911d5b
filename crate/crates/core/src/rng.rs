//! Seeded randomness. Every stochastic routine takes an explicit 64-bit seed
//! and draws from its own ChaCha8 stream; there is no ambient generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::C64;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed for stream `index` (block, restart,
/// trial, ...). SplitMix64 finalizer over the golden-ratio-offset input.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Circularly-symmetric complex Gaussian draw with `E|z|² = 1`.
pub fn complex_normal(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_normal_vec(rng: &mut impl Rng, len: usize) -> Vec<C64> {
    (0..len).map(|_| complex_normal(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }

    #[test]
    fn complex_normal_has_unit_power() {
        let mut rng = seeded(7);
        let v = complex_normal_vec(&mut rng, 200_000);
        let power: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64;
        assert!((power - 1.0).abs() < 0.01, "power {power}");
    }
}
