//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha20 stream whose 32-byte
//! key is `SHA-256(seed as little-endian u64 ‖ label)`. Streams for different
//! labels are independent, so settings, sweep points and bootstrap replicas
//! can run in any order (or in parallel) and still reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use sha2::{Digest, Sha256};

/// Identifier embedded in reports next to the seed.
pub const GENERATOR: &str = "chacha20/sha256-substream-v1";

/// Independent stream for `label` under `seed`.
pub fn substream(seed: u64, label: &str) -> ChaCha20Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha20Rng::from_seed(key)
}

/// Derived 64-bit seed for `label`, used to hand a seed to a nested stage.
pub fn subseed(seed: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Multinomial draw of `n` trials by sequential conditional binomials.
pub fn multinomial<const K: usize>(rng: &mut ChaCha20Rng, n: u64, probs: &[f64; K]) -> [u64; K] {
    let mut counts = [0u64; K];
    let mut remaining = n;
    let mut mass = 1.0f64;
    for k in 0..K {
        if remaining == 0 {
            break;
        }
        if k == K - 1 {
            counts[k] = remaining;
            break;
        }
        let p = if mass > 0.0 { (probs[k] / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, p)
            .expect("probability clamped to [0, 1]")
            .sample(rng);
        counts[k] = draw;
        remaining -= draw;
        mass -= probs[k];
    }
    counts
}

/// Single binomial draw.
pub fn binomial(rng: &mut ChaCha20Rng, n: u64, p: f64) -> u64 {
    Binomial::new(n, p.clamp(0.0, 1.0))
        .expect("probability clamped to [0, 1]")
        .sample(rng)
}
