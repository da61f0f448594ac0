//! Counter-based random streams.
//!
//! Every trial draws from its own ChaCha stream keyed by
//! (master seed, purpose, trial index), so results do not depend on how trials
//! are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Separates independent uses of the same master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Cloud,
    Shot,
    Clicks,
    Drift,
    Synthetic,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Cloud => 0x636c_6f75_6400_0001,
            Purpose::Shot => 0x7368_6f74_0000_0002,
            Purpose::Clicks => 0x636c_6963_6b00_0003,
            Purpose::Drift => 0x6472_6966_7400_0004,
            Purpose::Synthetic => 0x7379_6e74_6800_0005,
        }
    }
}

/// Independent generator for `index` under `master_seed`.
pub fn stream(master_seed: u64, purpose: Purpose, index: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&purpose.tag().to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
