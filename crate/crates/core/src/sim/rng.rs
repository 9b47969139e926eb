use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a random stream is used for. Streams for different purposes never
/// share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Mission = 1,
    AbortStudy = 2,
    Field = 3,
}

/// Seed root from which independent streams are derived by key, so results
/// do not depend on the order in which trials are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSource {
    seed: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, purpose: Purpose, trial: u64, robot: u64) -> ChaCha8Rng {
        let mut h = splitmix(self.seed);
        for k in [purpose as u64, trial, robot] {
            h = splitmix(h ^ k);
        }
        ChaCha8Rng::seed_from_u64(h)
    }
}
