//! Seeded random streams.
//!
//! Every random draw derives from one user seed. Each consumer reads its own
//! ChaCha8 stream of that seed, so adding draws to one consumer never shifts
//! another:
//!
//! | stream | consumer                                   |
//! |--------|--------------------------------------------|
//! | 1      | random ensemble entries                    |
//! | 2      | row subsampling of the Wishart ensemble    |
//! | 3      | random partitions                          |
//! | 4      | ground-truth signals                       |
//! | 5      | measurement noise                          |
//! | 6      | solver sampling (minibatch choice)         |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Ensemble = 1,
    Subsample = 2,
    Partition = 3,
    Signal = 4,
    Noise = 5,
    Solver = 6,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
