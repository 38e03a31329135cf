//! Deterministic random streams.
//!
//! Every random quantity is addressed by `(seed, replicate, stream id)`. The
//! seed and replicate pick a ChaCha8 key, the stream id selects one of the
//! 2^64 independent ChaCha streams under that key. Results therefore do not
//! depend on the order in which replicates or indices are generated, nor on
//! the number of worker threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Stream id reserved for quantities that belong to a replicate as a whole
/// rather than to a walk index (limit-process paths, single partial sums).
pub const REPLICATE_STREAM: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub seed: u64,
    pub replicate: u64,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        Self { seed, replicate: 0 }
    }

    pub fn replicate(self, replicate: u64) -> Self {
        Self { replicate, ..self }
    }

    /// The generator for substream `id` of this replicate.
    pub fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut seed_state = self.seed ^ 0x6a09_e667_f3bc_c908;
        let mut rep_state = self.replicate ^ splitmix64(&mut seed_state);
        let words = [
            splitmix64(&mut seed_state),
            splitmix64(&mut rep_state),
            splitmix64(&mut seed_state),
            splitmix64(&mut rep_state),
        ];
        for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(id);
        rng
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs `f` for replicates `0..n` and returns the results in replicate order.
///
/// `threads == 0` uses the global rayon pool. The output is identical for
/// every thread count because each replicate owns its own streams.
pub fn map_replicates<T, F>(n: u64, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let run = || (0..n).into_par_iter().map(&f).collect::<Vec<T>>();
    if threads == 0 {
        run()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        }
    }
}
