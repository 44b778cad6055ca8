//! Seeded random streams for parallel Monte Carlo.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Trials drawn from one set of streams.
pub const TRIALS_PER_BLOCK: u64 = 4096;

/// Independent substreams within a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Source = 0,
    Noise1 = 1,
    Noise2 = 2,
}

/// ChaCha8 generator for `(seed, block, stream)`. Blocks and streams map to
/// distinct ChaCha stream ids, so no two ever overlap.
pub fn block_rng(seed: u64, block: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block * 3 + stream as u64);
    rng
}

/// SplitMix64 finaliser, used to derive per-point seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `f` on a pool capped by `ZDJSCC_WORKERS` when it is set.
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let cap = std::env::var("ZDJSCC_WORKERS").ok().and_then(|v| v.trim().parse::<usize>().ok());
    match cap {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}
