//! Synthetic inputs shared by the benchmarks.

use qdemux_core::TimeTagStream;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sorted Poisson-like stream: `n` tags with uniform gaps of mean `mean_gap_ps`.
pub fn random_stream(channel: u8, n: usize, mean_gap_ps: i64, seed: u64) -> TimeTagStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0i64;
    let tags: Vec<i64> = (0..n)
        .map(|_| {
            t += rng.random_range(1..=2 * mean_gap_ps);
            t
        })
        .collect();
    let duration = t as f64 * 1e-12;
    TimeTagStream::new(channel, tags, duration).expect("generated tags are sorted")
}
